import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invlimit.geometry import (
    ANNULUS,
    DISK,
    CollarCoord,
    ManifoldModel,
    ambient_to_collar,
    collar_to_ambient,
    in_spine_neighbourhood,
    phi,
    phi_delta,
    retraction,
    upsilon,
)
from invlimit.invlim import epsilon_map_audit


def test_model_validation():
    with pytest.raises(ValueError):
        ManifoldModel("sphere")
    with pytest.raises(ValueError):
        DISK.normalize([1.2, 0.0])
    with pytest.raises(ValueError):
        ANNULUS.normalize([0.2, 1.5])
    assert ANNULUS.normalize([1.25, 0.5])[0] == pytest.approx(0.25)


@pytest.mark.parametrize("model, coord, expected", [
    (DISK, CollarCoord(0.3, 1, 0.0), (0.3, 1.0)),
    (DISK, CollarCoord(0.3, 1, 1.0), (0.3, 0.0)),
    (ANNULUS, CollarCoord(0.25, -1, 0.5), (0.25, -0.5)),
])
def test_collar_to_ambient_examples(model, coord, expected):
    np.testing.assert_allclose(collar_to_ambient(model, coord), expected)


def test_collar_depth_rejected_outside_unit_interval():
    with pytest.raises(ValueError):
        CollarCoord(0.3, 1, 1.5)
    with pytest.raises(ValueError):
        CollarCoord(0.3, 0, 0.5)


@pytest.mark.parametrize("model, p, expected", [
    (DISK, (0.3, 1.0), (0.3, 1, 0.0)),
    (DISK, (0.7, -0.25), (0.7, -1, 0.75)),
    (ANNULUS, (0.0, 0.0), (0.0, 1, 1.0)),
])
def test_ambient_to_collar_examples(model, p, expected):
    c = ambient_to_collar(model, p)
    assert (c.eta, c.side) == pytest.approx(expected[:2])
    assert c.s == pytest.approx(expected[2])


@pytest.mark.parametrize("model, p, expected", [
    (DISK, (0.3, 0.8), (0.3, 0.0)),
    (DISK, (0.3, 0.0), (0.3, 0.0)),
    (ANNULUS, (0.6, -1.0), (0.6, 0.0)),
])
def test_retraction_examples(model, p, expected):
    np.testing.assert_allclose(retraction(model, p), expected)


def test_phi_examples():
    assert phi(0.25) == 0.5
    assert phi(0.75) == 1.0
    assert phi_delta(0.75, 0.1) == pytest.approx(0.975)
    with pytest.raises(ValueError):
        phi(1.5)
    with pytest.raises(ValueError):
        phi_delta(0.5, 0.0)


def test_upsilon_examples():
    np.testing.assert_allclose(upsilon(DISK, (0.3, 0.25)), (0.3, 0.0))
    np.testing.assert_allclose(upsilon(DISK, (0.3, 1.0)), (0.3, 1.0))
    np.testing.assert_allclose(upsilon(DISK, (0.3, 0.5), 0.1), (0.3, 0.05))


def _grid(n=100, m=100):
    X, Y = np.meshgrid(np.linspace(0, 1, n), np.linspace(-1, 1, m), indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=-1)


def test_retraction_idempotent():
    P = _grid()
    R = retraction(DISK, P)
    assert np.array_equal(retraction(DISK, R), R)


def test_upsilon_delta_injective_on_grid():
    P = _grid()
    assert epsilon_map_audit(lambda Q: upsilon(DISK, Q, 0.05), P, 1e-9) == 0.0


def test_upsilon_approximation_bound():
    P = _grid(32, 32)
    for delta in (0.01, 0.1, 0.5):
        gap = np.abs(upsilon(DISK, P, delta) - upsilon(DISK, P)).max()
        # collar arcs have length 1, so the bound is delta / 2 in the carrier
        assert gap <= delta / 2 + 1e-15


def test_spine_neighbourhood_is_preimage_of_spine():
    P = _grid(21, 81)
    on_spine = upsilon(DISK, P)[:, 1] == 0.0
    assert np.array_equal(on_spine, in_spine_neighbourhood(P))


@given(st.floats(0, 1), st.floats(-1, 1).filter(lambda y: abs(y) > 1e-12),
       st.sampled_from([DISK, ANNULUS]))
def test_collar_round_trip(x, y, model):
    c = ambient_to_collar(model, (x, y))
    back = collar_to_ambient(model, c)
    expected = model.normalize((x, y))
    assert np.allclose(back, expected, atol=1e-12) or (
        model.periodic and abs(abs(back[0] - expected[0]) - 1.0) < 1e-12)


def test_vertical_edges_are_spine_endpoint_fibres():
    # moving along the left edge keeps the collar coordinate continuous
    ys = np.linspace(-1, 1, 11)
    etas = [ambient_to_collar(DISK, (0.0, y)).eta for y in ys]
    assert set(etas) == {0.0}
