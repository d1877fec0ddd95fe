import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invlimit.harness import io
from invlimit.harness.cli import main
from invlimit.harness.config import (
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    parse_config,
    serialize_config,
)


# --- config -----------------------------------------------------------------

@given(st.sampled_from(["attractor", "continuity", "periodic"]),
       st.floats(0.0, 2.0), st.floats(0.0, 0.2499), st.floats(0.0, 0.2499),
       st.integers(0, 2**64 - 1), st.integers(1, 500), st.integers(100, 5000))
def test_config_roundtrip(name, s, delta, eps, seed, seeds, transient):
    cfg = ExperimentConfig(name=name, params=(s,), delta=delta, eps=eps, seed=seed,
                           seeds=seeds, transient=transient).validate()
    assert parse_config(serialize_config(cfg)) == cfg


def test_config_text_and_comments():
    cfg = parse_config("# c\nexperiment.name=rotation\n\nfamily.kind=standard\n"
                       "family.params=2, 0.3  # b, omega\nrng.seed=5\n")
    assert cfg.param().values == (2.0, 0.3) and cfg.seed == 5
    np.testing.assert_allclose(ExperimentConfig().grid(), np.arange(120, 191) / 100)


@pytest.mark.parametrize("text, key", [
    ("fatten.delta=0.3\nrng.seed=1", "fatten.delta"),
    ("family.params=3\nrng.seed=1", "family.params"),
    ("experiment.name=foo\nrng.seed=1", "experiment.name"),
    ("budget.transient=10\nrng.seed=1", "budget.transient"),
    ("tongue.b_max=9\nrng.seed=1", "tongue.b_max"),
    ("rng.seed=-1", "rng.seed"),
    ("bogus.key=1\nrng.seed=1", "bogus.key"),
    ("budget.n=abc\nrng.seed=1", "budget.n"),
    ("just text", "line 1"),
    ("family.kind=tent", "rng.seed"),
])
def test_config_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert str(info.value).startswith(key)


def test_overrides_are_copies():
    cfg = ExperimentConfig(seed=1)
    new = apply_overrides(cfg, ["fatten.eps=0.02", ("budget.seeds", 7)])
    assert (new.eps, new.seeds) == (0.02, 7) and cfg.eps == 0.01


# --- io ---------------------------------------------------------------------

@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=30))
def test_csv_float_roundtrip(values):
    data = io.csv_bytes(("v",), [(v,) for v in values])
    lines = data.decode().splitlines()[1:]
    assert [float(c) for c in lines] == values


def test_csv_and_ppm_files(tmp_path):
    rows = [(1, 0.1, True), (2, 1e-300, False)]
    p = io.write_csv(tmp_path / "a" / "x.csv", ("i", "v", "b"), rows)
    header, arr = io.read_csv(p)
    assert header == ["i", "v", "b"]
    np.testing.assert_array_equal(arr, [[1, 0.1, 1], [2, 1e-300, 0]])
    mask = np.random.default_rng(0).random((7, 11)) < 0.5
    q = io.write_ppm(tmp_path / "m.ppm", mask)
    assert q.read_bytes().startswith(b"P6\n11 7\n255\n")
    np.testing.assert_array_equal(io.read_ppm(q), mask)
    assert not list(tmp_path.glob("**/*.tmp"))
    with pytest.raises(ValueError):
        io.ppm_bytes(np.zeros(3, bool))


def test_manifest_roundtrip(tmp_path):
    entries = {"a.b": "1", "c": "x=y"}
    p = io.write_manifest(tmp_path / "manifest.txt", entries)
    assert io.read_manifest(p) == entries
    assert len(io.sha256_file(p)) == 64


# --- cli --------------------------------------------------------------------

def run(tmp_path, name, *args):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def test_attractor_command(tmp_path):
    code, out = run(tmp_path, "a", "attractor", "--seed", "3", "--set", "budget.seeds=20",
                    "--set", "budget.keep=10", "--set", "budget.transient=100",
                    "--set", "cover.resolution=32", "--set", "cover.steps=5")
    assert code == 0
    header, rows = io.read_csv(out / "cloud.csv")
    assert header == ["seed_index", "iter", "x_or_theta", "y_or_r"] and rows.shape == (200, 4)
    assert io.read_ppm(out / "cover.ppm").shape == (32, 32)
    man = io.read_manifest(out / "manifest.txt")
    assert man["config.rng.seed"] == "3"
    assert man["output.cloud.csv.sha256"] == io.sha256_file(out / "cloud.csv")


def test_runs_are_deterministic(tmp_path):
    args = ["attractor", "--seed", "11", "--set", "budget.seeds=15", "--set", "budget.keep=5"]
    _, a = run(tmp_path, "a", *args)
    _, b = run(tmp_path, "b", *args, "--threads", "4")
    _, c = run(tmp_path, "c", *args[:2], "12", *args[3:])
    assert (a / "cloud.csv").read_bytes() == (b / "cloud.csv").read_bytes()
    ma, mb = io.read_manifest(a / "manifest.txt"), io.read_manifest(b / "manifest.txt")
    assert ma["output.cloud.csv.sha256"] == mb["output.cloud.csv.sha256"]
    assert (a / "cloud.csv").read_bytes() != (c / "cloud.csv").read_bytes()


def test_contracting_tent_collapses(tmp_path):
    _, out = run(tmp_path, "a", "attractor", "--seed", "0", "--set", "family.params=0.5",
                 "--set", "budget.seeds=30", "--set", "budget.keep=10")
    assert float(io.read_manifest(out / "manifest.txt")["result.cloud_diameter"]) < 1e-3


def test_tongues_command(tmp_path):
    code, out = run(tmp_path, "t", "tongues", "--seed", "0", "--set", "tongue.res_b=12",
                    "--set", "tongue.res_omega=17")
    assert code == 0
    mask = io.read_ppm(out / "tongue.ppm")
    assert mask.shape == (12, 17)
    _, rows = io.read_csv(out / "tongue.csv")
    assert rows.shape == (12 * 17, 6)
    np.testing.assert_array_equal(rows[:, 5].reshape(12, 17).astype(bool), mask)


def test_rotation_command(tmp_path):
    code, out = run(tmp_path, "r", "rotation", "--seed", "0", "--set", "family.params=0,0.3",
                    "--set", "budget.seeds=10", "--set", "budget.n=5000")
    assert code == 0
    _, row = io.read_csv(out / "rotation_interval.csv")
    assert row[0, 2:4] == pytest.approx([0.3, 0.3], abs=1e-9)
    _, orbits = io.read_csv(out / "rotation_orbits.csv")
    assert orbits.shape == (10, 5) and np.all(orbits[:, 4] == 1)


def test_continuity_command(tmp_path):
    code, out = run(tmp_path, "c", "continuity", "--seed", "1", "--threads", "2",
                    "--set", "grid.start=1.5", "--set", "grid.stop=1.6",
                    "--set", "budget.seeds=100", "--set", "budget.keep=50")
    assert code == 0
    _, rows = io.read_csv(out / "continuity.csv")
    assert rows.shape == (10, 2)
    assert rows[:, 1].max() < 0.05


def test_periodic_and_entropy_commands(tmp_path):
    code, out = run(tmp_path, "p", "periodic", "--seed", "0", "--set", "budget.max_period=4")
    assert code == 0
    _, rows = io.read_csv(out / "periodic.csv")
    np.testing.assert_array_equal(rows[:, 1], [2, 4, 8, 16])
    assert np.all(rows[:, 4] == rows[:, 1])
    code, out = run(tmp_path, "e", "entropy", "--seed", "0", "--set", "family.params=1.5")
    assert code == 0
    _, rows = io.read_csv(out / "entropy.csv")
    assert rows[-1, 2] == pytest.approx(np.log(1.5), abs=0.01)


def test_config_file_and_errors(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("experiment.name=entropy\nfamily.params=1.8\nrng.seed=9\n")
    code, out = run(tmp_path, "e", "entropy", "--config", str(cfg))
    assert code == 0 and io.read_manifest(out / "manifest.txt")["config.rng.seed"] == "9"
    assert run(tmp_path, "x", "attractor", "--config", str(cfg))[0] == 2
    assert run(tmp_path, "y", "attractor")[0] == 2
    assert "rng.seed" in capsys.readouterr().err
    assert run(tmp_path, "z", "attractor", "--seed", "1", "--set", "fatten.eps=1")[0] == 2
    with pytest.raises(SystemExit):
        main(["attractor", "--seed", "-4"])


def test_verify_invariants_only(monkeypatch, capsys):
    from invlimit.harness import acceptance

    monkeypatch.setattr(acceptance, "ACCEPTANCE", ())
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] I7" in out and out.strip().endswith("7/7 checks passed")
