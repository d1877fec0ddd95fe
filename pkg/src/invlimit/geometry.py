"""Ambient surfaces, collar coordinates and the spine-collapsing map.

Two carriers are supported:

* ``disk``: the rectangle ``[0, 1] x [-1, 1]`` with spine ``y = 0``.
* ``annulus``: ``(R/Z) x [-1, 1]`` with spine the core circle ``r = 0``.

In both, the collar arc through a boundary point ``eta = (x, side)`` is the
vertical segment ``s -> (x, side * (1 - s))``, ``s`` in ``[0, 1]``. The
vertical edges ``{0, 1} x [-1, 1]`` of the rectangle are not part of the
boundary parameterisation: they are the (degenerate) collar fibres of the
spine endpoints, which keeps every fibre a vertical segment.

Points are plain ``numpy`` arrays of shape ``(..., 2)``; all functions are
vectorised over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("disk", "annulus")


@dataclass(frozen=True)
class ManifoldModel:
    """Carrier surface with its spine and linear collar."""

    kind: str = "disk"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")

    @property
    def periodic(self) -> bool:
        return self.kind == "annulus"

    @property
    def bounds(self) -> np.ndarray:
        """``[[xmin, ymin], [xmax, ymax]]`` of the carrier box."""
        return np.array([[0.0, -1.0], [1.0, 1.0]])

    def normalize(self, p) -> np.ndarray:
        """Reduce the angular coordinate mod 1 (annulus); validate bounds."""
        p = np.array(p, dtype=float)
        if p.shape[-1] != 2:
            raise ValueError("points must have a trailing axis of length 2")
        if self.periodic:
            p[..., 0] = np.mod(p[..., 0], 1.0)
        elif np.any((p[..., 0] < 0.0) | (p[..., 0] > 1.0)):
            raise ValueError("x coordinate outside the carrier [0, 1]")
        if np.any(np.abs(p[..., 1]) > 1.0):
            raise ValueError("second coordinate outside the carrier [-1, 1]")
        return p

    def contains(self, p, strict: bool = False) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        h = np.abs(p[..., 1])
        inside = h < 1.0 if strict else h <= 1.0
        if not self.periodic:
            inside &= (p[..., 0] >= 0.0) & (p[..., 0] <= 1.0)
        return inside


DISK = ManifoldModel("disk")
ANNULUS = ManifoldModel("annulus")


@dataclass(frozen=True)
class CollarCoord:
    """Boundary point ``(eta, side)`` and depth ``s`` along its collar arc.

    ``side`` is ``+1`` for the top (outer) boundary component and ``-1`` for
    the bottom (inner) one.
    """

    eta: float
    side: int
    s: float

    def __post_init__(self):
        if self.side not in (1, -1):
            raise ValueError("side must be +1 or -1")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"collar depth s={self.s} outside [0, 1]")


def _as_model(m) -> ManifoldModel:
    return m if isinstance(m, ManifoldModel) else ManifoldModel(m)


def collar_to_ambient(m, c: CollarCoord) -> np.ndarray:
    """Image of a collar coordinate in the carrier; ``s = 1`` lands on the spine."""
    m = _as_model(m)
    eta = np.mod(c.eta, 1.0) if m.periodic else c.eta
    if not m.periodic and not 0.0 <= eta <= 1.0:
        raise ValueError("boundary coordinate outside [0, 1]")
    return np.array([eta, c.side * (1.0 - c.s)])


def ambient_to_collar(m, p) -> CollarCoord:
    """Collar coordinate of a carrier point.

    Spine points (``s = 1``) are reported on the ``+`` component.
    """
    m = _as_model(m)
    x, y = m.normalize(p)
    side = 1 if y >= 0.0 else -1
    return CollarCoord(float(x), side, float(1.0 - abs(y)))


def collar_depth(p) -> np.ndarray:
    """Vectorised ``s`` coordinate: ``1 - |y|``."""
    return 1.0 - np.abs(np.asarray(p, dtype=float)[..., 1])


def retraction(m, p) -> np.ndarray:
    """Collapse every collar arc to its spine endpoint."""
    m = _as_model(m)
    q = m.normalize(p)
    q[..., 1] = 0.0
    return q


def phi(s):
    """Collar speed-up: ``2s`` on ``[0, 1/2]``, ``1`` on ``[1/2, 1]``."""
    s = np.asarray(s, dtype=float)
    if np.any((s < 0.0) | (s > 1.0)):
        raise ValueError("phi is defined on [0, 1]")
    out = np.minimum(2.0 * s, 1.0)
    return out if out.ndim else float(out)


def phi_delta(s, delta: float):
    """Homeomorphic approximant ``(1 - delta) * phi(s) + delta * s``.

    Strictly increasing for ``delta`` in ``(0, 1]`` and within ``delta / 2`` of
    :func:`phi` in sup norm.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    s = np.asarray(s, dtype=float)
    out = (1.0 - delta) * phi(s) + delta * s
    return out if np.ndim(out) else float(out)


def upsilon(m, p, delta: float | None = None) -> np.ndarray:
    """Push points along their collar arcs by ``phi`` (or ``phi_delta``).

    Without ``delta`` this collapses the closed neighbourhood ``s >= 1/2`` of the
    spine onto the spine; with ``delta`` it is a homeomorphism of the carrier.
    """
    m = _as_model(m)
    q = m.normalize(p)
    s = collar_depth(q)
    side = np.where(q[..., 1] >= 0.0, 1.0, -1.0)
    s_new = phi(s) if delta is None else phi_delta(s, delta)
    q[..., 1] = side * (1.0 - s_new)
    return q


def in_spine_neighbourhood(p) -> np.ndarray:
    """Membership in the preimage of the spine under :func:`upsilon`."""
    return collar_depth(p) >= 0.5
