"""Truncated inverse-limit points and the maps built on them.

A :class:`Thread` is a finite backward orbit ``(x_0, ..., x_k)`` with
``f(x_{i+1}) = x_i``. Compared threads are assumed to share their tail beyond
``k``, so :func:`d_infty` is the product metric restricted to the stored
coordinates, which bounds the truncation error by ``1/(k+2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .families import (
    FamilyParam,
    evaluate,
    preimages,
    stabilized_interval,
)

DEFAULT_LENGTH = 33  # indices 0..32
DEFAULT_TOL = 1e-9

POLICIES = ("leftmost", "rightmost", "random")


class NoPreimageError(ValueError):
    """The last entry of a thread has no preimage in the stabilised image."""


def circle_distance(x, y):
    d = np.abs(np.mod(np.asarray(x, dtype=float) - y, 1.0))
    return np.minimum(d, 1.0 - d)


def carrier_distance(p: FamilyParam | None):
    """Phase-space metric for a family: arc length on the circle, else ``|.|``."""
    if p is not None and p.is_circle:
        return circle_distance
    return lambda x, y: np.abs(np.asarray(x, dtype=float) - y)


@dataclass(frozen=True)
class Thread:
    """Finite backward orbit of ``family``.

    ``entries[0]`` is the present; ``entries[i + 1]`` is a preimage of
    ``entries[i]`` up to ``tol``.
    """

    entries: np.ndarray
    family: FamilyParam
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 1 or e.size == 0:
            raise ValueError("thread entries must be a non-empty 1-d sequence")
        if self.family.is_circle:
            e = np.mod(e, 1.0)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        bad = self.defects()
        if bad.size and bad.max() > self.tol:
            i = int(np.argmax(bad))
            raise ValueError(
                f"entries {i}, {i + 1} violate f(x_{i + 1}) = x_{i} by {bad[i]:.3g}"
            )

    def defects(self) -> np.ndarray:
        """``d(f(x_{i+1}), x_i)`` for each consecutive pair."""
        e = self.entries
        if e.size < 2:
            return np.zeros(0)
        dist = carrier_distance(self.family)
        return np.atleast_1d(dist(evaluate(self.family, e[1:]), e[:-1]))

    def __len__(self):
        return self.entries.size

    def __getitem__(self, i):
        return self.entries[i]

    def project(self, k: int) -> float:
        """The coordinate projection ``pi_k``."""
        return float(self.entries[k])

    @property
    def depth(self) -> int:
        """Truncation index ``k`` (last stored coordinate)."""
        return self.entries.size - 1


def d_infty_arrays(U, V, metric=None) -> np.ndarray:
    """Row-wise product metric ``max_i min(d(x_i, y_i), 1) / (i + 1)``.

    ``U`` and ``V`` have shape ``(m, k + 1)`` (or ``(k + 1,)``); ``metric`` is
    a vectorised carrier distance (default ``|x - y|``).
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape != V.shape:
        raise ValueError(f"thread shapes differ: {U.shape} vs {V.shape}")
    d = np.abs(U - V) if metric is None else metric(U, V)
    if d.ndim > U.ndim:  # ambient threads: reduce per-entry coordinates
        d = np.linalg.norm(d, axis=-1)
    weights = 1.0 / np.arange(1, U.shape[-1] + 1)
    return np.max(np.minimum(d, 1.0) * weights, axis=-1)


def d_infty(u, v, metric=None) -> float:
    """Product-metric distance between two threads of equal length.

    Accepts :class:`Thread` objects (the family's carrier metric is used) or
    raw coordinate arrays. For ambient threads pass arrays of shape
    ``(k + 1, 2)``; the Euclidean norm is used per entry.
    """
    if isinstance(u, Thread) and isinstance(v, Thread):
        if len(u) != len(v):
            raise ValueError("threads must have equal truncation length")
        metric = metric or carrier_distance(u.family)
        return float(d_infty_arrays(u.entries, v.entries, metric))
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("threads must have equal truncation length")
    if u.ndim == 2:
        d = np.linalg.norm(u - v, axis=-1) if metric is None else metric(u, v)
        w = 1.0 / np.arange(1, u.shape[0] + 1)
        return float(np.max(np.minimum(d, 1.0) * w))
    return float(d_infty_arrays(u, v, metric))


def shift(u: Thread) -> Thread:
    """Natural-extension step: prepend ``f(x_0)`` and drop the last entry."""
    head = evaluate(u.family, u.entries[0])
    e = np.concatenate([[head], u.entries[:-1]])
    return Thread(e, u.family, u.tol)


def _choose(pre: np.ndarray, policy, rng) -> float:
    if isinstance(policy, (int, np.integer)):
        if not 0 <= policy < pre.size:
            raise NoPreimageError(f"branch {policy} absent; {pre.size} preimages")
        return float(pre[policy])
    if policy in ("L", "R"):
        return float(pre[0] if policy == "L" else pre[-1])
    if policy == "leftmost":
        return float(pre[0])
    if policy == "rightmost":
        return float(pre[-1])
    if policy == "random":
        if rng is None:
            raise ValueError("random policy needs an rng (np.random.Generator or seed)")
        rng = np.random.default_rng(rng)
        return float(pre[rng.integers(pre.size)])
    raise ValueError(f"unknown preimage policy {policy!r}")


def extend_backward(u: Thread, policy="leftmost", rng=None, box=None) -> Thread:
    """Append a preimage of the last entry, chosen by ``policy``.

    ``policy`` is ``"leftmost"``, ``"rightmost"``, ``"random"`` (needs
    ``rng``), a branch symbol ``"L"``/``"R"`` or an integer index into the
    sorted preimages. Only preimages inside the stabilised image interval
    (or ``box``) are eligible.
    """
    if box is None:
        box = stabilized_interval(u.family)
    pre = preimages(u.family, float(u.entries[-1]), box)
    if pre.size == 0:
        raise NoPreimageError(f"{u.entries[-1]!r} has no preimage in [{box.lo}, {box.hi}]")
    x = _choose(pre, policy, rng)
    return Thread(np.append(u.entries, x), u.family, u.tol)


def grow_thread(p: FamilyParam, x0: float, length: int = DEFAULT_LENGTH, policy="random",
                rng=None, tol: float = DEFAULT_TOL) -> Thread:
    """Thread of ``length`` entries starting at ``x0`` by repeated backward extension."""
    rng = np.random.default_rng(rng) if policy == "random" else rng
    box = stabilized_interval(p)
    u = Thread(np.array([x0]), p, tol)
    while len(u) < length:
        u = extend_backward(u, policy, rng, box)
    return u


def random_threads(p: FamilyParam, m: int, length: int = DEFAULT_LENGTH, rng=None):
    """``m`` threads with uniformly random heads in the stabilised image."""
    rng = np.random.default_rng(rng)
    box = stabilized_interval(p)
    lo, hi = (0.0, 1.0) if box.full else (box.lo, box.hi)
    return [grow_thread(p, rng.uniform(lo, hi), length, "random", rng) for _ in range(m)]


@dataclass(frozen=True)
class FatPoint:
    """A point ``(x, t)`` of ``X x I``; ``t`` is the family parameter."""

    x: float
    t: FamilyParam


class FatMap:
    """Slice-preserving map ``F(x, t) = (f_t(x), t)`` over one family kind.

    ``interval`` optionally restricts the admissible parameters to a box of
    ``values`` (one ``(lo, hi)`` pair per parameter).
    """

    def __init__(self, kind: str, interval=None):
        self.kind = kind
        self.interval = interval

    def check(self, t: FamilyParam):
        if t.kind != self.kind:
            raise ValueError(f"parameter of kind {t.kind!r}, fat map is {self.kind!r}")
        if self.interval is not None:
            for v, (lo, hi) in zip(t.values, self.interval):
                if not lo <= v <= hi:
                    raise ValueError(f"parameter {t} outside the fat map's interval")

    def __call__(self, fp: FatPoint) -> FatPoint:
        self.check(fp.t)
        return FatPoint(evaluate(fp.t, fp.x), fp.t)


def fat_apply(fp: FatPoint, fat: FatMap | None = None) -> FatPoint:
    """Apply the fat map; the parameter coordinate is passed through untouched."""
    fat = fat or FatMap(fp.t.kind)
    return fat(fp)


def _pairs_within(images: np.ndarray, r: float, period=None) -> np.ndarray:
    """Index pairs ``(i, j)``, ``i < j``, with image distance ``< r``."""
    Y = np.asarray(images, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if period is not None:
        # periodic first coordinate: duplicate the seam band
        Y = Y.copy()
        Y[:, 0] = np.mod(Y[:, 0], period)
        near = np.nonzero(Y[:, 0] < r)[0]
        extra = Y[near].copy()
        extra[:, 0] += period
        idx = np.concatenate([np.arange(len(Y)), near])
        Y = np.vstack([Y, extra])
    else:
        idx = np.arange(len(Y))
    tree = cKDTree(Y)
    pairs = tree.query_pairs(r, output_type="ndarray")
    if pairs.size == 0:
        return np.zeros((0, 2), dtype=int)
    d = np.linalg.norm(Y[pairs[:, 0]] - Y[pairs[:, 1]], axis=1)
    pairs = idx[pairs[d < r]]
    pairs = np.sort(pairs, axis=1)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    return np.unique(pairs, axis=0)


def epsilon_map_audit(g, sample, collision_tol: float, domain_metric=None,
                      image_period=None, return_pairs: bool = False):
    """Empirical ``epsilon`` for which ``g`` is an ``epsilon``-map on ``sample``.

    Returns the largest domain distance between two sample points whose
    images lie closer than ``collision_tol`` (0 if no pair collides).

    Parameters
    ----------
    g : callable
        Vectorised map applied to the whole ``sample`` array at once.
    sample : array_like, shape (m, ...)
        Domain points; rows are points.
    domain_metric : callable, optional
        ``metric(A, B)`` returning row-wise distances. Euclidean by default.
    image_period : float, optional
        Period of the first image coordinate (annulus images).
    """
    X = np.asarray(sample, dtype=float)
    if len(X) < 2:
        raise ValueError("audit needs at least two sample points")
    images = np.asarray(g(X), dtype=float)
    pairs = _pairs_within(images, collision_tol, image_period)
    if pairs.size == 0:
        eps = 0.0
    else:
        A, B = X[pairs[:, 0]], X[pairs[:, 1]]
        if domain_metric is None:
            diff = (A - B).reshape(len(A), -1)
            dist = np.linalg.norm(diff, axis=1)
        else:
            dist = np.asarray(domain_metric(A, B), dtype=float)
        eps = float(dist.max())
    return (eps, pairs) if return_pairs else eps


def brown_stage(j: int, u: Thread, slice_homeo=None) -> FatPoint:
    """Finite-stage approximant ``H o pi_j`` of the Brown homeomorphism.

    ``slice_homeo(x, t)`` is a slice homeomorphism of ``X`` (identity by
    default). The result depends only on the first ``j + 1`` entries, so it
    is a ``1/(j + 2)``-map on threads.
    """
    if len(u) <= j:
        raise ValueError(f"thread of length {len(u)} has no coordinate {j}")
    x = u.project(j)
    if slice_homeo is not None:
        x = float(slice_homeo(x, u.family))
    return FatPoint(x, u.family)


def brown_stage_arrays(j: int, entries: np.ndarray, slice_homeo=None, t=None) -> np.ndarray:
    """Vectorised :func:`brown_stage` on an ``(m, k + 1)`` array of threads."""
    x = np.asarray(entries, dtype=float)[:, j]
    return x if slice_homeo is None else np.asarray(slice_homeo(x, t), dtype=float)
