"""Fattened near-homeomorphisms of the disk and annulus and their attractors.

Disk model
    The phase interval of an interval family is normalised to ``u`` in
    ``[0, 1]`` and placed on the spine through the chart
    ``x = delta + (1 - 2 delta) u``. The fattened map is ::

        (x, y) -> (delta + (1 - 2 delta) f(u) + delta * y,  eps * (2x - 1))

    The second coordinate records ``x``, and then the first recovers ``y``, so
    the map is injective for ``delta > 0``; both coordinates stay inside the
    carrier, and ``|y'| <= eps``. Arguments ``u`` outside ``[0, 1]`` (only
    reachable in the ``delta`` margins of the rectangle) are clipped.

Annulus model
    For the standard family, ::

        (theta, r) -> (f(theta) + delta * r  mod 1,  eps * cos(2 pi (theta - theta0)))

    Injectivity is not guaranteed here and is audited per parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import binary_dilation
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .families import (
    FamilyParam,
    derivative,
    evaluate,
    lift_eval,
    lipschitz,
    phase_interval,
    stabilization_index,
    tent_periodic_points,
)
from .geometry import ManifoldModel

DEFAULT_THETA0 = 0.17
MAX_COVER_RESOLUTION = 4096


@dataclass(frozen=True)
class FattenedMap:
    """Injective thickening of a 1-d map on the disk or annulus.

    ``delta`` is the spine offset and ``eps`` the recorder thickness, both in
    ``[0, 1/4)``; ``delta = eps = 0`` gives the (non-injective) limiting map
    whose spine dynamics is exactly ``f``.
    """

    param: FamilyParam
    delta: float = 0.01
    eps: float = 0.01
    theta0: float = DEFAULT_THETA0
    model: ManifoldModel = field(default=None)

    def __post_init__(self):
        model = self.model
        if model is None:
            model = ManifoldModel("annulus" if self.param.is_circle else "disk")
        elif isinstance(model, str):
            model = ManifoldModel(model)
        object.__setattr__(self, "model", model)
        if model.periodic != self.param.is_circle:
            raise ValueError(f"{self.param.kind} family does not live on a {model.kind}")
        for name in ("delta", "eps"):
            v = getattr(self, name)
            if not 0.0 <= v < 0.25:
                raise ValueError(f"{name}={v} outside [0, 1/4)")

    # chart between phase space and the spine ---------------------------------

    @property
    def _phase(self):
        box = phase_interval(self.param)
        return box.lo, box.hi - box.lo

    def phase_to_spine(self, z):
        """Carrier spine coordinate of a phase-space point."""
        z = np.asarray(z, dtype=float)
        if self.model.periodic:
            return np.mod(z, 1.0)
        lo, w = self._phase
        return self.delta + (1.0 - 2.0 * self.delta) * (z - lo) / w

    def spine_to_phase(self, x):
        x = np.asarray(x, dtype=float)
        if self.model.periodic:
            return np.mod(x, 1.0)
        lo, w = self._phase
        return lo + w * (x - self.delta) / (1.0 - 2.0 * self.delta)

    def normalized_map(self, u):
        """The family acting on normalised phase ``u`` in ``[0, 1]``."""
        lo, w = self._phase
        return (evaluate(self.param, lo + w * np.asarray(u, dtype=float)) - lo) / w

    def spine_map(self, x):
        """Limit dynamics on the spine, in carrier coordinates."""
        if self.model.periodic:
            return evaluate(self.param, x)
        d = self.delta
        u = np.clip((np.asarray(x, dtype=float) - d) / (1.0 - 2.0 * d), 0.0, 1.0)
        return d + (1.0 - 2.0 * d) * self.normalized_map(u)

    # the map -------------------------------------------------------------------

    def lift_apply(self, P) -> np.ndarray:
        """Apply the map without reducing the angle (annulus lift)."""
        P = np.asarray(P, dtype=float)
        x, y = P[..., 0], P[..., 1]
        out = np.empty(np.broadcast(x, y).shape + (2,))
        if self.model.periodic:
            out[..., 0] = lift_eval(self.param, x) + self.delta * y
            out[..., 1] = self.eps * np.cos(2.0 * math.pi * (x - self.theta0))
        else:
            out[..., 0] = self.spine_map(x) + self.delta * y
            out[..., 1] = self.eps * (2.0 * x - 1.0)
        return out

    def __call__(self, P) -> np.ndarray:
        out = self.lift_apply(P)
        if self.model.periodic:
            out[..., 0] = np.mod(out[..., 0], 1.0)
        return out

    def jacobian(self, P) -> np.ndarray:
        """Derivative matrices, shape ``(..., 2, 2)``."""
        P = np.asarray(P, dtype=float)
        x = P[..., 0]
        J = np.zeros(x.shape + (2, 2))
        if self.model.periodic:
            J[..., 0, 0] = derivative(self.param, np.mod(x, 1.0))
            J[..., 1, 0] = -2.0 * math.pi * self.eps * np.sin(2.0 * math.pi * (x - self.theta0))
        else:
            d = self.delta
            lo, w = self._phase
            u = (x - d) / (1.0 - 2.0 * d)
            inside = (u >= 0.0) & (u <= 1.0)
            J[..., 0, 0] = np.where(inside, derivative(self.param, lo + w * u), 0.0)
            J[..., 1, 0] = 2.0 * self.eps
        J[..., 0, 1] = self.delta
        return J

    @property
    def spine_lipschitz(self) -> float:
        """Lipschitz constant of the normalised spine map."""
        return lipschitz(self.param)


def fattened_apply(F: FattenedMap, p) -> np.ndarray:
    """One step of the fattened map on a point or array of points."""
    return F(F.model.normalize(p))


# attractor sampling -----------------------------------------------------------


@dataclass
class AttractorCloud:
    """Orbit samples collected after discarding transients."""

    points: np.ndarray
    seed_index: np.ndarray
    iteration: np.ndarray
    param: FamilyParam
    delta: float
    eps: float
    transient: int
    keep: int
    rng_seed: int
    periodic: bool = False

    def __len__(self):
        return len(self.points)

    @property
    def diameter(self) -> float:
        """Largest pairwise distance within the sample."""
        return point_set_diameter(self.points, self.periodic)


def point_set_diameter(P, periodic: bool = False, max_points: int = 4000) -> float:
    """Exact diameter for planar sets (via the convex hull); on the annulus the
    brute-force diameter of an evenly thinned subsample."""
    P = np.asarray(P, dtype=float)
    if len(P) < 2:
        return 0.0
    if periodic:
        Q = P[:: max(1, len(P) // max_points)]
        dth = np.abs(Q[:, None, 0] - Q[None, :, 0]) % 1.0
        dth = np.minimum(dth, 1.0 - dth)
        dr = Q[:, None, 1] - Q[None, :, 1]
        return float(np.sqrt(dth**2 + dr**2).max())
    try:
        H = P[ConvexHull(P).vertices]
    except (QhullError, ValueError):
        # degenerate (collinear or repeated) sample: extremes along the main axis
        c = P - P.mean(axis=0)
        axis = np.linalg.svd(c, full_matrices=False)[2][0]
        proj = c @ axis
        H = P[[np.argmin(proj), np.argmax(proj)]]
    D = np.linalg.norm(H[:, None, :] - H[None, :, :], axis=-1)
    return float(D.max())


def random_carrier_points(model: ManifoldModel, m: int, rng) -> np.ndarray:
    rng = np.random.default_rng(rng)
    P = np.empty((m, 2))
    P[:, 0] = rng.uniform(0.0, 1.0, m)
    P[:, 1] = rng.uniform(-1.0, 1.0, m)
    return P


def attract_cloud(F, seeds: int = 200, transient: int = 1000, keep: int = 100,
                  rng_seed: int = 0) -> AttractorCloud:
    """Sample the attractor of ``F`` from ``seeds`` random initial points.

    Each orbit runs ``transient`` steps before ``keep`` consecutive points are
    recorded. Fully determined by ``rng_seed``.
    """
    if transient < 100:
        raise ValueError("transient must be >= 100")
    P = random_carrier_points(F.model, seeds, rng_seed)
    for _ in range(transient):
        P = F(P)
    out = np.empty((keep, seeds, 2))
    for i in range(keep):
        out[i] = P
        P = F(P)
    pts = out.transpose(1, 0, 2).reshape(-1, 2)
    seed_index = np.repeat(np.arange(seeds), keep)
    iteration = np.tile(np.arange(transient, transient + keep), seeds)
    return AttractorCloud(pts, seed_index, iteration, F.param, F.delta, F.eps,
                          transient, keep, rng_seed, F.model.periodic)


# outer approximation by boxes -------------------------------------------------


@dataclass
class BoxCover:
    """Occupied cells of a ``resolution x resolution`` grid on the carrier.

    Cell ``(i, j)`` spans ``x`` in ``[i, i+1] / res`` and
    ``y`` in ``-1 + 2 [j, j+1] / res``.
    """

    resolution: int
    occupied: np.ndarray
    steps: int = 0
    history: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return int(self.occupied.sum())

    def cell_of(self, P) -> tuple[np.ndarray, np.ndarray]:
        P = np.asarray(P, dtype=float)
        n = self.resolution
        i = np.clip(np.floor(P[..., 0] * n).astype(int), 0, n - 1)
        j = np.clip(np.floor((P[..., 1] + 1.0) * 0.5 * n).astype(int), 0, n - 1)
        return i, j

    def contains(self, P) -> np.ndarray:
        i, j = self.cell_of(P)
        return self.occupied[i, j]

    def issubset(self, other: "BoxCover") -> bool:
        return bool(np.all(~self.occupied | other.occupied))


def _cell_samples(k: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, k)
    return np.stack(np.meshgrid(t, t, indexing="ij"), axis=-1).reshape(-1, 2)


def attract_cover(F, resolution: int = 128, n: int = 30, samples: int = 3,
                  periodic: bool | None = None) -> BoxCover:
    """Nested box covers of ``F^n(M)``.

    Starting from the full carrier, every occupied cell is sampled on a
    ``samples x samples`` lattice (corners included), the hit cells are
    dilated by one cell and intersected with the current cover.
    """
    if resolution > MAX_COVER_RESOLUTION:
        raise ValueError(f"resolution {resolution} exceeds {MAX_COVER_RESOLUTION}")
    if periodic is None:
        periodic = bool(getattr(getattr(F, "model", None), "periodic", False))
    res = resolution
    cover = BoxCover(res, np.ones((res, res), dtype=bool))
    cover.history.append(cover.count)
    offs = _cell_samples(samples)
    structure = np.ones((3, 3), dtype=bool)
    for step in range(n):
        ii, jj = np.nonzero(cover.occupied)
        base = np.stack([ii / res, -1.0 + 2.0 * jj / res], axis=-1)
        pts = base[:, None, :] + offs[None, :, :] * np.array([1.0 / res, 2.0 / res])
        img = np.asarray(F(pts.reshape(-1, 2)), dtype=float)
        if periodic:
            img[:, 0] = np.mod(img[:, 0], 1.0)
        hit = np.zeros_like(cover.occupied)
        i, j = cover.cell_of(img)
        hit[i, j] = True
        if periodic:
            padded = np.concatenate([hit[-1:], hit, hit[:1]], axis=0)
            hit = binary_dilation(padded, structure)[1:-1]
        else:
            hit = binary_dilation(hit, structure)
        cover = BoxCover(res, hit & cover.occupied, step + 1, cover.history)
        cover.history.append(cover.count)
    return cover


# distances --------------------------------------------------------------------


def hausdorff(A, B, periodic: bool = False) -> float:
    """Symmetric Hausdorff distance between finite planar point sets.

    Nearest neighbours come from a k-d tree, so large clouds are never compared
    all-pairs. With ``periodic`` the first coordinate is an angle in ``R/Z``
    and distances use the product of arc length and ``|dr|``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("Hausdorff distance of an empty set")
    if periodic:
        lo = min(A[:, 1].min(), B[:, 1].min())
        span = max(A[:, 1].max(), B[:, 1].max()) - lo
        box = np.array([1.0, 4.0 * span + 4.0])

        def prep(X):
            Y = X.copy()
            Y[:, 0] = np.mod(Y[:, 0], 1.0)
            Y[:, 1] -= lo
            return Y

        A, B = prep(A), prep(B)
        ta, tb = cKDTree(A, boxsize=box), cKDTree(B, boxsize=box)
    else:
        ta, tb = cKDTree(A), cKDTree(B)
    dab = tb.query(A, k=1)[0].max()
    dba = ta.query(B, k=1)[0].max()
    return float(max(dab, dba))


def semiconjugacy_residual(F: FattenedMap, cloud) -> float:
    """``sup d(f(R z), R(F z))`` over the cloud, with ``R`` the spine retraction.

    On the disk ``f`` acts on spine coordinates as the normalised family map.
    """
    Z = cloud.points if isinstance(cloud, AttractorCloud) else np.asarray(cloud, dtype=float)
    FZ = F(Z)
    if F.model.periodic:
        a = evaluate(F.param, Z[:, 0])
        d = np.abs(np.mod(a - FZ[:, 0], 1.0))
        return float(np.minimum(d, 1.0 - d).max())
    return float(np.abs(F.normalized_map(Z[:, 0]) - FZ[:, 0]).max())


def semiconjugacy_bound(F: FattenedMap) -> float:
    """The a-priori bound ``2 delta + Lip(f) (delta + eps)``."""
    return 2.0 * F.delta + F.spine_lipschitz * (F.delta + F.eps)


# periodic orbits --------------------------------------------------------------


def orbit_residual(F: FattenedMap, p, n: int, shift: float = 0.0):
    """``F^n(p) - p - (shift, 0)`` and its Jacobian (lift coordinates)."""
    q = np.asarray(p, dtype=float)
    J = np.eye(2)
    for _ in range(n):
        J = F.jacobian(q) @ J
        q = F.lift_apply(q)
    return q - p - np.array([shift, 0.0]), J - np.eye(2)


def newton_periodic(F: FattenedMap, p0, n: int, shift: float = 0.0, tol: float = 1e-12,
                    max_iter: int = 60):
    """Damped Newton solve of ``F^n(p) = p + (shift, 0)``.

    Returns ``(point, residual_norm, converged)``.
    """
    p = np.array(p0, dtype=float)
    G, DG = orbit_residual(F, p, n, shift)
    r = float(np.linalg.norm(G))
    for _ in range(max_iter):
        if r < tol:
            break
        try:
            step = np.linalg.solve(DG, -G)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-6:
            trial = p + lam * step
            Gt, DGt = orbit_residual(F, trial, n, shift)
            rt = float(np.linalg.norm(Gt))
            if rt < r:
                p, G, DG, r = trial, Gt, DGt, rt
                break
            lam *= 0.5
        else:
            break
    return p, r, r < tol


@dataclass
class PeriodReport:
    period: int
    tent_count: int
    converged: int
    distinct: int
    matched: int
    max_residual: float
    max_spine_offset: float
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.matched == self.tent_count == self.distinct


def periodic_match(F: FattenedMap, max_period: int = 6, tol: float = 1e-9,
                   distinct_tol: float = 1e-7) -> list[PeriodReport]:
    """Pair every fixed point of ``T_s^n`` with a fixed point of ``F^n``.

    Each exact tent point ``u`` seeds Newton's method at
    ``(chart(u), eps * (2 chart(T^(n-1) u) - 1))``, the spine lift of its
    orbit. A seed counts as matched when it converges within ``tol`` to a
    point not claimed by another seed.
    """
    if F.param.kind != "tent" or F.model.periodic:
        raise ValueError("periodic_match is defined for the fattened tent family")
    s = F.param.values[0]
    if not 1.0 < s <= 2.0:
        raise ValueError("periodic_match needs s in (1, 2]")
    if max_period > 8:
        raise ValueError("max_period is capped at 8")
    reports = []
    for n in range(1, max_period + 1):
        pts = tent_periodic_points(s, n)
        found, residuals, offsets, failures = [], [], [], []
        for u, word in pts:
            prev = u
            for _ in range(n - 1):
                prev = evaluate(F.param, prev)
            x = float(F.phase_to_spine(u))
            seed = np.array([x, F.eps * (2.0 * float(F.phase_to_spine(prev)) - 1.0)])
            p, r, _ = newton_periodic(F, seed, n, tol=min(tol, 1e-13))
            if not r < tol:
                failures.append((u, word, r))
                continue
            found.append(p)
            residuals.append(r)
            offsets.append(abs(p[0] - x))
        found = np.array(found).reshape(-1, 2)
        distinct = 0
        if len(found):
            D = np.linalg.norm(found[:, None] - found[None], axis=-1)
            np.fill_diagonal(D, np.inf)
            distinct = int(np.sum(D.min(axis=1) > distinct_tol)) if len(found) > 1 else 1
        reports.append(PeriodReport(
            period=n,
            tent_count=len(pts),
            converged=len(found),
            distinct=distinct,
            matched=min(len(found), distinct),
            max_residual=float(max(residuals)) if residuals else math.inf,
            max_spine_offset=float(max(offsets)) if offsets else math.inf,
            failures=failures,
        ))
    return reports


# parameter scans ----------------------------------------------------------------


@dataclass
class ContinuityScan:
    grid: np.ndarray
    distances: np.ndarray
    stabilization: list
    unstable: list

    def rows(self) -> list[tuple[float, float]]:
        """``(t_i, d_H(cloud_i, cloud_{i+1}))`` for consecutive grid points."""
        return [(float(t), float(d)) for t, d in zip(self.grid[:-1], self.distances)]

    @property
    def max_distance(self) -> float:
        return float(self.distances.max()) if self.distances.size else 0.0


def continuity_scan(curve, grid, delta: float = 0.01, eps: float = 0.01, seeds: int = 200,
                    transient: int = 200, keep: int = 100, rng_seed: int = 0,
                    theta0: float = DEFAULT_THETA0, executor=None) -> ContinuityScan:
    """Hausdorff distances between attractor clouds along a parameter curve.

    ``curve`` maps a grid value ``t`` to a :class:`FamilyParam`. All clouds
    share ``rng_seed``. Grid values whose family does not stabilise are listed
    in ``unstable``.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")

    def one(t):
        F = FattenedMap(curve(t), delta, eps, theta0)
        return attract_cloud(F, seeds, transient, keep, rng_seed).points

    mapper = executor.map if executor is not None else map
    clouds = list(mapper(one, grid))
    periodic = curve(grid[0]).is_circle
    dist = np.array([hausdorff(a, b, periodic) for a, b in zip(clouds[:-1], clouds[1:])])
    stab = [stabilization_index(curve(t)) for t in grid]
    unstable = [float(t) for t, m in zip(grid, stab) if m is None]
    return ContinuityScan(grid, dist, stab, unstable)


# Henon comparison -------------------------------------------------------------


class OrbitEscape(ArithmeticError):
    pass


def henon_apply(a: float, b: float, p, escape_radius: float | None = 1e3) -> np.ndarray:
    """Quadratic-family Henon step ``(x, y) -> (a - x^2 + b y, x)``."""
    p = np.asarray(p, dtype=float)
    out = np.empty_like(p)
    out[..., 0] = a - p[..., 0] ** 2 + b * p[..., 1]
    out[..., 1] = p[..., 0]
    if escape_radius is not None and np.any(np.linalg.norm(out, axis=-1) > escape_radius):
        raise OrbitEscape(f"orbit left the disk of radius {escape_radius}")
    return out


def henon_cloud(a: float, b: float, seeds: int = 200, transient: int = 1000, keep: int = 100,
                rng_seed: int = 0, escape_radius: float = 10.0, init_box: float = 1.0):
    """Attractor sample of the Henon map; escaping orbits are dropped.

    Returns ``(points, n_escaped)``.
    """
    rng = np.random.default_rng(rng_seed)
    P = rng.uniform(-init_box, init_box, (seeds, 2))
    alive = np.ones(seeds, dtype=bool)
    out = np.empty((keep, seeds, 2))
    for i in range(transient + keep):
        with np.errstate(over="ignore", invalid="ignore"):
            P = henon_apply(a, b, P, escape_radius=None)
        alive &= np.isfinite(P).all(axis=1) & (np.linalg.norm(P, axis=1) <= escape_radius)
        P[~alive] = 0.0
        if i >= transient:
            out[i - transient] = P
    pts = out[:, alive].transpose(1, 0, 2).reshape(-1, 2)
    return pts, int((~alive).sum())


def to_henon_plane(F: FattenedMap, points) -> np.ndarray:
    """Identify fattened-quadratic disk points with Henon-plane points.

    ``(x, y)`` becomes ``(X, X_prev)``: ``X`` is the phase coordinate of the
    spine position and ``X_prev`` the phase coordinate recorded (scaled by
    ``eps``) in ``y``.
    """
    P = np.asarray(points, dtype=float)
    if F.model.periodic or F.eps == 0.0:
        raise ValueError("needs a disk map with eps > 0")
    X = F.spine_to_phase(P[:, 0])
    prev = (P[:, 1] / F.eps + 1.0) / 2.0
    return np.stack([X, F.spine_to_phase(prev)], axis=-1)
