"""Acceptance criteria and invariant checks as plain functions.

Each check returns a :class:`CheckResult`; the ``verify`` command and the
test-suite both call these, so the numbers printed by one are the numbers
asserted by the other.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation, binary_erosion

from ..families import (
    FamilyParam,
    entropy_estimate,
    lift_eval,
    stabilization_index,
    stabilized_interval,
    tent_periodic_count,
)
from ..geometry import DISK
from ..invlim import (
    Thread,
    brown_stage_arrays,
    d_infty_arrays,
    epsilon_map_audit,
    extend_backward,
    random_threads,
)
from ..rotation import (
    annulus_rotation_check,
    boundary_push,
    envelopes,
    orbit_rotation_numbers,
    rotation_interval,
    rotation_number_monotone,
    tongue_raster,
)
from ..suspension import (
    FattenedMap,
    attract_cloud,
    attract_cover,
    continuity_scan,
    hausdorff,
    henon_cloud,
    periodic_match,
    semiconjugacy_bound,
    semiconjugacy_residual,
    to_henon_plane,
)
from .config import ExperimentConfig, parse_config, serialize_config


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    advisory: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else ("WARN" if self.advisory else "FAIL")
        return f"[{tag}] {self.key} {self.title}: {self.detail} ({self.seconds:.2f}s)"


def _timed(key, title, budget=None, advisory=False):
    """Decorator: time the check and fold a runtime budget into ``passed``."""

    def wrap(fn):
        def run(**kwargs):
            t0 = time.perf_counter()
            ok, detail = fn(**kwargs)
            dt = time.perf_counter() - t0
            if budget is not None:
                detail = f"{detail}; runtime budget {budget:g}s"
                ok = ok and dt < budget
            return CheckResult(key, title, bool(ok), detail, dt, advisory)

        run.key = key
        run.title = title
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


def _executor(threads):
    return ThreadPoolExecutor(threads) if threads and threads > 1 else None


# acceptance criteria ------------------------------------------------------------


@_timed("A1", "entropy from tent periodic counts", budget=5.0)
def entropy_check():
    exact = all(tent_periodic_count(2.0, n) == 2**n and entropy_estimate(2.0, n) == math.log(2.0)
                for n in range(4, 15))
    errs = {s: abs(entropy_estimate(s, 14) - math.log(s)) for s in (1.3, 1.5, 1.8)}
    ok = exact and max(errs.values()) <= 0.08
    parts = ", ".join(f"s={s}: {e:.4f}" for s, e in errs.items())
    return ok, f"s=2 exact for n=4..14: {exact}; |h_14 - log s| {parts} (tol 0.08)"


@_timed("A2", "stabilization dichotomy", budget=1.0)
def stabilization_check():
    # s = 2 is onto and stabilises at iterate 0, so the expanding grid stops short of it
    expanding = 1.0 + np.arange(1, 51) / 51.0
    contracting = np.linspace(0.0, 1.0, 50, endpoint=False)
    hi = [stabilization_index(FamilyParam.tent(s), 64, 1e-9) for s in expanding]
    lo = [stabilization_index(FamilyParam.tent(s), 64, 1e-9) for s in contracting]
    at2 = stabilization_index(FamilyParam.tent(2.0), 64, 1e-9)
    ok = all(m == 1 for m in hi) and all(m is None for m in lo) and at2 == 0
    return ok, (f"{sum(m == 1 for m in hi)}/50 of s in (1,2) give 1; "
                f"{sum(m is None for m in lo)}/50 of s in [0,1) give none; s=2 gives {at2}")


@_timed("A3", "truncation is a 1/(k+2)-map on threads")
def epsilon_map_check(pairs: int = 1000, seed: int = 0):
    rng = np.random.default_rng(seed)
    p = FamilyParam.tent(1.8)
    heads = random_threads(p, pairs, length=33, rng=rng)
    ks = rng.integers(0, 7, pairs)
    violations, differing = 0, 0
    box = stabilized_interval(p)
    for u, k in zip(heads, ks):
        v = Thread(u.entries[: k + 1], p)
        while len(v) < len(u):
            v = extend_backward(v, "random", rng, box)
        same_stage = brown_stage_arrays(int(k), u.entries[None]) == brown_stage_arrays(
            int(k), v.entries[None])
        d = float(d_infty_arrays(u.entries, v.entries))
        differing += d > 0.0
        if not same_stage[0] or d > 1.0 / (k + 2):
            violations += 1
    return violations == 0, (f"{violations} violations over {pairs} pairs "
                             f"({differing} pairs differ beyond their agreement index)")


@_timed("A4", "disk fattening is injective on a 200x50 grid")
def injectivity_check():
    F = FattenedMap(FamilyParam.tent(1.8), 0.01, 0.01)
    X, Y = np.meshgrid(np.linspace(0.0, 1.0, 200), np.linspace(-1.0, 1.0, 50), indexing="ij")
    sample = np.stack([X.ravel(), Y.ravel()], axis=-1)
    eps, pairs = epsilon_map_audit(F, sample, 1e-9, return_pairs=True)
    return len(pairs) == 0, f"{len(pairs)} collisions at tol 1e-9 (audit eps {eps:g})"


@_timed("A5", "semiconjugacy residual", budget=10.0)
def semiconjugacy_check(seed: int = 0):
    rows, ok = [], True
    for s in (1.5, 1.8, 2.0):
        F = FattenedMap(FamilyParam.tent(s), 0.01, 0.01)
        cloud = attract_cloud(F, seeds=100, transient=1000, keep=100, rng_seed=seed)
        res, bound = semiconjugacy_residual(F, cloud), semiconjugacy_bound(F)
        ok &= len(cloud) == 10_000 and res <= bound
        rows.append(f"s={s}: {res:.4f} <= {bound:.4f}")
    return ok, "; ".join(rows)


@_timed("A6", "periodic bijection for s=2, periods 1-6")
def periodic_check():
    F = FattenedMap(FamilyParam.tent(2.0), 0.01, 0.01)
    reps = periodic_match(F, 6, tol=1e-9)
    ok = all(r.matched == r.tent_count == 2**r.period and r.max_residual < 1e-6 for r in reps)
    counts = ",".join(f"{r.matched}/{r.tent_count}" for r in reps)
    worst = max(r.max_residual for r in reps)
    return ok, f"matched/exact per period {counts}; max residual {worst:.1e}"


CONTINUITY_SETTINGS = dict(delta=0.01, eps=0.01, seeds=200, transient=200, keep=100)


def _tent(t):
    return FamilyParam.tent(t)


@_timed("A7", "Hausdorff continuity on [1.2,1.9] and the jump at s=1", budget=120.0)
def continuity_check(seed: int = 0, threads: int | None = 4):
    ex = _executor(threads)
    try:
        coarse = continuity_scan(_tent, np.round(np.linspace(1.2, 1.9, 71), 12),
                                 rng_seed=seed, executor=ex, **CONTINUITY_SETTINGS)
        fine = continuity_scan(_tent, np.round(np.linspace(1.2, 1.9, 141), 12),
                               rng_seed=seed, executor=ex, **CONTINUITY_SETTINGS)
        jump = continuity_scan(_tent, np.array([0.99, 1.0]), rng_seed=seed, executor=ex,
                               **CONTINUITY_SETTINGS)
    finally:
        if ex is not None:
            ex.shutdown()
    c, f, j = coarse.max_distance, fine.max_distance, jump.max_distance
    ok = c < 0.05 and f <= c and j > 0.2
    return ok, (f"max d_H step 0.01: {c:.4f} (<0.05), step 0.005: {f:.4f}; "
                f"d_H(0.99, 1.00) = {j:.3f} (>0.2)")


ROTATION_POINTS = ((0.0, 0.3), (0.8, 0.2), (2.0, 0.3), (3.0, 0.5))


@_timed("A8", "orbit rotation numbers lie in the rotation interval", budget=120.0)
def rotation_identity_check(seed: int = 0, n: int = 100_000, seeds: int = 200):
    ok, rows = True, []
    for b, w in ROTATION_POINTS:
        F = FattenedMap(FamilyParam.standard(b, w), 0.01, 0.01)
        rep = annulus_rotation_check(F, seeds=seeds, n=n, rng_seed=seed, tol=0.01)
        lo_gap, hi_gap = rep.endpoint_gaps()
        good = rep.all_inside and (b <= 1.0 or max(lo_gap, hi_gap) <= 0.02)
        ok &= good
        rows.append(f"({b:g},{w:g}) [{rep.interval.lo:.4f},{rep.interval.hi:.4f}]"
                    f" gaps {lo_gap:.1e}/{hi_gap:.1e}")
    return ok, "; ".join(rows)


def tongue_agreement(raster) -> tuple[float, float]:
    """Exact and one-cell-tolerant agreement of a T_0 raster with ``omega <= b/(2 pi)``."""
    truth = raster.omega_grid[None, :] <= raster.b_grid[:, None] / (2.0 * math.pi)
    M = raster.member
    exact = float(np.mean(M == truth))
    near = (M == truth) | (M & binary_dilation(truth)) | (~M & ~binary_erosion(truth, border_value=1))
    return exact, float(np.mean(near))


@_timed("A9", "tongue T_0 against the fixed-point criterion", budget=60.0)
def tongue_check():
    R = tongue_raster(0.0, b_min=0.01, b_max=1.0, res_b=100, res_omega=100,
                      omega_min=0.0, omega_max=0.25, n=2000)
    exact, near = tongue_agreement(R)
    return near >= 0.99, f"cells matching: {100 * exact:.2f}% exact, {100 * near:.2f}% within one cell"


@_timed("A10", "invariant circle for b=0.8, omega=0.2")
def invariant_circle_check(seed: int = 0, n: int = 100_000, bins: int = 200):
    F = FattenedMap(FamilyParam.standard(0.8, 0.2), 0.01, 0.01)
    cloud = attract_cloud(F, 200, 1000, 100, seed)
    spread = graph_spread(cloud.points, bins)
    I = rotation_interval(F.param, n)
    ok = spread <= 2.0 * F.eps and I.width <= 2.0 / n
    return ok, (f"max r-spread over {bins} theta bins {spread:.2e} (<= 2 eps = {2 * F.eps:g});"
                f" interval width {I.width:.1e} (<= 2/n = {2.0 / n:g})")


def graph_spread(points, bins: int = 200) -> float:
    """Largest vertical extent of the cloud within a ``theta`` bin."""
    th = np.mod(points[:, 0], 1.0)
    idx = np.minimum((th * bins).astype(int), bins - 1)
    hi = np.full(bins, -np.inf)
    lo = np.full(bins, np.inf)
    np.maximum.at(hi, idx, points[:, 1])
    np.minimum.at(lo, idx, points[:, 1])
    used = np.isfinite(hi)
    return float((hi[used] - lo[used]).max())


@_timed("A11", "Henon (1.8, 0.001) against the fattened quadratic", advisory=True)
def henon_check(seed: int = 0):
    F = FattenedMap(FamilyParam.quadratic(1.8), 0.001, 0.001)
    cloud = attract_cloud(F, 200, 1000, 100, seed)
    H, escaped = henon_cloud(1.8, 0.001, 200, 1000, 100, seed)
    d = hausdorff(to_henon_plane(F, cloud.points), H)
    return d <= 0.05, f"d_H = {d:.4f} (<= 0.05), {escaped} Henon orbits escaped"


ACCEPTANCE = (
    entropy_check,
    stabilization_check,
    epsilon_map_check,
    injectivity_check,
    semiconjugacy_check,
    periodic_check,
    continuity_check,
    rotation_identity_check,
    tongue_check,
    invariant_circle_check,
    henon_check,
)


# invariants -------------------------------------------------------------------


@_timed("I1", "carrier invariance and strict interior on the disk")
def carrier_invariance():
    rng = np.random.default_rng(1)
    P = np.column_stack([rng.uniform(0, 1, 10_000), rng.uniform(-1, 1, 10_000)])
    ok = True
    for p in (FamilyParam.tent(1.8), FamilyParam.quadratic(1.8), FamilyParam.tent(0.5)):
        Q = FattenedMap(p, 0.01, 0.01)(P)
        ok &= bool(DISK.contains(Q, strict=True).all())
    Fa = FattenedMap(FamilyParam.standard(2.0, 0.3), 0.01, 0.01)
    ok &= bool(np.all(np.abs(Fa(P)[:, 1]) <= 0.01))
    return ok, "10^4 random points stay in the carrier"


@_timed("I2", "uniform convergence to the spine map")
def uniform_convergence():
    X, Y = np.meshgrid(np.linspace(0, 1, 101), np.linspace(-1, 1, 41), indexing="ij")
    P = np.stack([X.ravel(), Y.ravel()], axis=-1)
    worst = 0.0
    for d, e in ((0.01, 0.01), (0.05, 0.02), (0.1, 0.1)):
        F = FattenedMap(FamilyParam.tent(1.8), d, e)
        Q = F(P)
        gap = np.hypot(Q[:, 0] - F.spine_map(P[:, 0]), Q[:, 1]).max()
        worst = max(worst, gap / (2 * d + e))
    return worst <= 1.0, f"max gap / (2 delta + eps) = {worst:.3f}"


@_timed("I3", "attract_cover nesting")
def cover_nesting():
    F = FattenedMap(FamilyParam.tent(1.8), 0.01, 0.01)
    cov = attract_cover(F, resolution=64, n=10)
    h = cov.history
    ok = all(a >= b for a, b in zip(h, h[1:])) and cov.contains(
        attract_cloud(F, 50, 200, 20, 0).points).all()
    return ok, f"cell counts {h[0]} -> {h[-1]}, cloud inside final cover"


@_timed("I4", "rotation numbers: degree one, base-point uniformity, omega shift")
def rotation_invariants(n: int = 2000):
    rng = np.random.default_rng(3)
    ok = True
    x = rng.uniform(-3, 3, 1000)
    for b in (0.0, 0.8, 3.0):
        p = FamilyParam.standard(b, 0.37)
        ok &= bool(np.allclose(lift_eval(p, x + 1.0), lift_eval(p, x) + 1.0, atol=1e-12, rtol=0))
    lift = FamilyParam.standard(0.9, 0.21)
    vals = [rotation_number_monotone(lambda t: lift_eval(lift, t), x0, n, check=False).value
            for x0 in rng.uniform(0, 1, 20)]
    ok &= max(vals) - min(vals) <= 2.0 / n
    # endpoints are nondecreasing in omega; a full turn of omega adds exactly 1
    shift_ok = True
    for b in (0.5, 2.0):
        I = [rotation_interval(FamilyParam.standard(b, w), n) for w in np.linspace(0, 1, 11)]
        t = I[0].halfwidth
        shift_ok &= all(c.lo >= a.lo - 2 * t and c.hi >= a.hi - 2 * t for a, c in zip(I, I[1:]))
        lower, upper = envelopes(FamilyParam.standard(b, 0.3))
        for env in (lower, upper):
            r0 = rotation_number_monotone(env, 0.0, n, check=False).value
            r1 = rotation_number_monotone(env.shifted(1.0), 0.0, n, check=False).value
            shift_ok &= abs(r1 - r0 - 1.0) <= 1e-9
    return ok and shift_ok, f"base-point spread {max(vals) - min(vals):.1e} (<= 2/n)"


@_timed("I5", "tongue symmetry omega -> 1 - omega")
def tongue_symmetry():
    A = tongue_raster(0.25, b_max=2.0, res_b=21, res_omega=41, n=1000, omega_min=0.0,
                      omega_max=1.0)
    B = tongue_raster(0.75, b_max=2.0, res_b=21, res_omega=41, n=1000, omega_min=0.0,
                      omega_max=1.0)
    mism = int(np.sum(A.member != B.member[:, ::-1]))
    return mism == 0, f"{mism} mismatched cells"


@_timed("I6", "boundary push fixes boundary rotation numbers")
def push_invariant(n: int = 2000):
    F = FattenedMap(FamilyParam.standard(2.0, 0.3), 0.01, 0.01)
    I = rotation_interval(F.param, 20_000)
    G = boundary_push(F, I, 0.2)
    rho = orbit_rotation_numbers(G, [[0.1, -1.0], [0.6, 1.0]], n)
    core = np.array([[0.3, 0.0], [0.9, 0.5]])
    ok = abs(rho[0] - I.lo) <= 2.0 / n and abs(rho[1] - I.hi) <= 2.0 / n
    ok &= bool(np.allclose(G.lift_apply(core), F.lift_apply(core)))
    return ok, f"boundary rates {rho[0]:.5f}, {rho[1]:.5f} vs [{I.lo:.5f}, {I.hi:.5f}]"


@_timed("I7", "config round trip")
def config_roundtrip():
    cfg = ExperimentConfig(name="continuity", params=(1.5,), seed=11, grid_step=0.005)
    back = parse_config(serialize_config(cfg))
    return back == cfg, "parse(serialize(cfg)) == cfg"


INVARIANTS = (
    carrier_invariance,
    uniform_convergence,
    cover_nesting,
    rotation_invariants,
    tongue_symmetry,
    push_invariant,
    config_roundtrip,
)


def run_all(include_invariants: bool = True, threads: int | None = 4, echo=None):
    """Run every check; ``echo`` (e.g. ``print``) receives each result line."""
    results = []
    checks = (INVARIANTS if include_invariants else ()) + ACCEPTANCE
    for check in checks:
        kwargs = {"threads": threads} if check is continuity_check else {}
        res = check(**kwargs)
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
