"""Rotation numbers and rotation intervals of degree-one circle maps.

The rotation interval of a standard-family lift ``F`` is
``[rho(F_lower), rho(F_upper)]`` where ``F_upper(x) = sup_{y <= x} F(y)`` and
``F_lower(x) = inf_{y >= x} F(y)`` are nondecreasing degree-one lifts. Both
envelopes are tabulated on a grid over one period and padded outwards so that
``F_lower <= F <= F_upper`` holds everywhere, not only at grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .families import B_STAR, FamilyParam, lift_eval
from .suspension import FattenedMap, newton_periodic

DEFAULT_GRID = 4096


@dataclass(frozen=True)
class RotationEstimate:
    value: float
    error: float

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class RotationInterval:
    """Closed interval ``[lo, hi]`` with a per-endpoint error ``halfwidth``."""

    lo: float
    hi: float
    halfwidth: float = 0.0

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty rotation interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, r, tol: float = 0.0):
        r = np.asarray(r, dtype=float)
        return (r >= self.lo - tol) & (r <= self.hi + tol)


def check_lift(lift, samples: int = 1024, monotone: bool = True, atol: float = 1e-12):
    """Sampled degree-one (and optionally monotonicity) check of a lift."""
    x = np.linspace(0.0, 1.0, samples)
    y = np.asarray(lift(x), dtype=float)
    if np.max(np.abs(np.asarray(lift(x + 1.0)) - y - 1.0)) > 1e-9:
        raise ValueError("lift is not of degree one")
    if monotone and np.any(np.diff(y) < -atol):
        raise ValueError("lift is not nondecreasing")


def rotation_number_monotone(lift, x0: float = 0.0, n: int = 100_000,
                             check: bool = True) -> RotationEstimate:
    """``(F^n(x0) - x0) / n`` for a nondecreasing degree-one lift ``F``.

    The estimate is within ``1/n`` of the rotation number for every ``x0``.
    """
    if check:
        check_lift(lift)
    x = float(x0)
    for _ in range(n):
        x = float(lift(x))
    return RotationEstimate((x - x0) / n, 1.0 / n)


class Envelope:
    """Tabulated nondecreasing degree-one lift ``x -> table(frac x) + floor x + shift``."""

    def __init__(self, table: np.ndarray, shift: float = 0.0, modulus: float = 0.0):
        self.table = np.asarray(table, dtype=float)
        self.shift = shift
        self.modulus = modulus
        self.grid = np.linspace(0.0, 1.0, self.table.size)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        out = k + np.interp(x - k, self.grid, self.table) + self.shift
        return out if out.ndim else float(out)

    def shifted(self, omega: float) -> "Envelope":
        return Envelope(self.table, self.shift + omega, self.modulus)


def _envelope_pad(b, grid_res: int):
    # grid max/min miss interior extrema by at most |f''| h^2 / 8, and linear
    # interpolation of the smooth parts errs by the same amount
    h = 1.0 / grid_res
    return 2.0 * (2.0 * math.pi * np.asarray(b, dtype=float)) * h * h / 8.0


def envelope_modulus(b, grid_res: int = DEFAULT_GRID):
    """Sup-norm error bound of the tabulated envelopes (vectorised in ``b``)."""
    b = np.asarray(b, dtype=float)
    out = _envelope_pad(b, grid_res) + (1.0 + b) / grid_res
    return out if out.ndim else float(out)


def _envelope_tables(b: float, grid_res: int):
    """Upper/lower envelope tables of ``x + b/(2 pi) sin(2 pi x)`` on ``[0, 1]``.

    Returns ``(upper, lower, modulus)``; tables have ``grid_res + 1`` entries.
    """
    G = int(grid_res)
    h = 1.0 / G
    k = np.arange(-G, 2 * G + 1)
    xs = k * h
    f = xs + b / (2.0 * math.pi) * np.sin(2.0 * math.pi * xs)
    pad = float(_envelope_pad(b, G))
    up = np.maximum.accumulate(f)[G:2 * G + 1] + pad
    lo = np.minimum.accumulate(f[::-1])[::-1][G:2 * G + 1] - pad
    return up, lo, envelope_modulus(b, G)


def envelopes(p: FamilyParam, grid_res: int = DEFAULT_GRID):
    """``(lower, upper)`` monotone envelopes of a standard-family lift."""
    if p.kind != "standard":
        raise ValueError("envelopes are defined for the standard family")
    b, omega = p.values
    up, lo, mod = _envelope_tables(b, grid_res)
    return Envelope(lo, omega, mod), Envelope(up, omega, mod)


def _iterate_tables(tables: np.ndarray, rows: np.ndarray, shift: np.ndarray, n: int,
                    x0: float = 0.0) -> np.ndarray:
    """Vectorised ``n``-step orbits of many tabulated envelopes.

    Cell ``c`` iterates the envelope ``tables[rows[c]] + shift[c]``.
    """
    G = tables.shape[1] - 1
    flat = tables.reshape(-1)
    base = rows * (G + 1)
    x = np.full(shift.shape, float(x0))
    for _ in range(n):
        k = np.floor(x)
        t = (x - k) * G
        i = np.minimum(t.astype(np.int64), G - 1)
        w = t - i
        j = base + i
        x = k + flat[j] * (1.0 - w) + flat[j + 1] * w + shift
    return (x - x0) / n


def rotation_interval(p: FamilyParam, n: int = 100_000,
                      grid_res: int = DEFAULT_GRID) -> RotationInterval:
    """Rotation interval of a standard-family member.

    The returned ``halfwidth`` bounds the error of each endpoint:
    ``1/n`` plus the envelope grid modulus.
    """
    if p.kind != "standard":
        raise ValueError("rotation intervals are computed for the standard family")
    b, omega = p.values
    lo, hi, mod = rotation_intervals_grid(np.array([b]), np.array([[omega]]), n, grid_res)
    lo, hi = float(lo[0, 0]), float(hi[0, 0])
    # for b <= 1 the two envelopes coincide up to grid padding, and float
    # noise can order the estimates either way
    return RotationInterval(min(lo, hi), max(lo, hi), 1.0 / n + float(mod[0]))


def rotation_intervals_grid(bs, omegas, n: int, grid_res: int = DEFAULT_GRID):
    """Rotation-interval endpoints for every ``(b_i, omega_ij)``.

    ``bs`` has shape ``(R,)`` and ``omegas`` shape ``(R, C)``. Returns arrays
    ``(lo, hi, modulus)`` of shape ``(R, C)``, ``(R, C)``, ``(R,)``.
    """
    bs = np.asarray(bs, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    ups, los, mods = zip(*(_envelope_tables(b, grid_res) for b in bs))
    rows = np.broadcast_to(np.arange(len(bs))[:, None], omegas.shape).reshape(-1)
    shift = omegas.reshape(-1)
    hi = _iterate_tables(np.array(ups), rows, shift, n).reshape(omegas.shape)
    lo = _iterate_tables(np.array(los), rows, shift, n).reshape(omegas.shape)
    return lo, hi, np.array(mods)


def rotation_intervals_pairs(b, omega, n: int, grid_res: int = DEFAULT_GRID):
    """Rotation-interval endpoints for paired arrays ``b[k], omega[k]``.

    Returns ``(lo, hi, modulus)``, each of shape ``b.shape``.
    """
    b = np.asarray(b, dtype=float).reshape(-1)
    omega = np.asarray(omega, dtype=float).reshape(-1)
    bs, rows = np.unique(b, return_inverse=True)
    ups, los, mods = zip(*(_envelope_tables(v, grid_res) for v in bs))
    hi = _iterate_tables(np.array(ups), rows, omega, n)
    lo = _iterate_tables(np.array(los), rows, omega, n)
    return lo, hi, np.asarray(mods)[rows]


@dataclass
class TongueRaster:
    """Membership of ``r`` in the rotation interval over a ``(b, omega)`` grid.

    Row ``i`` is ``b = b_grid[i]``, column ``j`` is ``omega = omega_grid[j]``.
    """

    r: float
    b_grid: np.ndarray
    omega_grid: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    tol: np.ndarray
    member: np.ndarray = field(init=False)

    def __post_init__(self):
        t = self.tol[:, None]
        self.member = (self.r >= self.lo - t) & (self.r <= self.hi + t)

    @property
    def shape(self):
        return self.member.shape


def tongue_raster(r: float, b_max: float = 1.0, res_b: int = 100, res_omega: int = 100,
                  n: int = 2000, grid_res: int = 1024, b_min: float = 0.0,
                  omega_min: float = 0.0, omega_max: float = 1.0) -> TongueRaster:
    """Raster of the Arnold tongue ``{(b, omega) : r in rho(f_{b, omega})}``.

    Grids are inclusive of both ends. A cell is a member when ``r`` lies in
    its rotation interval widened by ``1/n`` plus the envelope modulus.
    """
    if b_max > B_STAR:
        raise ValueError(f"b_max={b_max} exceeds the cap {B_STAR}")
    bg = np.linspace(b_min, b_max, res_b)
    og = np.linspace(omega_min, omega_max, res_omega)
    lo, hi, mods = rotation_intervals_grid(bg, np.broadcast_to(og, (res_b, res_omega)), n, grid_res)
    return TongueRaster(float(r), bg, og, lo, hi, 1.0 / n + mods)


# orbits of the fattened annulus map ---------------------------------------------


def orbit_rotation_numbers(F: FattenedMap, starts, n: int) -> np.ndarray:
    """Average angular displacement over ``n`` steps of the annulus lift."""
    P = np.array(starts, dtype=float)
    theta0 = P[:, 0].copy()
    for _ in range(n):
        P = F.lift_apply(P)
    return (P[:, 0] - theta0) / n


def _lift_power(p: FamilyParam, x, q: int):
    for _ in range(q):
        x = lift_eval(p, x)
    return x


def endpoint_periodic_orbit(p: FamilyParam, rho: float, tol: float, q_max: int = 12,
                            samples: int = 200_000):
    """Periodic orbit of the lift with rotation number the fraction nearest ``rho``.

    Searches denominators ``q <= q_max`` for ``P/q`` within ``tol`` of ``rho``
    and solves ``F^q(x) = x + P`` by bracketing on a uniform grid. Returns
    ``(x, P, q)`` or ``None``.
    """
    best = None
    for q in range(1, q_max + 1):
        P = round(rho * q)
        if abs(P / q - rho) <= tol:
            best = (P, q)
            break
    if best is None:
        return None
    P, q = best
    xs = np.linspace(0.0, 1.0, samples + 1)
    g = _lift_power(p, xs, q) - xs - P
    idx = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]
    if idx.size == 0:
        return None
    i = idx[0]
    x = brentq(lambda t: _lift_power(p, t, q) - t - P, xs[i], xs[i + 1], xtol=1e-15)
    return float(x), P, q


@dataclass
class AnnulusRotationReport:
    interval: RotationInterval
    samples: np.ndarray
    periodic: dict
    tol: float
    starts: np.ndarray | None = None

    @property
    def all_inside(self) -> bool:
        rates = np.concatenate([self.samples, list(self.periodic.values())])
        return bool(np.all(self.interval.contains(rates, self.tol)))

    @property
    def sampled(self) -> np.ndarray:
        return np.concatenate([self.samples, np.array(list(self.periodic.values()))])

    def endpoint_gaps(self) -> tuple[float, float]:
        """Distance from each interval endpoint to the nearest sampled rate."""
        r = self.sampled
        return (float(np.min(np.abs(r - self.interval.lo))),
                float(np.min(np.abs(r - self.interval.hi))))

    def summary(self) -> str:
        lo_gap, hi_gap = self.endpoint_gaps()
        return (f"rho(f) = [{self.interval.lo:.6f}, {self.interval.hi:.6f}]"
                f" +- {self.interval.halfwidth:.2g}; sampled rho in"
                f" [{self.sampled.min():.6f}, {self.sampled.max():.6f}];"
                f" endpoint gaps {lo_gap:.2g}, {hi_gap:.2g}; the fixed boundary"
                f" of the conjugated homeomorphism adds rotation number 0")


def annulus_rotation_check(F: FattenedMap, seeds: int = 200, n: int = 100_000,
                           rng_seed: int = 0, tol: float = 0.01,
                           grid_res: int = DEFAULT_GRID) -> AnnulusRotationReport:
    """Compare orbit rotation numbers of the fattened annulus map with ``rho(f)``.

    ``seeds`` random orbits are iterated ``n`` times. In addition, for each
    endpoint of the rotation interval that is a fraction ``P/q`` (``q <= 12``),
    the periodic orbit of ``f`` realising it seeds a Newton solve for a
    periodic orbit of ``F`` with the same rotation number; those rates are
    reported under ``periodic``.
    """
    if not F.model.periodic:
        raise ValueError("annulus_rotation_check needs the annulus model")
    interval = rotation_interval(F.param, n, grid_res)
    rng = np.random.default_rng(rng_seed)
    starts = np.column_stack([rng.uniform(0.0, 1.0, seeds), rng.uniform(-1.0, 1.0, seeds)])
    rates = orbit_rotation_numbers(F, starts, n)
    periodic = {}
    for name, rho in (("lo", interval.lo), ("hi", interval.hi)):
        found = endpoint_periodic_orbit(F.param, rho, interval.halfwidth + 1e-9)
        if found is None:
            continue
        x, P, q = found
        prev = x
        for _ in range(q - 1):
            prev = lift_eval(F.param, prev)
        seed = np.array([x, F.eps * math.cos(2.0 * math.pi * (prev - F.theta0))])
        pt, res, ok = newton_periodic(F, seed, q, shift=P)
        if ok:
            periodic[f"{name}:{Fraction(P, q)}"] = P / q
    return AnnulusRotationReport(interval, rates, periodic, tol, starts)


# boundary push --------------------------------------------------------------------


def collar_bump(r, collar_width: float):
    """Cubic bump: 1 on ``|r| = 1``, 0 for ``|r| <= 1 - collar_width``, C^1."""
    if not 0.0 < collar_width < 1.0:
        raise ValueError("collar_width must lie in (0, 1)")
    t = np.clip((np.abs(np.asarray(r, dtype=float)) - (1.0 - collar_width)) / collar_width,
                0.0, 1.0)
    out = t * t * (3.0 - 2.0 * t)
    return out if out.ndim else float(out)


class BoundaryPush:
    """Fattened annulus map with the boundary circles rotated rigidly.

    Inside the collar the map blends from ``F`` (core) to the identity on the
    boundary, then rotates by ``interval.lo`` near ``r = -1`` and by
    ``interval.hi`` near ``r = +1``. With ``chi`` the collar bump, ::

        G(theta, r) = (1 - chi) F(theta, r) + chi (theta, r) + (chi * rho_end, 0)

    in lift coordinates, so each boundary circle is invariant with rotation
    number its endpoint and the core (``chi = 0``) is unchanged.
    """

    def __init__(self, F: FattenedMap, interval: RotationInterval, collar_width: float = 0.2):
        if not F.model.periodic:
            raise ValueError("boundary push needs the annulus model")
        collar_bump(0.0, collar_width)
        self.F = F
        self.interval = interval
        self.collar_width = collar_width
        self.model = F.model

    def lift_apply(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        chi = collar_bump(P[..., 1], self.collar_width)[..., None]
        rho_end = np.where(P[..., 1] < 0.0, self.interval.lo, self.interval.hi)
        out = (1.0 - chi) * self.F.lift_apply(P) + chi * P
        out[..., 0] += chi[..., 0] * rho_end
        return out

    def __call__(self, P) -> np.ndarray:
        out = self.lift_apply(P)
        out[..., 0] = np.mod(out[..., 0], 1.0)
        return out


def boundary_push(F: FattenedMap, interval: RotationInterval, collar_width: float = 0.2):
    return BoundaryPush(F, interval, collar_width)
