"""One-dimensional map families: tent, quadratic and the standard circle family.

``FamilyParam`` is a point in parameter space; the module-level functions
evaluate members, push intervals forward, detect stabilisation of the image
sequence and, for the tent family, enumerate periodic points exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

TWO_PI = 2.0 * math.pi

#: Upper cap on the standard family's nonlinearity.
B_STAR = 8.0

#: Distance to the critical point below which an itinerary symbol is ``C``.
CRITICAL_SNAP = 1e-9

#: Largest period accepted by :func:`tent_periodic_points`.
MAX_TENT_PERIOD = 20


@dataclass(frozen=True)
class FamilyParam:
    """A member of one of the three families.

    Build instances with :meth:`tent`, :meth:`quadratic` or :meth:`standard`.
    ``values`` holds ``(s,)``, ``(a,)`` or ``(b, omega)`` respectively.
    """

    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind == "tent":
            (s,) = self.values
            if not 0.0 <= s <= 2.0:
                raise ValueError(f"tent slope s={s} outside [0, 2]")
        elif self.kind == "quadratic":
            (a,) = self.values
            if not -0.5 <= a <= 2.0:
                raise ValueError(f"quadratic parameter a={a} outside [-1/2, 2]")
        elif self.kind == "standard":
            b, omega = self.values
            if not 0.0 <= b <= B_STAR:
                raise ValueError(f"standard nonlinearity b={b} outside [0, {B_STAR}]")
            if not 0.0 <= omega <= 1.0:
                raise ValueError(f"standard rotation omega={omega} outside [0, 1]")
        else:
            raise ValueError(f"unknown family kind {self.kind!r}")

    @classmethod
    def tent(cls, s):
        return cls("tent", (float(s),))

    @classmethod
    def quadratic(cls, a):
        return cls("quadratic", (float(a),))

    @classmethod
    def standard(cls, b, omega):
        return cls("standard", (float(b), float(omega)))

    @property
    def is_circle(self) -> bool:
        return self.kind == "standard"

    @property
    def critical_point(self) -> float:
        if self.kind == "tent":
            return 0.5
        if self.kind == "quadratic":
            return 0.0
        raise ValueError("the standard family has no single critical point")

    def __call__(self, x):
        return evaluate(self, x)

    def __str__(self):
        names = {"tent": ("s",), "quadratic": ("a",), "standard": ("b", "omega")}
        args = ", ".join(f"{k}={v:g}" for k, v in zip(names[self.kind], self.values))
        return f"{self.kind}({args})"


@dataclass(frozen=True)
class IntervalBox:
    """Closed interval of phase space.

    For the standard family ``lo``/``hi`` are lift coordinates and ``full``
    marks the whole circle. ``escaped`` flags a quadratic image that had to be
    clipped back into the phase box.
    """

    lo: float
    hi: float
    full: bool = False
    escaped: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return 1.0 if self.full else self.hi - self.lo

    def contains(self, other: "IntervalBox") -> bool:
        if self.full:
            return True
        if other.full:
            return False
        return self.lo <= other.lo and other.hi <= self.hi


def quadratic_radius(a: float) -> float:
    """Half-width ``beta`` of the invariant box ``[-beta, beta]`` of ``a - x^2``.

    ``beta`` is the positive fixed point of ``-f_a``. Below ``a = -1/4`` no such
    point exists and the ``a = -1/4`` value ``1/2`` is used.
    """
    disc = 1.0 + 4.0 * a
    return 0.5 * (1.0 + math.sqrt(disc)) if disc >= 0.0 else 0.5


def phase_interval(p: FamilyParam) -> IntervalBox:
    if p.kind == "tent":
        return IntervalBox(0.0, 1.0)
    if p.kind == "quadratic":
        beta = quadratic_radius(p.values[0])
        return IntervalBox(-beta, beta)
    return IntervalBox(0.0, 1.0, full=True)


def lift_eval(p: FamilyParam, x):
    """Degree-one lift ``x + omega + b/(2 pi) sin(2 pi x)`` of a standard member.

    The sine is evaluated on the fractional part so that
    ``lift_eval(p, x + k) == lift_eval(p, x) + k`` holds to rounding.
    """
    if p.kind != "standard":
        raise ValueError("lift_eval needs a standard-family parameter")
    b, omega = p.values
    x = np.asarray(x, dtype=float)
    k = np.floor(x)
    r = x - k
    out = k + (r + omega + b / TWO_PI * np.sin(TWO_PI * r))
    return out if out.ndim else float(out)


def evaluate(p: FamilyParam, x):
    """``f_p(x)``; circle values are reduced mod 1."""
    x = np.asarray(x, dtype=float)
    if p.kind == "tent":
        s = p.values[0]
        out = np.minimum(s * x, s * (1.0 - x))
    elif p.kind == "quadratic":
        out = p.values[0] - x * x
    else:
        out = np.mod(lift_eval(p, x), 1.0)
    return out if np.ndim(out) else float(out)


def derivative(p: FamilyParam, x):
    """Derivative of ``f_p`` (one-sided from the right at the tent kink)."""
    x = np.asarray(x, dtype=float)
    if p.kind == "tent":
        s = p.values[0]
        out = np.where(x < 0.5, s, -s)
    elif p.kind == "quadratic":
        out = -2.0 * x
    else:
        b, _ = p.values
        out = 1.0 + b * np.cos(TWO_PI * x)
    return out if np.ndim(out) else float(out)


def lipschitz(p: FamilyParam) -> float:
    if p.kind == "tent":
        return p.values[0]
    if p.kind == "quadratic":
        return 2.0 * quadratic_radius(p.values[0])
    return 1.0 + p.values[0]


def _standard_critical_points(b: float) -> list[float]:
    """Zeros of ``1 + b cos(2 pi x)`` in ``[0, 1)``."""
    if b < 1.0:
        return []
    c = math.acos(-1.0 / b) / TWO_PI
    return sorted({c, 1.0 - c})


def image_interval(p: FamilyParam, box: IntervalBox) -> IntervalBox:
    """Exact forward image of an interval."""
    if p.kind == "tent":
        pts = [box.lo, box.hi]
        if box.lo <= 0.5 <= box.hi:
            pts.append(0.5)
        vals = evaluate(p, np.array(pts))
        return IntervalBox(float(vals.min()), float(vals.max()))
    if p.kind == "quadratic":
        a = p.values[0]
        pts = [box.lo, box.hi]
        if box.lo <= 0.0 <= box.hi:
            pts.append(0.0)
        vals = evaluate(p, np.array(pts))
        lo, hi = float(vals.min()), float(vals.max())
        beta = quadratic_radius(a)
        escaped = lo < -beta or hi > beta
        if escaped:
            # clipping is monotone, so image inclusion survives it
            lo, hi = min(max(lo, -beta), beta), min(max(hi, -beta), beta)
        return IntervalBox(lo, hi, escaped=escaped)
    if box.full or box.hi - box.lo >= 1.0:
        return IntervalBox(0.0, 1.0, full=True)
    pts = [box.lo, box.hi]
    k0 = math.floor(box.lo)
    for c in _standard_critical_points(p.values[0]):
        for k in (k0, k0 + 1):
            if box.lo <= c + k <= box.hi:
                pts.append(c + k)
    vals = lift_eval(p, np.array(pts))
    lo, hi = float(vals.min()), float(vals.max())
    if hi - lo >= 1.0:
        return IntervalBox(0.0, 1.0, full=True)
    return IntervalBox(lo, hi)


def _box_distance(u: IntervalBox, v: IntervalBox) -> float:
    if u.full and v.full:
        return 0.0
    if u.full or v.full:
        return 1.0
    return max(abs(u.lo - v.lo), abs(u.hi - v.hi))


def image_sequence(p: FamilyParam, m: int) -> list[IntervalBox]:
    """``[X, f(X), ..., f^m(X)]`` for the phase interval ``X``."""
    boxes = [phase_interval(p)]
    for _ in range(m):
        boxes.append(image_interval(p, boxes[-1]))
    return boxes


def stabilization_index(p: FamilyParam, m_max: int = 64, tol: float = 1e-9):
    """Least ``m <= m_max`` with ``f^(m+1)(X) = f^m(X)`` numerically, else ``None``.

    Consecutive images are compared in the Hausdorff distance relative to the
    size of ``f^m(X)``: images that merely shrink geometrically (tent slopes
    below one) never qualify, nor does an image that has collapsed to a point.
    Slopes within about ``tol`` of 1 or 2 are numerically indistinguishable
    from those endpoints.
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    boxes = image_sequence(p, m_max + 1)
    for m in range(m_max + 1):
        if _box_distance(boxes[m], boxes[m + 1]) < tol * boxes[m].length:
            return m
    return None


def stabilized_interval(p: FamilyParam, m_max: int = 64, tol: float = 1e-9) -> IntervalBox:
    """The stabilised image ``f^m(X)``, or the last computed image if none."""
    m = stabilization_index(p, m_max, tol)
    boxes = image_sequence(p, m_max if m is None else m)
    return boxes[-1]


def preimages(p: FamilyParam, x: float, box: IntervalBox | None = None) -> np.ndarray:
    """Sorted preimages of ``x`` lying in ``box`` (default: the phase interval).

    Circle preimages are returned in ``[0, 1)``.
    """
    if box is None:
        box = phase_interval(p)
    if p.kind == "tent":
        s = p.values[0]
        if s == 0.0:
            return np.array([]) if x != 0.0 else np.array([box.lo, box.hi])
        cands = [x / s, 1.0 - x / s] if x <= s / 2.0 + 1e-15 else []
    elif p.kind == "quadratic":
        a = p.values[0]
        d = a - x
        cands = [] if d < 0.0 else [-math.sqrt(d), math.sqrt(d)]
    else:
        cands = _standard_preimages(p, x)
    out = []
    for c in sorted(cands):
        if box.full or box.lo - 1e-12 <= c <= box.hi + 1e-12:
            if not out or abs(c - out[-1]) > 1e-13:
                out.append(c)
    return np.array(out)


def _standard_preimages(p: FamilyParam, x: float) -> list[float]:
    x = x % 1.0
    cuts = [0.0] + _standard_critical_points(p.values[0]) + [1.0]
    roots = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 0.0:
            continue
        flo, fhi = lift_eval(p, lo), lift_eval(p, hi)
        vmin, vmax = min(flo, fhi), max(flo, fhi)
        for k in range(math.floor(vmin - x), math.ceil(vmax - x) + 1):
            target = x + k
            if not vmin <= target <= vmax:
                continue
            g = lambda y, t=target: lift_eval(p, y) - t
            if g(lo) == 0.0:
                y = lo
            elif g(hi) == 0.0:
                y = hi
            else:
                y = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15)
            roots.append(y % 1.0)
    return roots


def _symbols_from_orbit(orbit: np.ndarray, c: float, snap: float) -> str:
    out = []
    for v in orbit:
        if abs(v - c) < snap:
            out.append("C")
        else:
            out.append("L" if v < c else "R")
    return "".join(out)


def itinerary(p: FamilyParam, x: float, n: int, snap: float = CRITICAL_SNAP) -> str:
    """``L``/``C``/``R`` word of ``x, f(x), ..., f^(n-1)(x)`` about the critical point."""
    if p.is_circle:
        raise ValueError("itineraries are defined for the interval families")
    orbit = np.empty(n)
    v = float(x)
    for i in range(n):
        orbit[i] = v
        v = evaluate(p, v)
    return _symbols_from_orbit(orbit, p.critical_point, snap)


def tent_branches(s: float, n: int):
    """Monotone laps of ``T_s^n`` as arrays ``(lo, hi, slope, offset, code)``.

    On lap ``i`` the iterate is ``slope[i] * x + offset[i]``; bit ``j`` of
    ``code[i]`` (from the most significant of ``n``) is 1 when step ``j`` used
    the right branch.
    """
    if n > MAX_TENT_PERIOD:
        raise ValueError(f"n={n} exceeds the branch cap {MAX_TENT_PERIOD}")
    lo = np.array([0.0])
    hi = np.array([1.0])
    A = np.array([1.0])
    B = np.array([0.0])
    code = np.array([0], dtype=np.int64)
    for _ in range(n):
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = (0.5 - B) / A
        inc = A > 0.0
        # left symbol: current value <= 1/2
        l_lo = np.where(inc, lo, np.maximum(lo, xc))
        l_hi = np.where(inc, np.minimum(hi, xc), hi)
        r_lo = np.where(inc, np.maximum(lo, xc), lo)
        r_hi = np.where(inc, hi, np.minimum(hi, xc))
        keep_l = l_hi > l_lo
        keep_r = r_hi > r_lo
        lo = np.concatenate([l_lo[keep_l], r_lo[keep_r]])
        hi = np.concatenate([l_hi[keep_l], r_hi[keep_r]])
        A_new = np.concatenate([s * A[keep_l], -s * A[keep_r]])
        B_new = np.concatenate([s * B[keep_l], s * (1.0 - B[keep_r])])
        code = np.concatenate([2 * code[keep_l], 2 * code[keep_r] + 1])
        A, B = A_new, B_new
        order = np.argsort(lo, kind="stable")
        lo, hi, A, B, code = lo[order], hi[order], A[order], B[order], code[order]
    return lo, hi, A, B, code


def _tent_fixed_points(s: float, n: int, dedupe_tol: float) -> np.ndarray:
    if not 1.0 < s <= 2.0:
        raise ValueError("tent_periodic_points needs s in (1, 2]")
    if n < 1:
        raise ValueError("period must be >= 1")
    lo, hi, A, B, _ = tent_branches(s, n)
    x = B / (1.0 - A)
    ok = (x >= lo - 1e-12) & (x <= hi + 1e-12)
    pts = np.sort(np.clip(x[ok], 0.0, 1.0)) + 0.0
    if pts.size == 0:
        return pts
    # adjacent laps share endpoints; drop near-duplicates in one pass
    keep = np.concatenate([[True], np.diff(pts) > dedupe_tol])
    return pts[keep]


def tent_periodic_points(s: float, n: int, dedupe_tol: float = 1e-10):
    """All fixed points of ``T_s^n`` with their itineraries.

    Each monotone lap of the iterate is affine, so its fixed point is solved in
    closed form and kept if it lies in the lap. Returns a list of
    ``(x, word)`` sorted by ``x``.
    """
    p = FamilyParam.tent(s)
    return [(float(v), itinerary(p, v, n)) for v in _tent_fixed_points(s, n, dedupe_tol)]


def tent_periodic_count(s: float, n: int, dedupe_tol: float = 1e-10) -> int:
    return int(_tent_fixed_points(s, n, dedupe_tol).size)


def entropy_estimate(s: float, n: int) -> float:
    """Growth rate ``log(#Fix(T_s^n)) / n`` of periodic points."""
    if n < 4:
        raise ValueError("entropy_estimate needs n >= 4")
    return math.log(tent_periodic_count(s, n)) / n
