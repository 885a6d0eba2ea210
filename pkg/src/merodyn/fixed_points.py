"""Real fixed points and periodic cycles of zeta_lambda, with stability."""

from __future__ import annotations

import enum
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAFixedPointError, PoleEncounteredError, ToleranceError
from .map_core import (
    POLE_GUARD,
    _lam,
    derivative_real,
    map_array,
    map_real,
)

__all__ = [
    "ROOT_TOL", "CLASS_TOL", "Stability", "FixedPointRecord", "PeriodicCycle",
    "CycleList", "stability_of", "solve_fixed_points", "classify_fixed_point",
    "nonzero_fixed_point", "find_cycles", "cycle_multiplier",
]

log = logging.getLogger(__name__)

ROOT_TOL = 1e-12
# Half a unit in the sixth significant digit of |multiplier| = 1.
CLASS_TOL = 5e-6
NEWTON_MAX_STEPS = 50


class Stability(enum.Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    INDIFFERENT = "indifferent"


def stability_of(multiplier: float, tol_class: float = CLASS_TOL) -> Stability:
    m = abs(multiplier)
    if m < 1.0 - tol_class:
        return Stability.ATTRACTING
    if m > 1.0 + tol_class:
        return Stability.REPELLING
    return Stability.INDIFFERENT


@dataclass(frozen=True)
class FixedPointRecord:
    location: float
    multiplier: float
    stability: Stability
    is_origin: bool


@dataclass(frozen=True)
class PeriodicCycle:
    period: int
    points: tuple[float, ...]
    multiplier: float
    stability: Stability

    def __contains__(self, x) -> bool:
        return x in self.points


class CycleList(list):
    """List of cycles that also remembers how many brackets hit the pole."""

    skipped_brackets: int = 0


def _check_tol(tol: float, lo: float, hi: float) -> None:
    if not tol > 0:
        raise ToleranceError(f"tol must be > 0, got {tol!r}")
    spacing = math.ulp(max(abs(lo), abs(hi)))
    if tol < spacing:
        raise ToleranceError(
            f"tol={tol!r} is below the float spacing {spacing!r} near the root")


def _bisect(f, lo: float, hi: float, flo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _newton(f, df, x: float, lo: float, hi: float) -> float:
    """Newton polish kept inside [lo, hi]; returns ``x`` unchanged on divergence."""
    start, best = x, abs(f(x))
    for _ in range(NEWTON_MAX_STEPS):
        d = df(x)
        if d == 0.0 or not math.isfinite(d):
            break
        step = f(x) / d
        nxt = x - step
        if not (lo <= nxt <= hi) or not math.isfinite(nxt):
            return start
        r = abs(f(nxt))
        if r > best:
            break
        x, best = nxt, r
        if step == 0.0 or r == 0.0:
            break
    return x


def nonzero_fixed_point(p, tol: float = ROOT_TOL) -> float | None:
    """Root of (x + 1) e^x = lam other than 0, or None when lam == 1."""
    lam = _lam(p)
    if lam == 1.0:
        return None

    def g(x):
        return (x + 1.0) * math.exp(x) - lam

    def dg(x):
        return (x + 2.0) * math.exp(x)

    if lam < 1.0:
        lo, hi = -1.0, 0.0
    else:
        lo, hi = 0.0, 1.0
        while g(hi) <= 0.0:
            lo, hi = hi, 2.0 * hi
    _check_tol(tol, lo, hi)
    x = _bisect(g, lo, hi, g(lo), tol)
    x = _newton(g, dg, x, lo, hi)
    if abs(x) <= tol:
        return None
    return x


def classify_fixed_point(p, x_f: float, tol: float = ROOT_TOL,
                         tol_class: float = CLASS_TOL) -> FixedPointRecord:
    """Multiplier and stability of the fixed point ``x_f``."""
    lam = _lam(p)
    residual = abs(map_real(lam, x_f) - x_f)
    if not residual <= 10.0 * tol:
        raise NotAFixedPointError(
            f"x={x_f!r} is not a fixed point for lambda={lam!r} (residual {residual:.3g})")
    mu = derivative_real(lam, x_f)
    return FixedPointRecord(x_f, mu, stability_of(mu, tol_class), x_f == 0.0)


def solve_fixed_points(p, tol: float = ROOT_TOL,
                       tol_class: float = CLASS_TOL) -> list[FixedPointRecord]:
    """All real fixed points, origin first.

    Nonzero fixed points solve (x + 1) e^x = lam.  The left side is strictly
    increasing on (-1, inf) and negative on (-inf, -1), so there is exactly
    one such root whenever lam != 1.
    """
    if not tol > 0:
        raise ToleranceError(f"tol must be > 0, got {tol!r}")
    out = [classify_fixed_point(p, 0.0, tol, tol_class)]
    x = nonzero_fixed_point(p, tol)
    if x is not None:
        out.append(classify_fixed_point(p, x, tol, tol_class))
    return out


# -- periodic cycles ---------------------------------------------------------


def _orbit(lam: float, x: float, n: int) -> list[float]:
    pts = [x]
    for _ in range(n - 1):
        x = map_real(lam, x)
        pts.append(x)
    return pts


def _iterate_n(lam: float, x: float, n: int) -> float:
    for _ in range(n):
        x = map_real(lam, x)
        if not math.isfinite(x):
            raise PoleEncounteredError("orbit left the finite real line")
    return x


def _iterate_with_derivative(lam: float, x: float, n: int) -> tuple[float, float]:
    d = 1.0
    for _ in range(n):
        d *= derivative_real(lam, x)
        x = map_real(lam, x)
    return x, d


def _grid_iterates(lam: float, xs: np.ndarray, period: int):
    """h(x) = zeta^period(x) - x on the grid, plus a per-point mask of
    iterates that sat below/above the pole (to detect brackets crossing it)."""
    side = np.zeros((period, xs.size), dtype=bool)
    bad = np.zeros(xs.size, dtype=bool)
    y = xs.copy()
    for k in range(period):
        side[k] = y > -1.0
        bad |= ~np.isfinite(y) | (np.abs(y + 1.0) <= 1e3 * POLE_GUARD)
        y = map_array(lam, y)
    bad |= ~np.isfinite(y)
    return y - xs, side, bad


def cycle_multiplier(p, cycle: PeriodicCycle | tuple[float, ...] | list[float],
                     tol_class: float = CLASS_TOL) -> tuple[float, Stability]:
    """Product of derivatives along the cycle and the resulting stability."""
    lam = _lam(p)
    points = cycle.points if isinstance(cycle, PeriodicCycle) else tuple(cycle)
    m = math.prod(derivative_real(lam, x) for x in points)
    return m, stability_of(m, tol_class)


@functools.lru_cache(maxsize=256)
def _find_cycles_cached(lam, period, lo, hi, grid, tol, tol_class):
    xs = np.linspace(lo, hi, grid + 1)
    h, side, bad = _grid_iterates(lam, xs, period)

    def hf(x):
        return _iterate_n(lam, x, period) - x

    def dh(x):
        return _iterate_with_derivative(lam, x, period)[1] - 1.0

    skipped = 0
    roots = []
    s = np.sign(h)
    idx = np.nonzero((s[:-1] * s[1:] <= 0) & (s[:-1] != 0))[0]
    # exact zeros on grid nodes
    exact = set(np.nonzero(h == 0.0)[0].tolist())
    for i in sorted(exact):
        roots.append(float(xs[i]))
    for i in idx:
        if i + 1 in exact:
            continue
        if bad[i] or bad[i + 1] or np.any(side[:, i] != side[:, i + 1]):
            skipped += 1
            continue
        a, b = float(xs[i]), float(xs[i + 1])
        try:
            r = _bisect(hf, a, b, float(h[i]), tol)
            r = _newton(hf, dh, r, a, b)
        except (PoleEncounteredError, ArithmeticError):
            skipped += 1
            continue
        roots.append(r)
    if skipped:
        log.debug("find_cycles(lam=%r, period=%d): skipped %d pole brackets",
                  lam, period, skipped)

    same = 100.0 * tol
    # Positional precision of a polished root; the residual of a period-n
    # orbit grows with the cycle multiplier.
    closure = max(same, 1e-9)
    cycles: list[list[float]] = []
    for r in sorted(roots):
        try:
            orbit = _orbit(lam, r, period)
            back = map_real(lam, orbit[-1])
        except ArithmeticError:
            continue
        if not all(math.isfinite(v) for v in orbit) or abs(back - r) > closure:
            continue
        # reject points whose exact period is a proper divisor
        if any(period % d == 0 and abs(orbit[d] - r) <= closure
               for d in range(1, period)):
            continue
        for cyc in cycles:
            if any(abs(c - r) <= closure for c in cyc):
                # replace the iterate by the directly polished root
                j = min(range(period), key=lambda k: abs(cyc[k] - r))
                cyc[j] = r
                break
        else:
            cycles.append(orbit)

    out = CycleList()
    for cyc in cycles:
        k = min(range(period), key=lambda j: cyc[j])
        pts = tuple(cyc[k:] + cyc[:k])
        m, st = cycle_multiplier(lam, pts, tol_class)
        out.append(PeriodicCycle(period, pts, m, st))
    out.sort(key=lambda c: c.points[0])
    out.skipped_brackets = skipped
    return out


def find_cycles(p, period: int, interval: tuple[float, float] = (1e-9, 10.0),
                grid: int = 100_000, tol: float = ROOT_TOL,
                tol_class: float = CLASS_TOL) -> CycleList:
    """Cycles of exact period ``period`` with a point inside ``interval``.

    Scans h(x) = zeta^period(x) - x for sign changes on a uniform grid,
    bisects and Newton-polishes each bracket, then drops fixed points,
    cycles of smaller period and duplicates.  Brackets across which some
    intermediate iterate crosses the pole are skipped and counted in
    ``skipped_brackets`` of the returned list.
    """
    lam = _lam(p)
    period = int(period)
    lo, hi = float(interval[0]), float(interval[1])
    if period < 2:
        raise ValueError("period must be >= 2")
    if not lo < hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if lo <= -1.0 <= hi:
        raise ValueError("interval must exclude the pole -1")
    if grid < 100:
        raise ValueError("grid must be >= 100")
    _check_tol(tol, lo, hi)
    res = _find_cycles_cached(lam, period, lo, hi, int(grid), float(tol), float(tol_class))
    out = CycleList(res)
    out.skipped_brackets = res.skipped_brackets
    return out
