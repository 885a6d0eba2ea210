"""Real orbits: iteration, limit classification, Lyapunov exponents, cobweb
paths and bifurcation sweeps."""

from __future__ import annotations

import enum
import functools
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import OrbitEscapedError, SeedIsPoleError
from .fixed_points import PeriodicCycle, Stability, find_cycles, nonzero_fixed_point
from .map_core import (
    CRIT_GUARD,
    CRITICAL_POINTS,
    POLE_GUARD,
    Regime,
    _lam,
    derivative_real,
    map_real,
    regime,
)

__all__ = [
    "EPS_CONV", "CYCLE_TOL", "M_ESCAPE", "RELAXED_EPS", "PARABOLIC_RADIUS",
    "Termination", "Orbit", "LimitKind", "Limit", "LyapunovEstimate",
    "CobwebPath", "BifurcationRecord", "fixed_attractor", "attracting_cycles",
    "iterate", "classify_limit", "lyapunov", "cobweb", "bifurcation_sweep",
    "bifurcation_records", "resolve_seed",
]

EPS_CONV = 1e-9
CYCLE_TOL = 1e-7
M_ESCAPE = 1e8
RELAXED_EPS = 1e-5
PARABOLIC_RADIUS = 1e-2
CYCLE_PERIODS = range(2, 9)
# the smallest positive normal float stands in for "just above 0"
ZERO_PLUS = sys.float_info.min


class Termination(enum.Enum):
    CONVERGED = "converged"
    ESCAPED = "escaped"
    HIT_POLE = "hit-pole"
    EXHAUSTED = "exhausted"


@dataclass
class Orbit:
    seed: float
    samples: list[float]
    termination: Termination
    step: int | None = None
    target: float | None = None


class LimitKind(enum.Enum):
    TO_ZERO = "to-zero"
    TO_A_LAMBDA = "to-a-lambda"
    TO_SQRT2 = "to-sqrt2"
    TO_CYCLE = "to-cycle"
    NON_CONVERGENT = "non-convergent"
    POLE_ORBIT = "pole-orbit"


@dataclass(frozen=True)
class Limit:
    kind: LimitKind
    step: int | None = None
    cycle: PeriodicCycle | None = None


@dataclass(frozen=True)
class LyapunovEstimate:
    lam: float
    seed: float
    terms_used: int
    burn_in: int
    value: float | None  # None when the orbit escaped
    skipped_terms: int


@dataclass
class CobwebPath:
    vertices: list[tuple[float, float]]
    termination: Termination = Termination.EXHAUSTED


@dataclass(frozen=True)
class BifurcationRecord:
    lam: float
    attractor_samples: tuple[float, ...] = field(default=())


def fixed_attractor(p) -> tuple[float | None, bool]:
    """The attracting (or parabolic) real fixed point for this regime.

    Returns ``(location, parabolic)``; location is None above lambda*.
    """
    reg = regime(_lam(p))
    if reg is Regime.BELOW_ONE:
        return 0.0, False
    if reg is Regime.ONE:
        return 0.0, True
    if reg is Regime.ABOVE_STAR:
        return None, False
    return nonzero_fixed_point(p), reg is Regime.LAMBDA_STAR


def attracting_cycles(p, periods=CYCLE_PERIODS) -> list[PeriodicCycle]:
    return _attracting_cycles(_lam(p), tuple(periods))


@functools.lru_cache(maxsize=64)
def _attracting_cycles(lam: float, periods: tuple[int, ...]) -> list[PeriodicCycle]:
    out = []
    for n in periods:
        out.extend(c for c in find_cycles(lam, n) if c.stability is Stability.ATTRACTING)
    return out


def _check_seed(seed: float) -> float:
    seed = float(seed)
    if abs(seed + 1.0) <= POLE_GUARD:
        raise SeedIsPoleError(f"seed {seed!r} is the pole -1")
    return seed


def _escaped(x: float) -> bool:
    return not math.isfinite(x) or abs(x) > M_ESCAPE


class _ConvergenceTest:
    """Stateful convergence check against a single fixed point."""

    def __init__(self, target: float, parabolic: bool):
        self.a = target
        self.parabolic = parabolic
        self.hist: list[float] = []

    def reset(self):
        self.hist.clear()

    def __call__(self, x: float) -> bool:
        h = self.hist
        h.append(x)
        if len(h) > 3:
            del h[0]
        a = self.a
        if not self.parabolic:
            return len(h) >= 2 and abs(h[-1] - h[-2]) < EPS_CONV and abs(x - a) < CYCLE_TOL
        # Parabolic points attract like 1/sqrt(n); compare every second
        # iterate so that a multiplier of -1 (lambda*) is handled too.
        if len(h) < 3:
            return False
        return (abs(h[-1] - h[-3]) < RELAXED_EPS
                and abs(x - a) < PARABOLIC_RADIUS
                and abs(h[-1] - a) <= abs(h[-3] - a))


def iterate(p, seed: float, max_steps: int = 10_000) -> Orbit:
    """Iterate zeta from ``seed`` until it converges, escapes, hits the pole,
    or ``max_steps`` map applications have been made."""
    lam = _lam(p)
    x = _check_seed(seed)
    target, parabolic = fixed_attractor(lam)
    test = _ConvergenceTest(target, parabolic) if target is not None else None
    samples = [x]
    if test is not None:
        test(x)
    for i in range(1, max_steps + 1):
        if abs(x + 1.0) <= POLE_GUARD:
            return Orbit(seed, samples, Termination.HIT_POLE, i - 1)
        x = map_real(lam, x)
        samples.append(x)
        if _escaped(x):
            return Orbit(seed, samples, Termination.ESCAPED, i)
        if test is not None and test(x):
            return Orbit(seed, samples, Termination.CONVERGED, i, target)
    if abs(x + 1.0) <= POLE_GUARD:
        return Orbit(seed, samples, Termination.HIT_POLE, max_steps)
    return Orbit(seed, samples, Termination.EXHAUSTED, max_steps)


_KIND_BY_REGIME = {
    Regime.BELOW_ONE: LimitKind.TO_ZERO,
    Regime.ONE: LimitKind.TO_ZERO,
    Regime.MIDDLE: LimitKind.TO_A_LAMBDA,
    Regime.LAMBDA_STAR: LimitKind.TO_SQRT2,
}


def classify_limit(p, seed: float, max_steps: int = 1_000_000) -> Limit:
    """Label the long-run behaviour of the real orbit of ``seed``.

    A real orbit that overflows (or underflows onto 0 from a nonzero value)
    has passed through the essential singularity: the next iterate is a
    positive number far below float resolution.  The orbit is continued
    from the smallest positive normal float.
    """
    lam = _lam(p)
    x = _check_seed(seed)
    if x == 0.0:
        return Limit(LimitKind.TO_ZERO, 0)
    reg = regime(lam)
    target, parabolic = fixed_attractor(lam)
    test = _ConvergenceTest(target, parabolic) if target is not None else None
    cycles = attracting_cycles(lam) if reg is Regime.ABOVE_STAR else []
    pending = None  # (cycle, expected index, matched count)

    if test is not None and test(x):
        return Limit(_KIND_BY_REGIME[reg], 0)
    for i in range(1, max_steps + 1):
        if abs(x + 1.0) <= POLE_GUARD:
            return Limit(LimitKind.POLE_ORBIT, i - 1)
        prev = x
        x = map_real(lam, x)
        if _escaped(x) or (x == 0.0 and prev != 0.0):
            x = ZERO_PLUS
            if test is not None:
                test.reset()
            pending = None
        if test is not None:
            if test(x):
                return Limit(_KIND_BY_REGIME[reg], i)
            continue
        if pending is not None:
            cyc, j, matched = pending
            if abs(x - cyc.points[j]) < CYCLE_TOL:
                matched += 1
                if matched > cyc.period:
                    return Limit(LimitKind.TO_CYCLE, i, cyc)
                pending = (cyc, (j + 1) % cyc.period, matched)
                continue
            pending = None
        for cyc in cycles:
            for j, c in enumerate(cyc.points):
                if abs(x - c) < CYCLE_TOL:
                    pending = (cyc, (j + 1) % cyc.period, 1)
                    break
            if pending is not None:
                break
    return Limit(LimitKind.NON_CONVERGENT, None)


def lyapunov(p, seed: float | None = None, k: int = 2000, burn_in: int = 0) -> LyapunovEstimate:
    """Finite-k Lyapunov exponent (1/k) sum ln|zeta'(x_i)| along the orbit.

    ``seed`` defaults to the positive critical point.  Terms at which the
    derivative vanishes or the iterate sits on the pole are skipped and
    counted rather than clamped.
    """
    lam = _lam(p)
    if k < 100:
        raise ValueError(f"k must be >= 100, got {k}")
    x = _check_seed(CRITICAL_POINTS[1] if seed is None else seed)
    x0 = x

    def step(v):
        try:
            w = map_real(lam, v)
        except ArithmeticError:
            w = math.inf
        if _escaped(w):
            raise OrbitEscapedError(
                f"orbit of {x0!r} escaped for lambda={lam!r} before {k} terms")
        return w

    for _ in range(burn_in):
        x = step(x)
    total = 0.0
    skipped = 0
    for _ in range(k):
        if abs(x + 1.0) <= POLE_GUARD or abs(x * x + x - 1.0) <= CRIT_GUARD:
            skipped += 1
        else:
            total += math.log(abs(derivative_real(lam, x)))
        x = step(x)
    used = k - skipped
    value = total / used if used else math.nan
    return LyapunovEstimate(lam, x0, used, burn_in, value, skipped)


def cobweb(p, seed: float, n: int) -> CobwebPath:
    """Vertices (x0, 0), (x0, x1), (x1, x1), (x1, x2), ... of the web diagram."""
    lam = _lam(p)
    x = _check_seed(seed)
    if n < 1:
        raise ValueError("n must be >= 1")
    verts = [(x, 0.0)]
    for _ in range(n):
        if abs(x + 1.0) <= POLE_GUARD:
            return CobwebPath(verts, Termination.HIT_POLE)
        y = map_real(lam, x)
        if _escaped(y):
            return CobwebPath(verts, Termination.ESCAPED)
        verts.append((x, y))
        verts.append((y, y))
        x = y
    return CobwebPath(verts, Termination.EXHAUSTED)


def resolve_seed(seed_rule) -> float:
    """``"critical"`` (or None) selects the positive critical point; anything
    else is taken as a numeric seed."""
    if seed_rule is None or seed_rule == "critical":
        return CRITICAL_POINTS[1]
    return float(seed_rule)


def bifurcation_records(lambdas, transient: int = 20_000, samples: int = 64,
                        seed_rule="critical", workers: int | None = None,
                        chunk_size: int | None = None) -> list[BifurcationRecord]:
    """Post-transient orbit samples for each lambda in ``lambdas``.

    Orbits that escape or hit the pole give an empty sample tuple.  Output
    does not depend on ``workers`` or ``chunk_size``.
    """
    lams = np.ascontiguousarray(lambdas, dtype=np.float64)
    if lams.ndim != 1 or np.any(lams <= 0):
        raise ValueError("lambdas must be a 1-d array of positive values")
    x0 = _check_seed(resolve_seed(seed_rule))
    out = np.zeros((lams.size, samples), dtype=np.float64)
    valid = np.zeros(lams.size, dtype=np.bool_)
    workers = max(1, workers or 1)
    if chunk_size is None:
        chunk_size = max(1, -(-lams.size // workers))
    bounds = [(i, min(i + chunk_size, lams.size)) for i in range(0, lams.size, chunk_size)]

    def run(b):
        lo, hi = b
        _kernels.sweep_rows(lams[lo:hi], x0, transient, samples, M_ESCAPE,
                            out[lo:hi], valid[lo:hi])

    if workers == 1 or len(bounds) == 1:
        for b in bounds:
            run(b)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, bounds))
    return [BifurcationRecord(float(lam), tuple(out[r].tolist()) if valid[r] else ())
            for r, lam in enumerate(lams)]


def bifurcation_sweep(lambda_min: float, lambda_max: float, steps: int,
                      transient: int = 20_000, samples: int = 64,
                      seed_rule="critical", workers: int | None = None,
                      chunk_size: int | None = None) -> list[BifurcationRecord]:
    """Bifurcation data on the uniform grid of ``steps`` values in
    [lambda_min, lambda_max]."""
    if not 0 < lambda_min < lambda_max:
        raise ValueError("need 0 < lambda_min < lambda_max")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    grid = np.linspace(lambda_min, lambda_max, steps)
    return bifurcation_records(grid, transient, samples, seed_rule, workers, chunk_size)
