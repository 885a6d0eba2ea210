"""Evaluation of the family zeta(z) = lam * z * exp(-z) / (z + 1).

Everything here is a pure function.  Real arguments go through ``math`` and
return floats; complex arguments go through ``cmath``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import CriticalPointError, PoleError

__all__ = [
    "POLE", "POLE_GUARD", "CRIT_GUARD", "SQRT2", "CRITICAL_POINTS",
    "Regime", "Parameter", "SingularData",
    "lambda_star", "regime", "singular_data",
    "eval_map", "eval_derivative", "eval_schwarzian",
    "map_real", "derivative_real", "map_array",
]

Number = Union[float, complex]

POLE = -1.0
POLE_GUARD = 1e-12
CRIT_GUARD = 1e-9
SQRT2 = math.sqrt(2.0)
# roots of x**2 + x - 1
CRITICAL_POINTS = ((-1.0 - math.sqrt(5.0)) / 2.0, (-1.0 + math.sqrt(5.0)) / 2.0)


def lambda_star() -> float:
    """Parameter value at which the nonzero fixed point reaches sqrt(2)."""
    return (SQRT2 + 1.0) * math.exp(SQRT2)


class Regime(enum.Enum):
    BELOW_ONE = "below-one"
    ONE = "one"
    MIDDLE = "middle"
    LAMBDA_STAR = "lambda-star"
    ABOVE_STAR = "above-star"


def regime(lam: float) -> Regime:
    """Classify ``lam`` against the two bifurcation values 1 and lambda*."""
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam!r}")
    star = lambda_star()
    if lam < 1.0:
        return Regime.BELOW_ONE
    if lam == 1.0:
        return Regime.ONE
    if lam < star:
        return Regime.MIDDLE
    if lam == star:
        return Regime.LAMBDA_STAR
    return Regime.ABOVE_STAR


@dataclass(frozen=True)
class Parameter:
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not math.isfinite(lam) or lam <= 0:
            raise ValueError(f"lambda must be a finite positive number, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)

    @property
    def regime(self) -> Regime:
        return regime(self.lam)


def _lam(p) -> float:
    return p.lam if isinstance(p, Parameter) else float(p)


@dataclass(frozen=True)
class SingularData:
    critical_points: tuple[float, float]
    critical_values: tuple[float, float]
    asymptotic_value: float = 0.0
    pole: float = POLE


def singular_data(p) -> SingularData:
    """Critical points, critical values, asymptotic value and pole of zeta."""
    lam = _lam(p)
    s5 = math.sqrt(5.0)
    values = (
        (3.0 + s5) / 2.0 * lam * math.exp((1.0 + s5) / 2.0),
        (3.0 - s5) / 2.0 * lam * math.exp((1.0 - s5) / 2.0),
    )
    return SingularData(CRITICAL_POINTS, values)


def map_real(lam: float, x: float) -> float:
    """zeta on the real line; overflow returns a signed infinity."""
    if abs(x + 1.0) <= POLE_GUARD:
        raise PoleError(f"x={x!r} is within {POLE_GUARD} of the pole")
    try:
        e = math.exp(-x)
    except OverflowError:
        # x < -1 here, so x/(x+1) > 0
        return math.inf
    v = lam * x * e / (x + 1.0)
    if math.isinf(v) or math.isnan(v):
        return math.inf
    return v


def derivative_real(lam: float, x: float) -> float:
    if abs(x + 1.0) <= POLE_GUARD:
        raise PoleError(f"x={x!r} is within {POLE_GUARD} of the pole")
    q = x * x + x - 1.0
    try:
        e = math.exp(-x)
    except OverflowError:
        return -math.copysign(math.inf, q)
    return -lam * q * e / ((x + 1.0) * (x + 1.0))


def eval_map(p, z: Number) -> Number:
    """Evaluate zeta_lambda at ``z``.

    Real input gives a real result.  Raises :class:`PoleError` when
    ``|z + 1| <= POLE_GUARD``.
    """
    lam = _lam(p)
    if not isinstance(z, complex):
        return map_real(lam, float(z))
    if abs(z + 1.0) <= POLE_GUARD:
        raise PoleError(f"z={z!r} is within {POLE_GUARD} of the pole")
    try:
        return lam * z * cmath.exp(-z) / (z + 1.0)
    except OverflowError:
        return complex(math.inf, 0.0)


def eval_derivative(p, z: Number) -> Number:
    lam = _lam(p)
    if not isinstance(z, complex):
        return derivative_real(lam, float(z))
    if abs(z + 1.0) <= POLE_GUARD:
        raise PoleError(f"z={z!r} is within {POLE_GUARD} of the pole")
    try:
        return -lam * (z * z + z - 1.0) * cmath.exp(-z) / ((z + 1.0) ** 2)
    except OverflowError:
        return complex(math.inf, 0.0)


def eval_schwarzian(z: Number) -> Number:
    """Closed-form Schwarzian derivative of zeta_lambda (independent of lambda).

        SD(z) = -(z^4 + 2 z^3 - 3 z^2 - 4 z + 18) / (2 (z^2 + z - 1)^2)
    """
    q = z * z + z - 1.0
    if abs(q) <= CRIT_GUARD:
        raise CriticalPointError(f"z={z!r} is a critical point; the Schwarzian is singular")
    if abs(z + 1.0) <= POLE_GUARD:
        raise PoleError(f"z={z!r} is the pole")
    num = z**4 + 2.0 * z**3 - 3.0 * z**2 - 4.0 * z + 18.0
    return -num / (2.0 * q * q)


def map_array(lam: float, x: np.ndarray) -> np.ndarray:
    """Vectorised real map.  Pole hits and overflow come back as non-finite."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out = lam * x * np.exp(-x) / (x + 1.0)
    out[np.abs(x + 1.0) <= POLE_GUARD] = np.nan
    return out
