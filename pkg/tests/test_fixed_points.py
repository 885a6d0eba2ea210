import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from merodyn import (
    NotAFixedPointError,
    PeriodicCycle,
    Stability,
    ToleranceError,
    classify_fixed_point,
    cycle_multiplier,
    eval_map,
    find_cycles,
    lambda_star,
    solve_fixed_points,
)
from merodyn.fixed_points import nonzero_fixed_point, stability_of

# Oracles from 40-digit mpmath root finding (independent of this package).
FP = {
    0.5: (-0.31492305784540605397, 1.7746131137608199379),
    2.0: (0.37482252818362338162, 0.35254408059690896911),
    1.1: (0.048218307200874895617, 0.90578143992276067773),
    5.0: (0.94445577943442423286, -0.43017306312041999163),
}
CYCLES = {
    12.0: ((0.7482182225885425, 2.430338904093355), 0.376876041250988),
    18.5: ((0.408442144877219, 3.565981574722204), -1.009319721751874),
    18.44505: ((0.4098648912859419, 3.559106625450589), -1.000002350819289),
}


@pytest.mark.parametrize("lam", sorted(FP))
def test_nonzero_fixed_point_oracle(lam):
    loc, mult = FP[lam]
    origin, other = solve_fixed_points(lam)
    assert origin.is_origin and origin.location == 0.0
    assert origin.multiplier == pytest.approx(lam, rel=1e-15)
    assert other.location == pytest.approx(loc, abs=1e-12)
    assert other.multiplier == pytest.approx(mult, rel=1e-9)


@pytest.mark.parametrize("lam, origin, other", [
    (0.5, Stability.ATTRACTING, Stability.REPELLING),
    (2.0, Stability.REPELLING, Stability.ATTRACTING),
    (5.0, Stability.REPELLING, Stability.ATTRACTING),
])
def test_stability(lam, origin, other):
    a, b = solve_fixed_points(lam)
    assert (a.stability, b.stability) == (origin, other)


def test_lambda_one_has_only_origin():
    recs = solve_fixed_points(1.0)
    assert len(recs) == 1
    assert recs[0].stability is Stability.INDIFFERENT


def test_lambda_star_fixed_point_is_sqrt2():
    _, fp = solve_fixed_points(lambda_star())
    assert fp.location == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert fp.multiplier == pytest.approx(-1.0, abs=1e-10)
    assert fp.stability is Stability.INDIFFERENT


def test_not_a_fixed_point():
    with pytest.raises(NotAFixedPointError):
        classify_fixed_point(2.0, 0.5)


def test_tolerance_too_small():
    with pytest.raises(ToleranceError):
        solve_fixed_points(2.0, tol=1e-300)
    with pytest.raises(ToleranceError):
        solve_fixed_points(2.0, tol=0.0)


def test_stability_band():
    assert stability_of(0.99) is Stability.ATTRACTING
    assert stability_of(-1.000002) is Stability.INDIFFERENT
    assert stability_of(1.01) is Stability.REPELLING
    assert stability_of(-1.000002, tol_class=1e-6) is Stability.REPELLING


@pytest.mark.parametrize("lam", sorted(CYCLES))
def test_two_cycles_oracle(lam):
    pts, mult = CYCLES[lam]
    cycles = find_cycles(lam, 2)
    assert len(cycles) == 1
    c = cycles[0]
    assert c.period == 2
    assert c.points == pytest.approx(pts, abs=1e-10)
    assert c.multiplier == pytest.approx(mult, abs=1e-8)
    assert cycles.skipped_brackets == 0


def test_cycle_stabilities():
    kinds = [find_cycles(lam, 2)[0].stability for lam in (12.0, 18.5, 18.44505)]
    assert kinds == [Stability.ATTRACTING, Stability.REPELLING, Stability.INDIFFERENT]


@pytest.mark.parametrize("lam", [0.5, 2.0, 5.0, 9.9])
def test_no_two_cycles_before_lambda_star(lam):
    assert find_cycles(lam, 2) == []


def test_cycle_multiplier_from_points():
    c = find_cycles(12.0, 2)[0]
    m, s = cycle_multiplier(12.0, c)
    assert m == pytest.approx(c.multiplier, rel=1e-12)
    assert s is Stability.ATTRACTING
    m2, _ = cycle_multiplier(12.0, list(reversed(c.points)))
    assert m2 == pytest.approx(m, rel=1e-12)


@pytest.mark.parametrize("kwargs", [
    {"period": 1},
    {"period": 2, "interval": (-2.0, 0.5)},
    {"period": 2, "interval": (3.0, 1.0)},
    {"period": 2, "grid": 10},
])
def test_find_cycles_validation(kwargs):
    with pytest.raises(ValueError):
        find_cycles(12.0, **kwargs)


def test_cycles_are_periodic_with_exact_period():
    for lam in (12.0, 25.0, 38.0):
        for c in find_cycles(lam, 2):
            assert isinstance(c, PeriodicCycle)
            x = c.points[0]
            assert abs(eval_map(lam, x) - x) > 1e-6
            assert eval_map(lam, eval_map(lam, x)) == pytest.approx(x, abs=1e-9)
            assert eval_map(lam, c.points[0]) == pytest.approx(c.points[1], abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.02, 60.0).filter(lambda v: abs(v - 1.0) > 1e-6))
def test_fixed_point_identity(lam):
    x = nonzero_fixed_point(lam)
    assert x is not None and x > -1.0
    assert (x + 1.0) * math.exp(x) == pytest.approx(lam, rel=1e-11)
    rec = classify_fixed_point(lam, x)
    # multiplier at a fixed point is (1 - x - x^2) / (x + 1)
    assert rec.multiplier == pytest.approx((1.0 - x - x * x) / (x + 1.0), rel=1e-9, abs=1e-12)
    if 1.0 < lam < lambda_star() - 1e-3:
        assert rec.stability is Stability.ATTRACTING
    elif lam > lambda_star() + 1e-3:
        assert rec.stability is Stability.REPELLING
    # origin: attracting below 1, repelling above
    origin = solve_fixed_points(lam)[0]
    assert origin.stability is (Stability.ATTRACTING if lam < 1 else Stability.REPELLING)
