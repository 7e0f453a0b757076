import math

import mpmath
import numpy as np
import pytest
from scipy.special import erfc

import oracles
from gfflab import estimates as est
from gfflab.exceptions import InvalidConfigError

# constant term of sum ~ (pi/8) log n + c at (1/2, 1/2), pinned by the 2^16 oracle
SINE_CONSTANT = oracles.odd_lattice_sum(2**16) - math.pi / 8 * math.log(2**16)


# --- sine-square sum ---------------------------------------------------------------

def test_sine_sum_single_term():
    total, ratio = est.sine_square_sum(0.5, 0.5, 1)
    assert total == 0.5
    assert math.isnan(ratio)


@pytest.mark.parametrize("n", [1000, 4096])
def test_sine_sum_against_row_sum_oracle(n):
    assert est.sine_square_sum(0.5, 0.5, n)[0] == pytest.approx(oracles.odd_lattice_sum(n), rel=1e-12)


@pytest.mark.parametrize("x,y,n", [(0.3, 0.7, 20), (0.5, 0.5, 7), (0.5, 0.5, 64)])
def test_sine_sum_small_n_brute_force(x, y, n):
    brute = sum(math.sin(math.pi * i * x) ** 2 * math.sin(math.pi * j * y) ** 2 / (i * i + j * j)
                for i in range(1, n + 1) for j in range(1, n + 1))
    assert est.sine_square_sum(x, y, n)[0] == pytest.approx(brute, rel=1e-13)


def test_sine_sum_ratio_at_4096():
    _, ratio = est.sine_square_sum(0.5, 0.5, 4096)
    deviation = ratio / (math.pi / 8) - 1
    predicted = SINE_CONSTANT / math.log(4096) / (math.pi / 8)
    assert abs(deviation - predicted) <= 0.005
    assert abs(deviation) <= 0.12


def test_sine_sum_tolerance_matches_oracle():
    predicted = SINE_CONSTANT / math.log(est.SINE_SUM_N) / (math.pi / 8)
    assert predicted < est.SINE_SUM_TOL <= predicted + 0.006


def test_sine_sum_uniform_over_points():
    _, centre = est.sine_square_sum(0.5, 0.5, 2**14)
    _, off = est.sine_square_sum(0.3, 0.7, 2**14)
    assert abs(off / centre - 1) <= 0.05


def test_sine_sum_ratio_monotone_over_dyadic_n():
    ratios = [est.sine_square_sum(0.5, 0.5, 2**k)[1] for k in range(6, 15)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > math.pi / 8


def test_sine_sum_rejects_boundary_point():
    with pytest.raises(InvalidConfigError):
        est.sine_square_sum(0.0, 0.5, 10)


# --- Gaussian tails ------------------------------------------------------------------

ERFC_POINTS = [0.0, 1e-8, 0.01, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0,
               6.0, 7.5, 10.0, 15.0, 25.0]


@pytest.mark.parametrize("x", ERFC_POINTS)
def test_erfc_against_high_precision(x):
    mpmath.mp.dps = 40
    ref = float(mpmath.erfc(mpmath.mpf(x)))
    assert abs(erfc(x) - ref) <= 1e-14 * ref


def test_gauss_tail_at_three():
    exact, asym, ratio = est.gauss_tail_ratio(3.0)
    assert exact == pytest.approx(0.0026998, abs=1e-7)
    assert ratio == pytest.approx(0.914, abs=1e-3)


def test_gauss_tail_ratio_limit():
    assert abs(est.gauss_tail_ratio(6.0)[2] - 1) <= 0.03


def test_gauss_tail_ratio_increasing():
    ratios = [est.gauss_tail_ratio(lam)[2] for lam in (2, 3, 4, 5, 6)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 1


def test_gauss_tail_rejects_nonpositive():
    with pytest.raises(InvalidConfigError):
        est.gauss_tail_ratio(0.0)


# --- exponential-norm bound ----------------------------------------------------------

def test_exp_norm_zero_beta():
    assert est.exp_norm_bound([0.0], 1.0) == pytest.approx(math.exp(-1))
    assert est.exp_norm_tail_mc([0.0], 1.0, trials=1000) == (0.0, 0.0)


def test_exp_norm_single_beta():
    bound = est.exp_norm_bound([1.0], 3.0)
    assert bound == pytest.approx(math.exp(-3) * 2 * math.exp(0.5), rel=1e-14)
    p, se = est.exp_norm_tail_mc([1.0], 3.0, trials=10**5, seed=1)
    assert abs(p - erfc(3 / math.sqrt(2))) <= 3 * se
    assert p <= bound


def test_exp_norm_inverse_squares():
    report = est.exp_norm_check(1.0 / np.arange(1, 11) ** 2, 5.0, trials=10**5, seed=2)
    assert report.satisfied
    assert report.margin > 0


def test_exp_norm_validation():
    with pytest.raises(InvalidConfigError):
        est.exp_norm_bound([-1.0], 1.0)
    with pytest.raises(InvalidConfigError):
        est.exp_norm_bound([1.0], 0.0)


# --- Brownian corridor bound -----------------------------------------------------

def test_corridor_bound_zero_drift():
    report = est.bm_corridor_prob(0.0, 2.0, trials=10**4, steps_per_unit_time=200, seed=1,
                                  constant=(oracles.corridor_constant_exact(), 0.0))
    assert report.rhs == pytest.approx(oracles.corridor_constant_exact())
    assert abs(report.lhs - oracles.strip_survival()) <= 3 * report.stderr
    assert report.satisfied and not report.inconclusive


def test_corridor_bound_decreases_in_horizon():
    c = (oracles.corridor_constant_exact(), 0.0)
    short = est.bm_corridor_prob(1.0, 1.0, trials=10**4, steps_per_unit_time=1000, seed=2, constant=c)
    long = est.bm_corridor_prob(1.0, 4.0, trials=10**4, steps_per_unit_time=1000, seed=2, constant=c)
    assert short.satisfied and long.satisfied
    assert long.lhs < short.lhs and long.rhs < short.rhs


def test_corridor_bound_reproducible():
    a = est.bm_corridor_prob(1.0, 1.0, trials=10**4, steps_per_unit_time=100, seed=3)
    b = est.bm_corridor_prob(1.0, 1.0, trials=10**4, steps_per_unit_time=100, seed=3)
    assert a == b


@pytest.mark.parametrize("kwargs", [dict(mu=-1.0, T=1.0), dict(mu=1.0, T=0.5), dict(mu=1.0, T=1.0, trials=999)])
def test_corridor_bound_validation(kwargs):
    with pytest.raises(InvalidConfigError):
        est.bm_corridor_prob(**kwargs)


# --- reports ---------------------------------------------------------------------

@pytest.mark.parametrize("direction,lhs,rhs,se,satisfied,inconclusive", [
    (est.UPPER, 0.1, 0.2, 0.01, True, False),
    (est.UPPER, 0.21, 0.2, 0.01, True, True),
    (est.UPPER, 0.3, 0.2, 0.01, False, False),
    (est.LOWER, 0.3, 0.2, 0.01, True, False),
    (est.LOWER, 0.1, 0.2, 0.01, False, False),
])
def test_bound_report_rule(direction, lhs, rhs, se, satisfied, inconclusive):
    r = est.BoundReport("x", lhs, rhs, direction, stderr=se)
    assert r.satisfied is satisfied
    assert r.inconclusive is inconclusive


def test_asymptotic_report():
    assert est.BoundReport("x", 1.02, 1.0, est.ASYMPTOTIC, tolerance=0.03).satisfied
    assert not est.BoundReport("x", 0.95, 1.0, est.ASYMPTOTIC, tolerance=0.03).satisfied
    row = est.BoundReport("x", 1.02, 1.0, est.ASYMPTOTIC, tolerance=0.03).as_row()
    assert row["margin"] == pytest.approx(0.01)


def test_default_battery_satisfied():
    reports = est.check_estimates(seed=0, trials=10**5, corridor_trials=10**4)
    assert len(reports) == 7
    assert all(r.satisfied for r in reports), [r.as_row() for r in reports if not r.satisfied]
