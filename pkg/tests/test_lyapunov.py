import math

import numpy as np
import pytest

from dampedwave.cocycle import line_integral
from dampedwave.damping import DampingField, one_plus_cos, random_field
from dampedwave.geometry import PhasePoint, sample_shell
from dampedwave.lyapunov import (
    band_estimates,
    essential_bounds,
    exterior_sums,
    extrapolate_c_infinity,
    finite_time_bounds,
    finite_time_bounds_at,
    lyapunov_spectrum,
)

SQRT2 = math.sqrt(2.0)
POINT = PhasePoint((0.4,), (1.0 / SQRT2,))


def diag_one_plus_cos_two():
    A0 = np.diag([1.0 + 0j, 2.0])
    A1 = np.array([[0.5 + 0j, 0.0], [0.0, 0.0]])
    return DampingField(2, 1, {(0,): A0, (1,): A1, (-1,): A1})


def test_constant_bounds_exact_for_every_horizon():
    f = DampingField.constant(0.7 * np.eye(2))
    for T in (0.5, 3.0, 11.0):
        fb = finite_time_bounds(f, T, m=6, dt=1e-3, seed=2)
        assert fb.c_minus == pytest.approx(0.7, abs=1e-10)
        assert fb.c_plus == pytest.approx(0.7, abs=1e-10)


def test_zero_damping_bounds():
    fb = finite_time_bounds(DampingField.zero(2, 1), 4.0, m=4, dt=1e-2, seed=0)
    assert fb.c_minus == pytest.approx(0.0, abs=1e-12)
    assert fb.c_plus == pytest.approx(0.0, abs=1e-12)


def test_one_plus_cos_bounds_match_extremal_line_integral():
    # sup/inf over x0 of (1/T) int (1 + cos(x0 + sqrt2 s)) ds
    f = one_plus_cos()
    T = 10.0
    grid = np.linspace(0.0, 2.0 * math.pi, 1024, endpoint=False)
    pts = [PhasePoint((x,), (s / SQRT2,)) for x in grid for s in (+1.0, -1.0)]
    fb = finite_time_bounds_at(f, T, pts, dt=1e-3)
    dev = SQRT2 * abs(math.sin(T / SQRT2)) / T
    assert fb.c_minus == pytest.approx(1.0 - dev, abs=1e-3)
    assert fb.c_plus == pytest.approx(1.0 + dev, abs=1e-3)


def test_extrapolate_constant_has_zero_diagnostic():
    f = DampingField.constant([[0.9]])
    est = extrapolate_c_infinity(f, [5.0, 10.0, 20.0], m=4, dt=1e-3, seed=0)
    assert est.c_minus == pytest.approx(0.9, abs=1e-9)
    assert est.c_plus == pytest.approx(0.9, abs=1e-9)
    assert est.diagnostic < 1e-9
    assert est.converged


def test_extrapolate_one_plus_cos_converges_to_mean():
    est = extrapolate_c_infinity(one_plus_cos(), [25.0, 50.0, 100.0], m=16, dt=2e-3, seed=3)
    assert est.c_minus == pytest.approx(1.0, abs=2.0 / est.T)
    assert est.c_plus == pytest.approx(1.0, abs=2.0 / est.T)
    assert est.diagnostic < 0.2


def test_extrapolate_rejects_bad_horizons():
    with pytest.raises(ValueError):
        extrapolate_c_infinity(one_plus_cos(), [5.0, 4.0, 6.0])
    with pytest.raises(ValueError):
        extrapolate_c_infinity(one_plus_cos(), [5.0, 6.0])


def test_spectrum_zero_field():
    sp = lyapunov_spectrum(DampingField.zero(3, 1), POINT, 5.0, dt=1e-2)
    assert np.allclose(sp.exponents, 0.0, atol=1e-12)


def test_spectrum_constant_diagonal():
    sp = lyapunov_spectrum(DampingField.constant(np.diag([1.0, 2.0])), POINT, 40.0, dt=1e-3)
    assert sp.exponents[0] == pytest.approx(-2.0, abs=1e-9)
    assert sp.exponents[1] == pytest.approx(-1.0, abs=1e-9)
    assert sp.rank_ok


def test_spectrum_scalar_birkhoff_mean():
    T = 60.0
    sp = lyapunov_spectrum(one_plus_cos(), POINT, T, dt=1e-3)
    assert sp.exponents[0] == pytest.approx(-1.0, abs=2.0 / T)


def test_exterior_sums_match_det_and_top():
    f = DampingField.constant(np.diag([1.0, 2.0]))
    T = 40.0
    assert exterior_sums(f, POINT, T, 1e-3, 1) == pytest.approx(-1.0, abs=1e-9)
    assert exterior_sums(f, POINT, T, 1e-3, 2) == pytest.approx(-3.0, abs=1e-9)
    assert exterior_sums(DampingField.zero(2, 1), POINT, 5.0, 1e-2, 1) == pytest.approx(0.0, abs=1e-12)


def test_exterior_sums_match_qr_partial_sums():
    f = random_field(3, 1, amplitude=0.6, seed=19)
    T = 50.0
    sp = lyapunov_spectrum(f, POINT, T, dt=1e-3)
    descending = sorted(sp.exponents, reverse=True)
    for i in range(1, 4):
        ext = exterior_sums(f, POINT, T, 1e-3, i)
        assert abs(ext - sum(descending[:i])) < 5.0 / T


def test_sum_rule_against_symbolic_trace():
    f = random_field(2, 1, amplitude=0.8, seed=23)
    T = 50.0
    sp = lyapunov_spectrum(f, POINT, T, dt=1e-3)
    mean_tr = np.real(np.trace(line_integral(f, POINT, T))) / T
    assert abs(sum(sp.exponents) + mean_tr) < 5.0 / T


def test_essential_bounds_decoupled_field():
    f = diag_one_plus_cos_two()
    T = 60.0
    eb = essential_bounds(f, T=T, m=12, dt=2e-3, seed=5)
    assert eb.lambda_minus == pytest.approx(-2.0, abs=2.0 / T)
    assert eb.lambda_plus == pytest.approx(-1.0, abs=2.0 / T)
    assert eb.diagnostics["rank_ok"]


def test_essential_bounds_constant_and_zero():
    eb = essential_bounds(DampingField.constant(0.5 * np.eye(2)), T=10.0, m=10, dt=1e-3, seed=1)
    assert eb.lambda_minus == pytest.approx(-0.5, abs=1e-9)
    assert eb.lambda_plus == pytest.approx(-0.5, abs=1e-9)
    eb0 = essential_bounds(DampingField.zero(2, 1), T=5.0, m=10, dt=1e-2, seed=1)
    assert eb0.lambda_minus == pytest.approx(0.0, abs=1e-12)
    assert eb0.lambda_plus == pytest.approx(0.0, abs=1e-12)


def test_essential_bounds_needs_enough_samples():
    with pytest.raises(ValueError):
        essential_bounds(one_plus_cos(), T=5.0, m=5)


def test_ordering_chain_finite_horizon():
    T = 50.0
    for seed in (1, 2):
        f = random_field(2, 1, amplitude=0.7, seed=40 + seed)
        est = band_estimates(f, T=T, m=12, dt=2e-3, seed=seed)
        slack = 3.0 / T
        assert est.c_minus <= -est.lambda_plus + slack
        assert -est.lambda_minus <= est.c_plus + slack


def test_norm_independence_of_bounds():
    f = random_field(2, 1, amplitude=0.8, seed=31)
    T = 40.0
    pts = sample_shell(8, 0.5, seed=9)
    spec = finite_time_bounds_at(f, T, pts, dt=2e-3, norm="spectral")
    frob = finite_time_bounds_at(f, T, pts, dt=2e-3, norm="frobenius")
    bound = 2.0 * math.log(2.0) / T
    assert abs(spec.c_minus - frob.c_minus) < bound
    assert abs(spec.c_plus - frob.c_plus) < bound


def test_band_report_fragment_keys():
    est = band_estimates(one_plus_cos(), T=10.0, m=4, dt=2e-3, seed=0)
    doc = est.to_report()
    assert set(doc) >= {"T", "m", "c_minus", "c_plus", "lambda_minus", "lambda_plus", "diagnostics"}
