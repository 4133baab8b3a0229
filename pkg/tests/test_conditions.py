import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adiaphase.conditions import (
    model_traditional_report,
    modified_report,
    psi1_fullpeeled,
    psi2_fullpeeled,
    residual_envelope,
    residual_integrand,
    residual_trace,
    resolve_prefactor,
    traditional_report,
)
from adiaphase.errors import ParameterError, UndersampledError, UnsupportedModelError
from adiaphase.hamiltonian import REFERENCE_PARAMS, RotatingFieldParams, derived_frequencies, linear_trajectory, oracle_coefficients
from adiaphase.spectral import track_frames

F = derived_frequencies(REFERENCE_PARAMS)
FAST = 2 * math.pi / F.omega_bar


def test_traditional_reference(ref_params):
    rep = model_traditional_report(ref_params)
    (pair,) = rep.pairs
    assert pair.coupling_mag == pytest.approx(2.5e-3, rel=1e-12)
    assert pair.gap == pytest.approx(10.0)
    assert pair.ratio == pytest.approx(2.5e-4, rel=1e-12)
    assert rep.traditional_satisfied and rep.max_ratio == pair.ratio


def test_traditional_violated():
    # omega0 = omega sin(theta)
    rep = model_traditional_report(RotatingFieldParams(0.01, 0.01, math.pi / 2))
    assert rep.max_ratio == pytest.approx(0.5) and not rep.traditional_satisfied
    rep = model_traditional_report(RotatingFieldParams(0.005, 0.01, math.pi / 2))
    assert rep.max_ratio == pytest.approx(1.0) and not rep.traditional_satisfied


def test_traditional_static():
    rep = model_traditional_report(RotatingFieldParams(10, 0.01, 0.0))
    assert rep.max_ratio == 0 and rep.traditional_satisfied
    rep = model_traditional_report(RotatingFieldParams(10, 0.0, 0.5))
    assert rep.traditional_satisfied


def test_traditional_general_trajectory(rng):
    A = np.diag([-1.0, 0.0, 2.0])
    B = 0.001 * np.ones((3, 3))
    frames = track_frames(linear_trajectory(A, B), np.linspace(0, 1, 11))
    rep = traditional_report(frames, linear_trajectory(A, B))
    assert len(rep.pairs) == 3 and rep.traditional_satisfied
    for pr in rep.pairs:
        assert pr.ratio == pytest.approx(pr.coupling_mag / pr.gap)


def test_threshold_validation(ref_params):
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ParameterError):
            model_traditional_report(ref_params, bad)


def test_modified_reference(ref_params):
    rep = modified_report(ref_params)
    assert rep.modified_coupling == pytest.approx(5e-3)
    assert rep.modified_oscillation_rate == pytest.approx(10.00866025, abs=1e-8)
    assert rep.modified_satisfied and rep.traditional_satisfied
    assert rep.modified_coupling / rep.modified_oscillation_rate == pytest.approx(5e-4, rel=2e-3)


def test_modified_limits():
    rep = modified_report(RotatingFieldParams(1e-9, 0.01, math.pi / 2))
    assert not rep.modified_satisfied
    rep = modified_report(RotatingFieldParams(0.5, 3.0, 0.0))
    assert rep.modified_satisfied and rep.modified_coupling == 0


def test_modified_requires_model():
    with pytest.raises(UnsupportedModelError):
        modified_report(object())


@given(
    st.floats(0.01, 5), st.floats(0.001, 2), st.floats(0.0, math.pi), st.floats(1.0, 10.0)
)
def test_reports_monotone_in_omega0(w0, w, th, factor):
    lo = modified_report(RotatingFieldParams(w0, w, th))
    hi = modified_report(RotatingFieldParams(w0 * factor, w, th))
    if lo.traditional_satisfied:
        assert hi.traditional_satisfied
    if lo.modified_satisfied:
        assert hi.modified_satisfied


def test_psi2_examples(ref_params):
    assert psi2_fullpeeled(ref_params, 0.0) == 0
    t = np.linspace(0, 1e5, 1001)
    np.testing.assert_allclose(np.abs(psi2_fullpeeled(ref_params, t)), np.abs(oracle_coefficients(ref_params, t).b), atol=1e-16)


def test_integrand_magnitude(ref_params):
    t = np.linspace(0, 50 * FAST, 3201)
    X = residual_integrand(ref_params, t)
    amp = (ref_params.omega * math.sin(ref_params.theta)) ** 2 / (2 * F.omega_bar)
    np.testing.assert_allclose(np.abs(X), amp * np.abs(np.sin(0.5 * F.omega_bar * t)), atol=1e-10, rtol=0)


@pytest.mark.parametrize("params", [REFERENCE_PARAMS, RotatingFieldParams(10, 1.0, 0.8)])
def test_residual_identity(params):
    f = derived_frequencies(params)
    fast = 2 * math.pi / f.omega_bar
    grid = np.linspace(0, 50 * fast, 50 * 64 + 1)
    tr = residual_trace(params, grid)
    assert tr.cumulative[0] == 0 and tr.comparator_derived[0] == 0
    assert tr.comparator_paper_re[0] == 0 and tr.comparator_paper_im[0] == 0
    np.testing.assert_allclose(tr.cumulative, tr.identity, atol=1e-6)


def test_residual_matches_derived_comparator(ref_params):
    grid = np.linspace(0, 50 * FAST, 3201)
    tr = residual_trace(ref_params, grid)
    assert np.max(np.abs(tr.cumulative - tr.comparator_derived)) <= 1e-6
    pref = resolve_prefactor(tr)
    assert pref["derived"].real == pytest.approx(1.0, abs=1e-3)
    assert pref["doubled"].real == pytest.approx(-0.5, abs=1e-3)


def test_residual_undersampled(ref_params):
    with pytest.raises(UndersampledError):
        residual_trace(ref_params, np.linspace(0, 50 * FAST, 50 * 10 + 1))


def test_envelope_does_not_decay(ref_params):
    t_peak = math.pi / F.detuning
    assert t_peak == pytest.approx(2.515451e6, rel=1e-6)
    assert residual_envelope(ref_params, t_peak) == pytest.approx(math.sqrt(2), abs=1e-3)
    assert residual_envelope(ref_params, 2 * t_peak) == pytest.approx(2.0, abs=1e-3)
    t = np.linspace(0, 5000 * F.t0, 200001)
    env = residual_envelope(ref_params, t)
    assert np.max(env) >= 0.5
    assert np.max(env) <= 2 + 2e-3


def test_envelope_periodicity(ref_params):
    t = np.linspace(0, 1e6, 10001)
    period = 4 * math.pi / F.detuning
    d = (1 - psi1_fullpeeled(ref_params, t + period)) - (1 - psi1_fullpeeled(ref_params, t))
    assert np.max(np.abs(d)) <= 1e-6
