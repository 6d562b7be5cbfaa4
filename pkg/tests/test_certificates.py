import math

import numpy as np
import pytest

from nstorus import (
    SolverParams,
    SpectralField,
    TimeSlicedField,
    check_gaussian_envelope,
    contraction_coefficients,
    fit_gaussian_bound,
    fit_remainder_bound,
    phi_envelope,
    unit_times,
)
from nstorus.induction import iterate_contraction
from nstorus.operators import sliced_fmc_norm
from util import random_field, random_sliced

PARAMS = SolverParams()


def unit_perp_directions(lat):
    dirs = np.zeros((len(lat), 3))
    for i, (kx, ky, kz) in enumerate(lat.sites.tolist()):
        perp = np.array([-ky, kx, 0.0]) if (kx, ky) != (0, 0) else np.array([1.0, 0.0, 0.0])
        dirs[i] = perp / np.linalg.norm(perp)
    return dirs


def planted_gaussian_entry(lat, j, params, constant=1.0):
    """|h_j(k)| = constant * delta^2 exp(-j|k|^2/2) / |k|^(2 eps) exactly."""
    q = lat.norm_sq_f
    mags = constant * params.delta ** 2 * np.exp(-0.5 * j * q) / q ** params.epsilon
    return SpectralField(lat, unit_perp_directions(lat) * mags[:, None])


def planted_remainder_entry(lat, j, params, constant=1.0, rate=None):
    rate = params.decay_c if rate is None else rate
    q = lat.norm_sq_f
    mags = (constant * params.delta ** 2
            * np.exp(-rate * math.sqrt(j) * np.sqrt(q)) / q ** (params.beta / 2.0))
    return SpectralField(lat, unit_perp_directions(lat) * mags[:, None])


# -- gaussian-family bound ------------------------------------------------------

def test_gaussian_fit_zero_history(ball2):
    out = fit_gaussian_bound([SpectralField.zero(ball2)] * 3, PARAMS)
    assert (out == 0.0).all()


def test_gaussian_fit_recovers_planted_constant(ball2):
    hist = [planted_gaussian_entry(ball2, j, PARAMS) for j in (1, 2, 3)]
    out = fit_gaussian_bound(hist, PARAMS)
    assert np.allclose(out, 1.0, rtol=1e-12)


def test_gaussian_fit_scale_covariant(ball2):
    hist = [planted_gaussian_entry(ball2, 1, PARAMS)]
    base = fit_gaussian_bound(hist, PARAMS)[0]
    scaled = fit_gaussian_bound([hist[0] * 7.5], PARAMS)[0]
    assert scaled == pytest.approx(7.5 * base, rel=1e-12)


def test_gaussian_fit_survives_extreme_ages(ball2):
    # weights exp(+j|k|^2/2) overflow in linear arithmetic long before age 400
    age = 400
    hist = [SpectralField.zero(ball2)] * (age - 1)
    hist.append(planted_gaussian_entry(ball2, age, PARAMS, constant=2.0))
    out = fit_gaussian_bound(hist, PARAMS)
    assert (out[:-1] == 0.0).all()
    assert out[-1] == pytest.approx(2.0, rel=1e-9)


# -- remainder-family bound -----------------------------------------------------

def test_remainder_fit_zero_history(ball2):
    d, rate = fit_remainder_bound([SpectralField.zero(ball2)] * 2, PARAMS)
    assert (d == 0.0).all()
    assert np.isnan(rate).all()


def test_remainder_fit_recovers_planted_constant_and_rate(ball2):
    hist = [planted_remainder_entry(ball2, j, PARAMS) for j in (1, 2)]
    d, rate = fit_remainder_bound(hist, PARAMS)
    assert np.allclose(d, 1.0, rtol=1e-12)
    assert np.allclose(rate, PARAMS.decay_c, rtol=1e-6)


def test_remainder_fit_recovers_other_rates(ball2):
    hist = [SpectralField.zero(ball2), SpectralField.zero(ball2),
            planted_remainder_entry(ball2, 3, PARAMS, constant=0.5, rate=0.9)]
    d, rate = fit_remainder_bound(hist, PARAMS)
    assert rate[2] == pytest.approx(0.9, rel=1e-6)
    assert np.isnan(rate[:2]).all()


def test_remainder_fit_skipped_for_sparse_support(ball2):
    f = SpectralField.from_modes(ball2, {(1, 0, 0): (0.0, 1e-9, 0.0),
                                         (0, 1, 0): (1e-9, 0.0, 0.0)})
    d, rate = fit_remainder_bound([f], PARAMS)
    assert d[0] > 0
    assert np.isnan(rate[0])


def test_remainder_fit_scale_covariant(ball2):
    hist = [planted_remainder_entry(ball2, 2, PARAMS)]
    base = fit_remainder_bound(hist, PARAMS)[0][0]
    scaled = fit_remainder_bound([hist[0] * 3.0], PARAMS)[0][0]
    assert scaled == pytest.approx(3.0 * base, rel=1e-12)


# -- assembled gaussian-part envelope ----------------------------------------------

def test_envelope_zero_part(ball2):
    part = TimeSlicedField.zero(ball2, unit_times(4))
    assert check_gaussian_envelope(part, 0, PARAMS) == 0.0


def test_envelope_recovers_planted_constant(ball2):
    m = 2
    times = unit_times(4)
    q = ball2.norm_sq_f
    dirs = unit_perp_directions(ball2)
    slices = []
    for t in times:
        mags = (PARAMS.delta ** 2 / q ** PARAMS.epsilon
                * -np.expm1(-0.5 * t * q) / q * np.exp(-0.5 * (m + 1) * q))
        slices.append(SpectralField(ball2, dirs * mags[:, None]))
    part = TimeSlicedField(times, tuple(slices))
    assert check_gaussian_envelope(part, m, PARAMS) == pytest.approx(1.0, rel=1e-12)


def test_envelope_ignores_degenerate_initial_slice(ball2):
    # a nonzero t = 0 slice (history terms) must not blow the fit up
    times = unit_times(4)
    h = random_field(ball2, np.random.default_rng(0), scale=1e-8)
    slices = [h] + [SpectralField.zero(ball2)] * 4
    part = TimeSlicedField(times, tuple(slices))
    assert check_gaussian_envelope(part, 0, PARAMS) == 0.0


# -- contraction coefficients -------------------------------------------------------

def norm_fn(x):
    return sliced_fmc_norm(x, 1, PARAMS.decay_c, PARAMS.beta)


def test_contraction_zero_data(ball2):
    zero = TimeSlicedField.zero(ball2, unit_times(2))
    fp = iterate_contraction(zero, lambda g: g * 0.0, lambda g: g * 0.0,
                             norm_fn, tol=1e-12, max_iter=5)
    est = contraction_coefficients(fp)
    assert est.c1 == 0.0 and est.c2 == 0.0
    assert math.isnan(est.c3)
    assert est.satisfied


def test_contraction_measures_synthetic_linear_gain(ball2):
    forcing = random_sliced(ball2, unit_times(2), np.random.default_rng(3), scale=1e-4)
    fp = iterate_contraction(forcing, lambda g: g * 0.3, lambda g: g * 0.0,
                             norm_fn, tol=1e-14, max_iter=80)
    est = contraction_coefficients(fp)
    assert est.c2 == pytest.approx(0.3, abs=1e-10)
    assert est.satisfied


def test_contraction_measures_quadratic_gain(ball2):
    forcing = random_sliced(ball2, unit_times(2), np.random.default_rng(4), scale=1e-5)

    def quad(g):
        return g * (norm_fn(g) * 0.25)  # |quad(g)| = 0.25 |g|^2

    fp = iterate_contraction(forcing, lambda g: g * 0.0, quad,
                             norm_fn, tol=1e-16, max_iter=80)
    est = contraction_coefficients(fp)
    assert est.c3 == pytest.approx(0.25, rel=1e-8)


# -- data-norm envelope ---------------------------------------------------------------

def test_phi_envelope_zero_series(ball2):
    series, exceeded = phi_envelope(
        [(0.0, SpectralField.zero(ball2)), (1.0, SpectralField.zero(ball2))], PARAMS)
    assert series == [(0.0, 0.0), (1.0, 0.0)]
    assert not exceeded


def test_phi_envelope_single_mode_decay(ball2):
    delta = PARAMS.delta
    fields = [(t, SpectralField.from_modes(
        ball2, {(1, 0, 0): (0.0, delta * math.exp(-t), 0.0)})) for t in (0.0, 0.5, 1.0)]
    series, exceeded = phi_envelope(fields, PARAMS)
    assert not exceeded
    values = [v for _, v in series]
    assert values == sorted(values, reverse=True)
    assert values[0] == pytest.approx(delta, rel=1e-15)


def test_phi_envelope_flags_excess(ball2):
    big = SpectralField.from_modes(ball2, {(1, 0, 0): (0.0, 3 * PARAMS.delta, 0.0)})
    _, exceeded = phi_envelope([(0.0, big)], PARAMS)
    assert exceeded
