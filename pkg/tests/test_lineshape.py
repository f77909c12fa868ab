import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from eetsim import UNITS, AdolphsRenger, ConfigError, Drude, NumericalError
from eetsim.eigen import Eigensystem, overlap_products
from eetsim.lineshape import (PhiBase, check_pole_guard, coupling_sums, decoherence_factor,
                              dephasing_table, lorentz_tail_integrals, matsubara_sum, phi_base,
                              phi_base_drude, phi_base_numeric)

import oracles

# scalar QUADPACK quadrature with a Fourier-weighted tail (oracles.dephasing_integrals);
# lambda = 35 cm^-1, 1/omega_c = 50 fs
DRUDE_ORACLE = {
    (77, 10): (0.013111559793695408, -0.0061743873000824935),
    (77, 100): (0.45084440993060115, -0.3742508214826271),
    (77, 1000): (6.40313469603508, -6.263141570679436),
    (300, 10): (0.027796444275460613, -0.006174387274023309),
    (300, 100): (1.4925402623491069, -0.3742508214908902),
    (300, 1000): (24.625610154618965, -6.263141570679436),
}
# Adolphs-Renger defaults, 77 K, t = 200 fs; oracle run at epsrel 1e-11 and 1e-12
AR_ORACLE_200 = (1.0227023914122817, -2.7074402533541875)
# FMO pair (1, 2), C = I, built from the oracle base and oracle eigenvectors
PHI12_77K_500 = 2.134130091283872 - 0.8936251402993609j
FACTOR12_300K_200 = 0.016016980466087984 - 0.06351995172364062j


@pytest.fixture(scope="module")
def drude():
    return Drude.from_cutoff_time(35.0, 50.0)


def test_zero_time(drude):
    for base in (phi_base(drude, 77, [0.0]), phi_base_numeric(AdolphsRenger(), 77, [0.0])):
        assert base.re0[0] == 0.0 and base.im0[0] == 0.0


@pytest.mark.parametrize("temperature, t", sorted(DRUDE_ORACLE))
def test_drude_closed_form_against_quadrature_oracle(drude, temperature, t):
    base = phi_base(drude, temperature, [t])
    re, im = DRUDE_ORACLE[(temperature, t)]
    assert base.re0[0] == pytest.approx(re, rel=1e-6)
    assert base.im0[0] == pytest.approx(im, rel=1e-6)


def test_drude_oracle_recomputed(drude):
    re, im = oracles.dephasing_integrals(oracles.drude(35.0, drude.cutoff), 77, 100,
                                         points=(drude.cutoff, 10 * drude.cutoff))
    assert (re, im) == pytest.approx(DRUDE_ORACLE[(77, 100)], rel=1e-9)


@pytest.mark.parametrize("temperature", [77, 300])
def test_numeric_path_matches_closed_form(drude, temperature):
    t = [10.0, 100.0, 1000.0]
    a = phi_base_drude(drude.reorganization, drude.cutoff, temperature, t)
    b = phi_base_numeric(drude, temperature, t)
    assert np.allclose(b.re0, a.re0, rtol=1e-6, atol=0)
    assert np.allclose(b.im0, a.im0, rtol=1e-6, atol=0)


def test_imaginary_part_is_temperature_independent(drude):
    t = np.linspace(0, 500, 11)
    assert np.array_equal(phi_base(drude, 77, t).im0, phi_base(drude, 300, t).im0)


def test_large_time_slope_is_constant(drude):
    base = phi_base(drude, 77, [4999.0, 5001.0, 9999.0, 10001.0])
    s1 = (base.re0[1] - base.re0[0]) / 2
    s2 = (base.re0[3] - base.re0[2]) / 2
    assert s1 == pytest.approx(s2, rel=1e-6)
    # oracle slope from the quadrature at the same points
    assert s2 == pytest.approx(0.006646093865370517, rel=1e-6)


def test_matsubara_tail_tolerance_is_converged(drude):
    t = [1.0, 50.0, 700.0]
    a = phi_base_drude(35.0, drude.cutoff, 77, t, tail_tol=1e-12)
    b = phi_base_drude(35.0, drude.cutoff, 77, t, tail_tol=2e-12)
    assert np.allclose(a.re0, b.re0, rtol=1e-10, atol=0)


def test_matsubara_sum_against_brute_force():
    nu1, wc, t = 0.3, 0.05, 40.0
    k = np.arange(1, 2_000_001, dtype=float)
    nu = k * nu1
    terms = (np.exp(-nu * t) + nu * t - 1) / (nu * (nu * nu - wc * wc))
    # brute-force partial sum plus the asymptotic remainder t / nu1^2 / K
    brute = terms.sum() + t / (nu1**2 * k[-1])
    val, _ = matsubara_sum([t], nu1, wc)
    assert val[0] == pytest.approx(brute, rel=1e-10)


def test_matsubara_cap_raises():
    with pytest.raises(NumericalError) as info:
        matsubara_sum([1e-4], 0.3, 0.05, max_terms=16)
    assert info.value.achieved is not None


def test_pole_guard_names_index(drude):
    n = 2
    temperature = UNITS.c2 * drude.cutoff / (2 * np.pi * n)
    with pytest.raises(ConfigError, match="n = 2"):
        check_pole_guard(drude.cutoff, temperature)
    with pytest.raises(ConfigError):
        phi_base(drude, temperature, [10.0])
    check_pole_guard(drude.cutoff, temperature * 1.001)


def test_adolphs_renger_against_oracle():
    base = phi_base_numeric(AdolphsRenger(), 77, [200.0])
    assert base.re0[0] == pytest.approx(AR_ORACLE_200[0], rel=1e-6)
    assert base.im0[0] == pytest.approx(AR_ORACLE_200[1], rel=1e-6)


def test_adolphs_renger_two_tolerances():
    t = np.linspace(0, 1000, 101)
    a = phi_base_numeric(AdolphsRenger(), 77, t, epsrel=1e-8)
    b = phi_base_numeric(AdolphsRenger(), 77, t, epsrel=1e-9)
    assert np.allclose(a.re0[1:], b.re0[1:], rtol=1e-6, atol=0)
    assert np.allclose(a.im0[1:], b.im0[1:], rtol=1e-6, atol=0)


def test_infrared_divergent_density_rejected():
    with pytest.raises(NumericalError):
        phi_base(AdolphsRenger(discrete_mode="plain-lorentz"), 77, [10.0])


TAIL = (12.6, 180 + 1j, 5000.0)


def _tail_g(w):
    amp, p, _ = TAIL
    return amp / (w * ((w - p.real) ** 2 + p.imag**2))


@pytest.mark.parametrize("t_fs", [20.0, 300.0])
def test_lorentz_tail_against_fourier_quadrature(t_fs):
    amp, p, w0 = TAIL
    tau = UNITS.two_pi_c * t_fs
    flat = integrate.quad(_tail_g, w0, np.inf, epsabs=0, epsrel=1e-13)[0]
    lin = integrate.quad(lambda w: w * _tail_g(w), w0, np.inf, epsabs=0, epsrel=1e-13)[0]
    c = integrate.quad(_tail_g, w0, np.inf, weight="cos", wvar=tau)[0]
    s = integrate.quad(_tail_g, w0, np.inf, weight="sin", wvar=tau)[0]
    re, im = lorentz_tail_integrals(amp, p, w0, [tau])
    assert re[0] == pytest.approx(flat - c, rel=1e-6)
    assert im[0] == pytest.approx(s - tau * lin, rel=1e-6)


@pytest.mark.parametrize("t_fs", [0.5, 20.0, 2000.0, 20000.0])
def test_lorentz_tail_against_extended_precision(t_fs):
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    amp, p, w0 = TAIL
    tau = mp.mpf(UNITS.two_pi_c) * t_fs
    P = mp.mpc(p.real, p.imag)
    Pc = mp.conj(P)
    a0, a1 = 1 / (P * Pc), 1 / (P * (P - Pc))

    def osc(q):
        return mp.exp(1j * q * tau) * mp.e1(-1j * tau * (w0 - q))

    e = a0 * osc(0) + a1 * osc(P) + mp.conj(a1) * osc(Pc)
    flat = mp.quad(lambda w: amp / (w * ((w - P.real) ** 2 + P.imag**2)), [w0, mp.inf])
    lin = mp.quad(lambda w: amp / ((w - P.real) ** 2 + P.imag**2), [w0, mp.inf])
    re, im = lorentz_tail_integrals(amp, p, w0, [float(tau)])
    assert re[0] == pytest.approx(float(flat - amp * mp.re(e)), rel=1e-9)
    assert im[0] == pytest.approx(float(amp * mp.im(e) - tau * lin), rel=1e-9)


def _dimer_eig(theta):
    c, s = np.cos(theta), np.sin(theta)
    return Eigensystem(np.array([-1.0, 1.0]), np.array([[c, -s], [s, c]]))


def test_identical_gradients_give_no_dephasing():
    eig = _dimer_eig(np.pi / 4)
    grads = overlap_products(eig)
    base = PhiBase(np.array([0.0, 1.0]), np.array([0.0, 2.0]), np.array([0.0, -1.0]))
    table = dephasing_table(base, grads, np.eye(2), eig)
    assert np.allclose(table.phi, 0.0)


def test_fmo_pair_values(fmo_eig, fmo_overlap, drude):
    t = np.array([0.0, 500.0])
    table = dephasing_table(phi_base(drude, 77, t), fmo_overlap, np.eye(7), fmo_eig)
    assert table.phi[0, 1, 1] == pytest.approx(PHI12_77K_500, rel=1e-6)
    assert np.allclose(table.phi[np.arange(7), np.arange(7)], 0.0)
    assert np.allclose(table.phi[:, :, 0], 0.0)
    assert np.allclose(table.phi[1, 0, 1], np.conj(table.phi[0, 1, 1]))

    t = np.array([0.0, 200.0])
    table = dephasing_table(phi_base(drude, 300, t), fmo_overlap, np.eye(7), fmo_eig)
    assert decoherence_factor(table, 0, 1, 200.0) == pytest.approx(FACTOR12_300K_200, rel=1e-6)
    assert decoherence_factor(table, 0, 1, 0.0) == 1.0
    assert decoherence_factor(table, 3, 3, 200.0) == 1.0
    with pytest.raises(ValueError):
        decoherence_factor(table, 0, 1, 123.0)


def test_coupling_sums_with_identity(fmo_overlap):
    re, im = coupling_sums(fmo_overlap, np.eye(7))
    d = fmo_overlap.d
    assert re[2, 5] == pytest.approx(np.sum((d[2] - d[5]) ** 2))
    assert im[2, 5] == pytest.approx(np.sum(d[2] ** 2) - np.sum(d[5] ** 2))


@st.composite
def correlations(draw):
    n = 7
    a = np.array(draw(st.lists(st.floats(-1, 1), min_size=n * n, max_size=n * n))).reshape(n, n)
    c = a @ a.T + 1e-3 * np.eye(n)
    d = np.sqrt(np.diag(c))
    return c / np.outer(d, d)


@settings(max_examples=30, deadline=None)
@given(correlations(), st.sampled_from([77.0, 150.0, 300.0]))
def test_decoherence_factor_bounded(fmo_eig, fmo_overlap, c, temperature):
    drude = Drude.from_cutoff_time(35.0, 50.0)
    t = np.linspace(0, 1000, 21)
    table = dephasing_table(phi_base(drude, temperature, t), fmo_overlap, c, fmo_eig)
    assert np.all(table.phi.real >= -1e-12)
    assert np.all(np.abs(np.exp(-table.phi)) <= 1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(5.0, 100.0), st.floats(20.0, 500.0), st.floats(30.0, 400.0))
def test_closed_form_matches_quadrature_random_baths(lam, wc, temperature):
    x = UNITS.dimensionless_thermal(wc, temperature) / (2 * np.pi)
    if abs(x - round(x)) < 1e-4:
        return
    t = np.array([5.0, 80.0, 600.0])
    a = phi_base_drude(lam, wc, temperature, t)
    b = phi_base_numeric(Drude(lam, wc), temperature, t)
    assert np.allclose(a.re0, b.re0, rtol=1e-7, atol=0)
    assert np.allclose(a.im0, b.im0, rtol=1e-7, atol=0)
