import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from qftverify.errors import BelowThreshold, CoincidentMomenta, NotCenterOfMomentum
from qftverify.fields import electron_polarization, transverse_polarization
from qftverify.kinematics import minkowski_dot, on_shell
from qftverify.scattering import ScatterKinematics, compton_momenta
from qftverify.xsection import (
    CrossSectionInput,
    boost_to_cm,
    cancelled_prefactor,
    compton_dsigma,
    delta_square_factor,
    dsigma_domega,
    factored_prefactor,
    flux_velocity,
    flux_volume,
    idempotence_coefficient,
    is_center_of_momentum,
    klein_nishina_dsigma,
    projection_measure,
    rho_out,
    state_norm_sq,
    thomson_shape,
    two_point_overlap,
    vacuum_overlap,
)

from .oracles import klein_nishina_total


def test_normalized_state_norm():
    L = 3.0
    k = np.array([0.5, 0.0, 0.0, 0.5])
    p = on_shell(1.0, [0.1, 0.2, -0.5])
    ph = transverse_polarization(k, 1 / np.sqrt(2), 1j / np.sqrt(2))
    el = electron_polarization(p, 1.0, 2)
    got = state_norm_sq(k, p, L, ph.w, el.w)
    assert got == pytest.approx((L**2 / (2 * np.pi)) ** 3, rel=1e-10)


def test_state_norm_scales_with_polarization():
    p = on_shell(1.0, [0.1, 0.2, -0.5])
    q = on_shell(1.0, [0.0, 0.0, 0.3])
    w = electron_polarization(p, 1.0, 1).w
    assert state_norm_sq(p, q, 2.0, 2 * w) == pytest.approx(4 * state_norm_sq(p, q, 2.0), rel=1e-10)


def test_coincident_momenta_rejected():
    p = on_shell(1.0, [0.1, 0.2, 0.3])
    with pytest.raises(CoincidentMomenta):
        state_norm_sq(p, p, 1.0)


def test_two_point_overlap():
    L = 2.0
    p = on_shell(1.0, [0.1, 0.2, 0.3])
    w = electron_polarization(p, 1.0, 1).w
    peak = (L / np.sqrt(2 * np.pi)) ** 3
    assert two_point_overlap(p, p, L, w, w) == pytest.approx(peak, rel=1e-10)
    q = on_shell(1.0, [0.4, 0.2, 0.3])
    assert abs(two_point_overlap(p, q, L)) == pytest.approx(peak * np.exp(-(L**2) * 0.09 / 2))
    # orthogonal spin states do not overlap
    w2 = electron_polarization(p, 1.0, 2).w
    assert abs(two_point_overlap(p, p, L, w, w2)) < 1e-12


def test_vacuum_overlap_vanishes():
    assert vacuum_overlap(np.zeros(4), np.zeros(4)) == 0


def test_flux_velocity_cases():
    electron = np.array([1.0, 0, 0, 0])
    assert flux_velocity(np.array([2.0, 0, 0, 2.0]), electron) == pytest.approx(1.0)
    assert flux_velocity(electron, np.array([3.0, 0, 0, 0])) == 0


@given(st.floats(0.01, 5), st.floats(0.1, 3), st.floats(0.1, 3))
def test_flux_velocity_center_of_momentum(k, m1, m2):
    p3 = on_shell(m1, [0, 0, k])
    p4 = on_shell(m2, [0, 0, -k])
    # in the CM frame the invariant flux is |k| W / (E1 E2), the relative velocity
    assert flux_velocity(p3, p4) == pytest.approx(k / p3[0] + k / p4[0], rel=1e-10)


def brute_rho(W, m1, m2):
    return brentq(lambda r: np.hypot(r, m1) + np.hypot(r, m2) - W, 0, W, xtol=1e-15, rtol=1e-15)


@given(st.floats(0.0, 3), st.floats(0.0, 3), st.floats(0.01, 5))
def test_rho_out_matches_root(m1, m2, excess):
    W = m1 + m2 + excess
    assert rho_out(W / 2, W / 2, m1, m2) == pytest.approx(brute_rho(W, m1, m2), rel=1e-10)


def test_rho_out_special_cases():
    E = 1.3
    assert rho_out(E, E, 1.0, 1.0) == pytest.approx(np.sqrt(E**2 - 1))
    assert rho_out(1.0, 1.0, 1.0, 0.0) == pytest.approx(0.75)
    assert rho_out(1.0, 1.0, 1.0, 1.0) == 0
    with pytest.raises(BelowThreshold):
        rho_out(0.5, 0.5, 1.0, 1.0)


def test_projection_measure_and_idempotence():
    for L in (0.5, 1.0, 7.0):
        assert projection_measure(L) == pytest.approx((L / np.sqrt(2 * np.pi)) ** 3)
        assert idempotence_coefficient(L) == pytest.approx(1.0, rel=1e-14)
        assert flux_volume(L) == pytest.approx((2 * L * np.sqrt(np.pi)) ** 3)
    with pytest.raises(ValueError):
        projection_measure(0.0)


@given(st.floats(0.1, 20), st.floats(0.1, 20), st.floats(0.1, 1.0))
def test_prefactor_cancellation(L, T, u):
    assert factored_prefactor(L, T, u) == pytest.approx(cancelled_prefactor(L, u), rel=1e-13)
    assert cancelled_prefactor(L, u) == pytest.approx((2 * np.pi) ** 4 / u, rel=1e-13)


def test_delta_square_factor_value():
    L, T = 2.0, 5.0
    assert delta_square_factor(L, T) == pytest.approx(T / (2 * np.pi) * (L / (2 * np.sqrt(np.pi))) ** 3)


def test_constant_amplitude_gives_isotropic_cross_section():
    vals = []
    for th in np.linspace(0.1, 3.0, 6):
        kin = ScatterKinematics(*compton_momenta(0.4, th, 1.0), mass=1.0)
        vals.append(dsigma_domega(CrossSectionInput(1.0, kin, masses=(0.0, 1.0, 0.0, 1.0))))
    assert np.allclose(vals, vals[0], rtol=1e-12)


def test_dsigma_requires_center_of_momentum():
    p1, p2, p3, p4 = compton_momenta(0.4, 1.0, 1.0)
    shift = np.array([0.0, 0.0, 0.0, 0.3])
    lab = ScatterKinematics(p1, p2, p3, p4, mass=1.0)
    boosted = boost_to_cm(ScatterKinematics(p1, p2 + shift, p3, p4 + shift, mass=1.0))
    assert is_center_of_momentum(lab) and is_center_of_momentum(boosted)
    with pytest.raises(NotCenterOfMomentum):
        dsigma_domega(CrossSectionInput(1.0, ScatterKinematics(p1, p2 + shift, p3, p4 + shift, mass=1.0)))


def test_boost_to_cm_preserves_invariants():
    p3 = on_shell(0.0, [0.0, 0.0, 1.0])
    p4 = on_shell(1.0, [0.0, 0.0, 0.0])
    kin = ScatterKinematics(p3, p4, p3, p4, mass=1.0)
    cm = boost_to_cm(kin)
    s = minkowski_dot(p3 + p4, p3 + p4)
    q3, q4 = cm.momenta[2], cm.momenta[3]
    assert minkowski_dot(q3 + q4, q3 + q4) == pytest.approx(s)
    assert np.allclose((q3 + q4)[1:], 0, atol=1e-14)


@pytest.mark.parametrize("rho", [1e-3, 0.1, 1.0, 5.0])
@pytest.mark.parametrize("theta", [0.0, 0.7, 2.0, np.pi])
def test_compton_matches_klein_nishina(rho, theta):
    assert compton_dsigma(rho, theta) == pytest.approx(klein_nishina_dsigma(rho, theta), rel=1e-10)


@given(st.floats(0.0, 2 * np.pi))
def test_compton_azimuthal_symmetry(phi):
    from qftverify.scattering import spin_averaged_abs2

    ref = spin_averaged_abs2(0.3, 1.1, 1.0)
    assert spin_averaged_abs2(0.3, 1.1, 1.0, phi=phi) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("rho", [0.01, 0.5, 3.0])
def test_total_cross_section_matches_closed_form(rho):
    # rho is the photon energy in the electron rest frame; the total is frame independent
    total = quad(lambda th: 2 * np.pi * np.sin(th) * compton_dsigma(rho, th), 0, np.pi, epsrel=1e-11)[0]
    assert total == pytest.approx(klein_nishina_total(rho, 1.0, 1.0), rel=1e-8)


def test_thomson_total_at_low_energy():
    e = 0.3
    r_e = e**2 / (4 * np.pi)
    total = quad(lambda th: 2 * np.pi * np.sin(th) * compton_dsigma(1e-5, th, e=e), 0, np.pi, epsrel=1e-11)[0]
    assert total == pytest.approx(8 * np.pi / 3 * r_e**2, rel=1e-4)


def test_thomson_shape_at_low_energy():
    th = np.linspace(0, np.pi, 13)
    ds = np.array([compton_dsigma(1e-4, t) for t in th])
    shape = ds / ds[0]
    assert np.max(np.abs(shape / thomson_shape(th) - 1)) < 5e-3
    assert thomson_shape(np.pi / 2) == 0.5


def test_constructed_variant_deviation_grows_with_energy():
    devs = [abs(compton_dsigma(r, np.pi, variant="constructed") / compton_dsigma(r, np.pi) - 1) for r in (1e-3, 1e-2, 0.1, 1.0)]
    assert all(a < b for a, b in zip(devs, devs[1:]))
    assert devs[0] < 0.01
