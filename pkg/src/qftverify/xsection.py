"""Plane-wave state norms, the outgoing-state measure, flux and differential cross sections."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BelowThreshold, CoincidentMomenta, NotCenterOfMomentum
from .fields import TwoPointModel
from .kinematics import minkowski_dot
from .scattering import (
    AmplitudeResult,
    ScatterKinematics,
    compton_momenta,
    delta_T,
    spin_averaged_abs2,
)

TWO_PI = 2 * np.pi
CM_TOL = 1e-10


def _norm_factor(w, p, model: TwoPointModel | None) -> float:
    """``2 omega w-bar^T D M(p) w`` with the literal 2 pi of ``M`` divided out; 1 when normalized."""
    if w is None:
        return 1.0
    model = model or TwoPointModel()
    p = np.asarray(p, dtype=float)
    w = np.asarray(w)
    return float((2 * p[0] * (w.conj() @ model.DM(p) @ w) / TWO_PI).real)


def state_norm_sq(p_i, p_j, L: float, w_i=None, w_j=None, model=None, d: int = 4) -> float:
    """Squared norm of a two-particle plane-wave state, ``(L^2 / 2 pi)^(d-1)`` when normalized."""
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    if np.allclose(p_i[1:], p_j[1:], rtol=0, atol=1e-12):
        raise CoincidentMomenta("the two momenta coincide")
    return _norm_factor(w_i, p_i, model) * _norm_factor(w_j, p_j, model) * (L**2 / TWO_PI) ** (d - 1)


def two_point_overlap(p_i, p_k, L: float, w_i=None, w_k=None, model=None, d: int = 4) -> complex:
    """``2 omega_k (w_i-bar D M(p_k) w_k) (L / sqrt(2 pi))^(d-1) exp(-L^2 |p_i - p_k|^2 / 2)``."""
    p_i = np.asarray(p_i, dtype=float)
    p_k = np.asarray(p_k, dtype=float)
    if w_i is None or w_k is None:
        coeff = 1.0
    else:
        model = model or TwoPointModel()
        coeff = 2 * p_k[0] * (np.conj(w_i) @ model.DM(p_k) @ w_k) / TWO_PI
    diff = p_i[1:] - p_k[1:]
    return coeff * (L / np.sqrt(TWO_PI)) ** (d - 1) * np.exp(-(L**2) * diff @ diff / 2)


def vacuum_overlap(*_) -> float:
    """Vacuum against a two-particle plane-wave state: odd truncations vanish."""
    return 0.0


def flux_velocity(p1, p2) -> float:
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    m1s = max(minkowski_dot(p1, p1), 0.0)
    m2s = max(minkowski_dot(p2, p2), 0.0)
    arg = max(minkowski_dot(p1, p2) ** 2 - m1s * m2s, 0.0)
    return float(np.sqrt(arg) / (p1[0] * p2[0]))


def rho_out(omega1: float, omega2: float, m1: float, m2: float) -> float:
    W = omega1 + omega2
    if W < m1 + m2 - 1e-12 * max(1.0, m1 + m2):
        raise BelowThreshold(f"total energy {W} below threshold {m1 + m2}")
    arg = (W**2 - m1**2 - m2**2) ** 2 - 4 * m1**2 * m2**2
    return float(np.sqrt(max(arg, 0.0)) / (2 * W))


def projection_measure(L: float, d: int = 4) -> float:
    """Density of the outgoing-state measure ``(L / sqrt(2 pi))^(d-1)``."""
    if L <= 0:
        raise ValueError("L must be positive")
    return (L / np.sqrt(TWO_PI)) ** (d - 1)


def flux_volume(L: float, d: int = 4) -> float:
    return (2 * L * np.sqrt(np.pi)) ** (d - 1)


def idempotence_coefficient(L: float, d: int = 4) -> float:
    """Coefficient left after one ``P^2`` contraction; equals 1 for the chosen measure."""
    return projection_measure(L, d) ** 2 * (TWO_PI / L**2) ** (d - 1)


def delta_square_factor(L: float, T: float, d: int = 4) -> float:
    """Factor ``c`` in ``delta_T(p; L^2/4)^2 -> c delta_T(p; L^2/4)``: the peak value."""
    return delta_T(np.zeros(4), L, T, n=4, d=d)


def factored_prefactor(L: float, T: float, u: float, d: int = 4) -> float:
    """Raw bookkeeping in front of ``delta_T |M|^2 dp3 dp4`` before cancellation.

    Area ``V / (T u)``, projection norm ``(L^2 / 2 pi)^(d-1)``, squared delta
    replaced by its factor, ``(2 pi)^2`` and the in/out state norms.
    """
    V = flux_volume(L, d)
    norm = (L**2 / TWO_PI) ** (d - 1)
    return V / (T * u) * norm * delta_square_factor(L, T, d) * TWO_PI**2 / norm**2


def cancelled_prefactor(L: float, u: float, d: int = 4) -> float:
    return TWO_PI**d / u * flux_volume(L, d) / (2 * L * np.sqrt(np.pi)) ** (d - 1)


@dataclass
class CrossSectionInput:
    amplitude_abs2: float
    kin: ScatterKinematics
    masses: tuple | None = None  # (m1, m2, m3, m4); default from the momenta
    frame: str = "center-of-momentum"


def _masses(kin: ScatterKinematics) -> tuple:
    return tuple(float(np.sqrt(max(minkowski_dot(p, p), 0.0))) for p in kin.momenta)


def is_center_of_momentum(kin: ScatterKinematics, tol: float = CM_TOL) -> bool:
    p1, p2, p3, p4 = kin.momenta
    scale = max(1.0, p3[0] + p4[0])
    return bool(np.linalg.norm((p3 + p4)[1:]) <= tol * scale)


def boost_to_cm(kin: ScatterKinematics) -> ScatterKinematics:
    """Momenta boosted to the frame with vanishing total 3-momentum (polarizations dropped)."""
    from .scattering import _pure_boost_matrix

    P = kin.momenta[2] + kin.momenta[3]
    Lb = _pure_boost_matrix(P[1:] / P[0])
    p = [Lb @ q for q in kin.momenta]
    return ScatterKinematics(*p, mass=kin.mass, labels=kin.labels)


def dsigma_domega(inp: CrossSectionInput, d: int = 4) -> float:
    """CM differential cross section into the solid angle of the outgoing leg 1.

    Incoming legs are 3, 4; the outgoing momentum magnitude is fixed by energy
    conservation.
    """
    kin = inp.kin
    if not is_center_of_momentum(kin):
        raise NotCenterOfMomentum("boost the kinematics with boost_to_cm and re-evaluate the amplitude")
    m1, m2, m3, m4 = inp.masses or _masses(kin)
    p1, p2, p3, p4 = kin.momenta
    rho_o = rho_out(p3[0], p4[0], m1, m2)
    rho_in = float(np.linalg.norm(p3[1:]))
    omegas = np.prod([p[0] for p in kin.momenta])
    W = p3[0] + p4[0]
    return float(TWO_PI**d * rho_o ** (d - 3) * omegas * inp.amplitude_abs2 / (rho_in * W**2))


def dsigma_from_amplitude(amp: AmplitudeResult, kin: ScatterKinematics) -> float:
    return dsigma_domega(CrossSectionInput(amp.abs2, kin))


def compton_dsigma(rho_hat: float, theta: float, m: float = 1.0, e: float = 1.0, variant: str = "feynman") -> float:
    """Spin-averaged CM Compton cross section from the amplitude pipeline."""
    p = compton_momenta(rho_hat, theta, m)
    kin = ScatterKinematics(*p, mass=m)
    abs2 = spin_averaged_abs2(rho_hat, theta, m, e, variant)
    return dsigma_domega(CrossSectionInput(abs2, kin, masses=(0.0, m, 0.0, m)))


def klein_nishina_dsigma(rho_hat: float, theta: float, m: float = 1.0, e: float = 1.0) -> float:
    """Closed-form spin-averaged CM Compton cross section (lowest order).

    Invariant form ``2 e^4 [pk'/pk + pk/pk' + 2 m^2 (1/pk - 1/pk') + m^4 (1/pk - 1/pk')^2]``
    divided by ``64 pi^2 s``.
    """
    s = m**2 + 2 * m * rho_hat
    k = m * rho_hat / np.sqrt(s)
    E = np.sqrt(m**2 + k**2)
    pk = k * (E + k)
    pkp = k * (E + k * np.cos(theta))
    a = 1 / pk - 1 / pkp
    M2 = 2 * e**4 * (pkp / pk + pk / pkp + 2 * m**2 * a + m**4 * a**2)
    return float(M2 / (64 * np.pi**2 * s))


def thomson_shape(theta) -> np.ndarray:
    """Low-energy angular law normalized to 1 in the forward direction."""
    return (1 + np.cos(np.asarray(theta)) ** 2) / 2
