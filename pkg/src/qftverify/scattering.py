"""Plane-wave limit deltas, two-in/two-out amplitudes and the Compton semidefiniteness checks.

Leg convention: legs 1, 2 are outgoing and legs 3, 4 incoming. For Compton
scattering legs 1, 3 are photons and legs 2, 4 electrons.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dirac import G0, GAMMA, GAMMA_STAR, R, factor_R, min_eigenvalue, slash
from .errors import (
    ConservationViolated,
    ForwardKinematics,
    IdentityViolation,
    IndistinguishableSetup,
    NegativeForm,
    NotSemidefinite,
    PolarizationNotTransverse,
    PropagatorPole,
    SemidefinitenessViolated,
)
from .fields import TwoPointModel, fermion_spinors, photon_basis
from .kinematics import lorentz_from_sl2c, minkowski_dot, polar_decompose, random_sl2c
from .wick import DiscreteMeasure, laplace_B, permutation_sign

TWO_PI = 2 * np.pi
CONSERVATION_TOL = 1e-10
POLE_TOL = 1e-12
SEMIDEF_TOL = 1e-10
I4 = np.eye(4)


# delta sequences


def lsz_delta(L: float, p3, q3, d: int = 4) -> float:
    """Normalized Gaussian ``(L/sqrt(pi))^(d-1) exp(-L^2 |p - q|^2)``."""
    if L <= 0:
        raise ValueError("L must be positive")
    diff = np.asarray(p3, dtype=float) - np.asarray(q3, dtype=float)
    return float((L / np.sqrt(np.pi)) ** (d - 1) * np.exp(-(L**2) * np.dot(diff, diff)))


def delta_T(p, L: float, T: float, n: int = 4, d: int = 4) -> float:
    """Energy-regularized momentum delta sequence for ``n`` legs.

    ``p`` is the signed total ``sum s_j p_j``. At ``E = 0`` the energy factor
    takes its limit ``T / (2 pi)``.
    """
    if L <= 0 or T <= 0:
        raise ValueError("L and T must be positive")
    p = np.asarray(p, dtype=float)
    E = p[0]
    x = E * T / 2
    energy = T / TWO_PI if abs(x) < 1e-8 else np.sin(x) / (np.pi * E)
    k2 = np.dot(p[1:], p[1:])
    return float(energy * (L / np.sqrt(n * np.pi)) ** (d - 1) * np.exp(-(L**2) * k2 / n))


@dataclass(frozen=True)
class LSZPacket:
    L: float
    q: np.ndarray
    w: np.ndarray | None = None

    def delta(self, p3) -> float:
        return lsz_delta(self.L, p3, self.q)

    def coefficient(self, p3) -> np.ndarray:
        return self.delta(p3) * np.asarray(self.w)


# kinematics and amplitude containers


@dataclass(frozen=True)
class ScatterKinematics:
    """Momenta ``p1..p4`` (legs 1, 2 out; 3, 4 in) and per-leg polarization data.

    ``w`` entries are 12-vectors for the general amplitude, photon 4-vectors
    and electron 4-spinors for Compton. ``labels`` tag species/polarization for
    the distinguishable-particle setup.
    """

    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    p4: np.ndarray
    w1: np.ndarray | None = None
    w2: np.ndarray | None = None
    w3: np.ndarray | None = None
    w4: np.ndarray | None = None
    mass: float = 1.0
    labels: tuple | None = None

    @property
    def momenta(self) -> tuple:
        return tuple(np.asarray(p, dtype=float) for p in (self.p1, self.p2, self.p3, self.p4))

    @property
    def polarizations(self) -> tuple:
        return (self.w1, self.w2, self.w3, self.w4)

    def check_conservation(self, tol: float = CONSERVATION_TOL):
        p1, p2, p3, p4 = self.momenta
        r = np.linalg.norm(p1 + p2 - p3 - p4)
        if r > tol * max(1.0, np.linalg.norm(p3 + p4)):
            raise ConservationViolated(f"|p1 + p2 - p3 - p4| = {r}")

    def is_forward(self, tol: float = 1e-12) -> bool:
        p1, p2, p3, p4 = self.momenta
        same = lambda a, b: np.linalg.norm(a - b) <= tol * max(1.0, np.linalg.norm(a))
        return (same(p1, p3) and same(p2, p4)) or (same(p1, p4) and same(p2, p3))

    def check_non_forward(self):
        if self.is_forward():
            raise ForwardKinematics("{p1, p2} equals {p3, p4}")


@dataclass
class MultiplierSpec:
    U: dict = field(default_factory=lambda: {2: lambda p: 1.0})
    Upsilon: Callable | None = None
    beta: dict = field(default_factory=dict)
    c4: float = 1.0
    varsigma2: complex = 1.0

    def __post_init__(self):
        if abs(abs(self.varsigma2) - 1) > 1e-12:
            raise ValueError("varsigma2 must have unit modulus")


@dataclass
class AmplitudeResult:
    value: complex
    channel_terms: dict
    provenance: str
    coefficients: dict = field(default_factory=dict)
    phase: complex = 1.0  # bookkeeping factor not applied to value

    @property
    def abs2(self) -> float:
        return float(abs(self.value) ** 2)


@dataclass(frozen=True)
class ScalarModel:
    """Single-component boson: ``M(p) = 1``, ``D = 1``."""

    mass: float = 1.0
    n_boson: int = 1

    @property
    def D(self) -> np.ndarray:
        return np.ones((1, 1))

    def M(self, p) -> np.ndarray:
        return np.ones((1, 1), dtype=complex)


def _swap_signs(n: int, n_boson: int) -> np.ndarray:
    """Signs of both orderings of two legs carrying indices ``a, b``: ``[identity, swapped]``.

    The identity ordering has sign +1 except for a repeated fermion index, where both vanish.
    """
    return np.array(
        [[[permutation_sign([a, b], perm, n_boson) for b in range(n)] for a in range(n)] for perm in ([0, 1], [1, 0])]
    )


def _symmetrize(f, moms, sig, pair):
    """Signed sum over both orderings of the legs in ``pair`` of the tensor function ``f``."""
    i, j = pair
    base = f(*moms)
    swapped_moms = list(moms)
    swapped_moms[i], swapped_moms[j] = moms[j], moms[i]
    swapped = np.swapaxes(f(*swapped_moms), i, j)
    shape = [1, 1, 1, 1]
    shape[i] = shape[j] = sig.shape[1]
    return sig[0].reshape(shape) * base + sig[1].reshape(shape) * swapped


def constructed_amplitude(
    kin: ScatterKinematics,
    spec: MultiplierSpec,
    model=None,
    B_measure: DiscreteMeasure | None = None,
) -> AmplitudeResult:
    """Three-term constructed two-in/two-out amplitude contracted with the leg polarizations."""
    model = model or TwoPointModel(mass=kin.mass)
    kin.check_conservation()
    kin.check_non_forward()
    n_boson = getattr(model, "n_boson", 4)
    nk = model.M(np.array([1.0, 0, 0, 0])).shape[0]
    sig = _swap_signs(nk, n_boson)
    U2 = spec.U[2]
    D = model.D

    def DB(p):
        if B_measure is None or spec.Upsilon is None:
            return np.zeros((nk, nk), dtype=complex)
        return D @ laplace_B(B_measure, p, model)

    def direct(q1, q2, q3, q4):
        left = np.conj(U2(q1 - q2) * model.M(q1 - q2))
        right = U2(q3 - q4) * model.M(q3 - q4)
        return np.einsum("ab,cd->abcd", left, right)

    def exchange(q1, q2, q3, q4):
        if spec.Upsilon is None:
            return np.zeros((nk,) * 4, dtype=complex)
        b = spec.beta
        t13 = b.get(2, 0.0) * spec.Upsilon(q1 + q3) * DB(q1 + q3)
        t24 = b.get(4, 0.0) * spec.Upsilon(q2 + q4) * DB(q2 + q4)
        t14 = b.get(3, 0.0) * spec.Upsilon(q1 + q4) * DB(q1 + q4)
        t23 = b.get(3, 0.0) * spec.Upsilon(q2 + q3) * DB(q2 + q3)
        return np.einsum("ac,bd->abcd", t13, t24) + np.einsum("ad,bc->abcd", t14, t23)

    moms = list(kin.momenta)
    ws = [np.asarray(w, dtype=complex).reshape(-1) for w in kin.polarizations]
    pref = -1j * TWO_PI**3 * spec.c4 * abs(spec.varsigma2) ** 2 / 4

    terms = {}
    for name, f in (("direct", direct), ("exchange", exchange)):
        f12 = lambda *q, f=f: _symmetrize(f, q, sig, (0, 1))
        tens = _symmetrize(f12, moms, sig, (2, 3))
        terms[name] = pref * np.einsum("abcd,a,b,c,d->", tens, ws[0].conj(), ws[1].conj(), ws[2], ws[3])
    value = sum(terms.values())
    return AmplitudeResult(complex(value), terms, "constructed")


def scalar_amplitude(kin: ScatterKinematics, U_s, Upsilon_a=None, Upsilon_b=None, c4: float = 1.0):
    """Distinguishable-particle amplitude with invariant multiplier ``U_s``."""
    lab = kin.labels
    if lab is None or not (lab[0] == lab[2] and lab[1] == lab[3] and lab[0] != lab[1]):
        raise IndistinguishableSetup("need labels with w1 = w3, w2 = w4 and w1 != w2")
    p1, p2, p3, p4 = kin.momenta
    omegas = [p[0] for p in kin.momenta]
    pref = -1j * TWO_PI**3 * c4 / np.sqrt(np.prod(omegas))
    terms = {"direct": pref * np.conj(U_s(p1 - p2)) * U_s(p3 - p4)}
    terms["exchange_a"] = pref * (Upsilon_a(p1 + p3, p2 + p4) if Upsilon_a else 0.0)
    terms["exchange_b"] = pref * (Upsilon_b(p1 + p4, p2 + p3) if Upsilon_b else 0.0)
    return AmplitudeResult(complex(sum(terms.values())), terms, "constructed")


# Compton


def cm_photon_momentum(rho_hat: float, m: float) -> float:
    """CM momentum magnitude for photon energy ``rho_hat`` in the electron rest frame."""
    return m * rho_hat / np.sqrt(m**2 + 2 * m * rho_hat)


def compton_momenta(rho_hat: float, theta: float, m: float, phi: float = 0.0):
    """CM momenta: photon in along +z, outgoing photon at polar angle ``theta``."""
    k = cm_photon_momentum(rho_hat, m)
    E = np.sqrt(m**2 + k**2)
    n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    p3 = np.array([k, 0.0, 0.0, k])
    p4 = np.array([E, 0.0, 0.0, -k])
    p1 = np.array([k, *(k * n)])
    p2 = np.array([E, *(-k * n)])
    return p1, p2, p3, p4


def compton_kinematics(rho_hat, theta, m, pol1=0, pol3=0, spin2=0, spin4=0, phi=0.0):
    """Compton kinematics with basis polarizations: photon pol index 0/1, electron spin 0/1."""
    p1, p2, p3, p4 = compton_momenta(rho_hat, theta, m, phi)
    w1 = photon_basis(p1)[1 + pol1]
    w3 = photon_basis(p3)[1 + pol3]
    w2 = fermion_spinors(p2, m)[spin2]
    w4 = fermion_spinors(p4, m)[spin4]
    return ScatterKinematics(p1, p2, p3, p4, w1, w2, w3, w4, mass=m)


def _den(q, m):
    den = minkowski_dot(q, q) - m**2
    if abs(den) < POLE_TOL * m**2:
        raise PropagatorPole(f"propagator denominator {den} vanishes")
    return den


def _compton_channels(kin: ScatterKinematics, a_s: float, a_u: float, e: float):
    p1, p2, p3, p4 = kin.momenta
    m = kin.mass
    e1b = slash(np.conj(kin.w1))
    e3 = slash(kin.w3)
    u2b = np.conj(kin.w2) @ G0
    u4 = np.asarray(kin.w4)
    norm = 1 / TWO_PI**3
    s_term = norm * a_s * (u2b @ e1b @ R(p1 + p2, m) @ G0 @ e3 @ u4)
    u_term = norm * a_u * (u2b @ e3 @ R(p4 - p1, m) @ G0 @ e1b @ u4)
    return {"s": complex(s_term), "u": complex(u_term)}


def feynman_coefficients(kin: ScatterKinematics, e: float):
    p1, p2, p3, p4 = kin.momenta
    m = kin.mass
    return e**2 / _den(p1 + p2, m), e**2 / _den(p4 - p1, m)


def constructed_coefficients(kin: ScatterKinematics, e: float):
    """``a_s`` as in the Feynman series; ``a_u`` uses ``p1.p2`` in place of ``p1.p4``."""
    p1, p2, p3, p4 = kin.momenta
    m = kin.mass
    a_s = e**2 / _den(p1 + p2, m)
    pp = minkowski_dot(p1, p2)
    if abs(pp) < POLE_TOL * m**2:
        raise PropagatorPole("p1.p2 vanishes")
    return a_s, -(e**2) / (2 * pp)


def feynman_compton(kin: ScatterKinematics, e: float = 1.0) -> AmplitudeResult:
    kin.check_conservation()
    a_s, a_u = feynman_coefficients(kin, e)
    terms = _compton_channels(kin, a_s, a_u, e)
    return AmplitudeResult(sum(terms.values()), terms, "feynman", {"a_s": a_s, "a_u": a_u})


def constructed_compton(kin: ScatterKinematics, e: float = 1.0) -> AmplitudeResult:
    kin.check_conservation()
    a_s, a_u = constructed_coefficients(kin, e)
    terms = _compton_channels(kin, a_s, a_u, e)
    return AmplitudeResult(sum(terms.values()), terms, "constructed", {"a_s": a_s, "a_u": a_u}, phase=-1j)


def spin_averaged_abs2(rho_hat, theta, m, e=1.0, variant: str = "feynman", phi: float = 0.0) -> float:
    """Average over initial, sum over final photon polarizations and electron spins."""
    amp = feynman_compton if variant == "feynman" else constructed_compton
    total = 0.0
    for pol1 in (0, 1):
        for pol3 in (0, 1):
            for s2 in (0, 1):
                for s4 in (0, 1):
                    kin = compton_kinematics(rho_hat, theta, m, pol1, pol3, s2, s4, phi)
                    total += amp(kin, e).abs2
    return total / 4


def fractional_error(rho_hat1: float, theta: float, m: float) -> float:
    return rho_hat1 * (1 - np.cos(theta)) / (m + 2 * rho_hat1)


def u_channel_deviation(kin: ScatterKinematics, e: float = 1.0) -> float:
    """Relative deviation of the constructed ``a_u`` from the Feynman one."""
    _, au_f = feynman_coefficients(kin, e)
    _, au_c = constructed_coefficients(kin, e)
    return float(abs(au_c - au_f) / abs(au_f))


# semidefiniteness


def _scale(M) -> float:
    return max(float(np.linalg.norm(M, 2)), 1.0)


def verify_s_channel(kin: ScatterKinematics, tol: float = SEMIDEF_TOL) -> dict:
    """``R(p1 + p2, m)`` is PSD and ``C_e^* C_e`` rebuilds it."""
    p1, p2, _, _ = kin.momenta
    P = p1 + p2
    Rm = R(P, kin.mass)
    lam = min_eigenvalue(Rm)
    if lam < -tol * _scale(Rm):
        raise NotSemidefinite(f"min eigenvalue {lam}")
    Ce = factor_R(P, kin.mass)
    rec = float(np.linalg.norm(Ce.conj().T @ Ce - Rm) / _scale(Rm))
    if rec > tol:
        raise NotSemidefinite(f"C_e reconstruction residual {rec}")
    return {"min_eigenvalue": lam, "reconstruction": rec, "C_e": Ce}


CHI3 = -1j * GAMMA[1] @ GAMMA_STAR[2]


def u_channel_matrix(P, m: float) -> np.ndarray:
    """16x16 block matrix ``[gamma_k3 R(-P, m) gamma_k1^*]``."""
    Rm = R(-np.asarray(P, dtype=float), m)
    return np.block([[GAMMA[a] @ Rm @ GAMMA_STAR[b] for b in range(4)] for a in range(4)])


def u_channel_factor(P, m: float) -> np.ndarray:
    """4x16 ``C_x`` with ``C_x^* C_x = -[gamma R(-P, m) gamma^*]`` in every frame."""
    Ce = factor_R(P, -m)
    return np.hstack([Ce @ GAMMA_STAR[k] for k in range(4)])


def _check_transverse(w, p, tol=1e-10):
    w = np.asarray(w)
    scale = max(np.linalg.norm(w), 1e-300) * max(np.linalg.norm(p), 1.0)
    if abs(w[0]) > tol * np.linalg.norm(w) or abs(minkowski_dot(np.asarray(p, dtype=complex), w)) > tol * scale:
        raise PolarizationNotTransverse("photon polarization violates the Coulomb or Lorentz condition")


def _selected_frame_block(rho1: float, m: float):
    """8x8 contributing block and its ``C_x`` factor with ``p2`` at rest, ``p1`` along z."""
    P = np.array([m + rho1, 0.0, 0.0, rho1])
    N = u_channel_matrix(P, m)
    block = -N[4:12, 4:12]
    Rp = R(P, m)
    Ce = factor_R(P, m)
    top = np.hstack([Ce, 1j * np.linalg.inv(Ce.conj().T) @ CHI3 @ Rp])
    Cx = np.vstack([top, np.zeros((4, 8))])
    structure = np.block([[GAMMA[i] @ GAMMA_STAR[j] @ Rp for j in (1, 2)] for i in (1, 2)])
    return block, Cx, structure


def verify_u_channel(kin: ScatterKinematics, tol: float = SEMIDEF_TOL) -> dict:
    p1, p2, p3, p4 = kin.momenta
    m = kin.mass
    _check_transverse(kin.w1, p1)
    _check_transverse(kin.w3, p3)
    P = p1 + p2
    N = u_channel_matrix(P, m)
    sc = _scale(N)
    top = float(np.linalg.eigvalsh(0.5 * (N + N.conj().T)).max())
    if top > tol * sc:
        raise SemidefinitenessViolated(f"largest eigenvalue {top}")
    # contract both photon slots with the transverse polarizations
    forms = []
    for a in (kin.w1, kin.w3):
        a = np.asarray(a, dtype=complex)
        K = np.einsum("k,kilj,l->ij", a.conj(), N.reshape(4, 4, 4, 4), a)
        forms.append(float(np.linalg.eigvalsh(0.5 * (K + K.conj().T)).max()))
    if max(forms) > tol * sc:
        raise SemidefinitenessViolated(f"contracted form eigenvalue {max(forms)}")
    Cx16 = u_channel_factor(P, m)
    rec16 = float(np.linalg.norm(Cx16.conj().T @ Cx16 + N) / sc)
    # selected frame
    rho1 = minkowski_dot(p1, p2) / m
    block, Cx, structure = _selected_frame_block(rho1, m)
    rec8 = float(np.linalg.norm(Cx.conj().T @ Cx - block) / _scale(block))
    struct = float(np.linalg.norm(block - structure) / _scale(block))
    for name, r in (("factor16", rec16), ("factor8", rec8), ("structure", struct)):
        if r > tol:
            raise SemidefinitenessViolated(f"{name} residual {r}")
    return {
        "max_eigenvalue": top,
        "contracted_max": max(forms),
        "factor16_residual": rec16,
        "selected_block_residual": rec8,
        "structure_residual": struct,
        "C_x": Cx,
        "C_x16": Cx16,
    }


def _pure_boost_matrix(beta_vec) -> np.ndarray:
    b = np.asarray(beta_vec, dtype=float)
    b2 = b @ b
    if b2 == 0:
        return np.eye(4)
    g = 1 / np.sqrt(1 - b2)
    L = np.eye(4)
    L[0, 0] = g
    L[0, 1:] = L[1:, 0] = -g * b
    L[1:, 1:] += (g - 1) * np.outer(b, b) / b2
    return L


def _rotation_to_z(u) -> np.ndarray:
    u = np.asarray(u, dtype=float) / np.linalg.norm(u)
    z = np.array([0.0, 0.0, 1.0])
    v = np.cross(u, z)
    c = u @ z
    if np.linalg.norm(v) < 1e-14:
        Rot = np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    else:
        vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
        Rot = np.eye(3) + vx + vx @ vx / (1 + c)
    L = np.eye(4)
    L[1:, 1:] = Rot
    return L


def rest_frame_alignment(p4, p1, w) -> tuple[float, np.ndarray]:
    """Photon energy and gauge-fixed polarization in the frame where ``p4`` rests and ``p1`` is along z."""
    p4 = np.asarray(p4, dtype=float)
    Lb = _pure_boost_matrix(p4[1:] / p4[0])
    k = Lb @ np.asarray(p1, dtype=float)
    La = _rotation_to_z(k[1:]) @ Lb
    k = La @ p1
    wr = La @ np.asarray(w, dtype=complex)
    wr = wr - (wr[0] / k[0]) * k  # restore the Coulomb condition by a gauge shift
    return float(k[0]), wr


def _rl_part_residual(p4, p1, w, m) -> float:
    """``R(p4 - p1, m) w-slash (p4-slash + m)^*`` against the ``R(-p1, 0)`` version."""
    ws = slash(w)
    right = (slash(p4) + m * I4).conj().T
    lhs = R(p4 - p1, m) @ ws @ right
    rhs = R(-p1, 0.0) @ ws @ right
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1.0))


def verify_rest_frame_identity(kin: ScatterKinematics, trials: int = 100, rng=None, tol: float = 1e-9) -> dict:
    """Rest-frame vanishing product and its transport by ``A = U V D V^*``.

    The outgoing photon polarization ``w1`` is moved to the rest frame of
    ``p4`` (with ``p1`` along z) and gauge-fixed to ``w_0 = 0``. Random
    transports then apply ``V^*``-aligned initial data, the z-boost ``D`` and
    the rotation ``U V``.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    p1, _, _, p4 = kin.momenta
    m = kin.mass
    rho, w_o = rest_frame_alignment(p4, p1, kin.w1)
    p4r = np.array([m, 0.0, 0.0, 0.0])
    p1r = np.array([rho, 0.0, 0.0, rho])
    proj = slash(p4r) + m * I4
    rest = float(np.abs(proj @ slash(w_o) @ proj.conj().T).max())
    if rest > 1e-12:
        raise IdentityViolation("rest", rest)
    worst = coulomb = 0.0
    for _ in range(trials):
        A = random_sl2c(rng, scale=2.0)
        U, V, Dg = polar_decompose(A)
        LV = lorentz_from_sl2c(V)
        LA = lorentz_from_sl2c(A)
        # initial data chosen so that V^* aligns p1 with z
        q4, q1, w = LA @ p4r, LA @ (LV @ p1r), LA @ (LV @ w_o)
        coulomb = max(coulomb, float(abs(w[0]) / max(np.linalg.norm(w), 1e-300)))
        worst = max(worst, _rl_part_residual(q4, q1, w, m))
    if worst > tol:
        raise IdentityViolation("transported", worst)
    return {"rest": rest, "transported": worst, "coulomb_drift": coulomb, "rho": rho}


# connected four-point positivity


@dataclass
class TestGrid:
    """Two-leg (photon, electron) points sharing total momenta, with 16-component coefficients."""

    __test__ = False  # not a pytest class

    p1: list
    p2: list
    f: list  # each (4, 4): photon index x spinor index

    def __len__(self):
        return len(self.f)


def random_transverse_grid(rng, m: float = 1.0, n_totals: int = 3, per_total: int = 4, scale: float = 2.0) -> TestGrid:
    p1s, p2s, fs = [], [], []
    for _ in range(n_totals):
        s = m**2 + rng.uniform(0.05, scale) * m**2
        k = (s - m**2) / (2 * np.sqrt(s))
        boost_v = rng.normal(size=3)
        boost_v *= rng.uniform(0, 0.8) / np.linalg.norm(boost_v)
        Lb = np.linalg.inv(_pure_boost_matrix(boost_v))
        for _ in range(per_total):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            q1 = Lb @ np.array([k, *(k * n)])
            q2 = Lb @ np.array([np.sqrt(m**2 + k**2), *(-k * n)])
            eps = photon_basis(q1)[1:3]
            coeffs = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
            fs.append(np.einsum("pk,pa->ka", eps, coeffs))
            p1s.append(q1)
            p2s.append(q2)
    return TestGrid(p1s, p2s, fs)


def _group_by_total(grid: TestGrid, tol=1e-9):
    groups = []
    for i, (a, b) in enumerate(zip(grid.p1, grid.p2)):
        P = a + b
        for g in groups:
            if np.linalg.norm(g[0] - P) < tol * max(1.0, np.linalg.norm(P)):
                g[1].append(i)
                break
        else:
            groups.append((P, [i]))
    return groups


def connected_four_point_positivity(grid: TestGrid, m: float = 1.0, e: float = 1.0, tol: float = SEMIDEF_TOL) -> dict:
    """Discretized constructed connected four-point form ``sum |sum T f|^2``.

    ``T_s = sqrt(a_s) C_e(P, m) gamma^* (p2-slash + m)^*`` and
    ``T_u = sqrt(-a_u) C_x(P) (p2-slash + m)^*``; only grid points with equal
    total momentum couple. The direct kernel sum is reported alongside.
    """
    factored = 0.0
    direct = 0.0 + 0.0j
    scale = 0.0
    for P, idx in _group_by_total(grid):
        pp = (minkowski_dot(P, P) - m**2) / 2
        a_s, a_u = e**2 / (2 * pp), -(e**2) / (2 * pp)
        Ce_s = factor_R(P, m)
        Cx = u_channel_factor(P, m)
        vs = np.zeros(4, dtype=complex)
        vu = np.zeros(4, dtype=complex)
        cols = []
        for i in idx:
            adj = (slash(grid.p2[i]) + m * I4).conj().T
            g = np.stack([adj @ grid.f[i][k] for k in range(4)])  # row k: (p2-slash + m)^* f_k
            s_vec = sum(GAMMA_STAR[k] @ g[k] for k in range(4))
            vs += np.sqrt(a_s) * Ce_s @ s_vec
            vu += np.sqrt(-a_u) * Cx @ g.reshape(16)
            cols.append(g.reshape(16))
            scale += (abs(a_s) + abs(a_u)) * np.linalg.norm(g) ** 2 * _scale(R(P, m))
        factored += float(np.vdot(vs, vs).real + np.vdot(vu, vu).real)
        # direct kernel: a_s [gamma^* ... R(P, m) ... gamma^*] + a_u [... R(-P, m) ...]
        Ks = np.block([[GAMMA_STAR[a].conj().T @ R(P, m) @ GAMMA_STAR[b] for b in range(4)] for a in range(4)])
        Ku = np.block([[GAMMA_STAR[a].conj().T @ R(-P, m) @ GAMMA_STAR[b] for b in range(4)] for a in range(4)])
        G = np.stack(cols, axis=1)
        direct += np.einsum("ik,ij,jl->", G.conj(), a_s * Ks + a_u * Ku, G)
    scale = max(scale, 1e-300)
    if factored < -tol * scale:
        raise NegativeForm(f"form value {factored}")
    return {
        "value": factored,
        "direct": float(direct.real),
        "direct_imag": float(direct.imag),
        "residual": float(abs(direct - factored) / scale),
        "scale": scale,
    }
