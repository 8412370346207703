"""Electrodynamics two-point model, field representation and polarization bases.

Global 12-component layout: photon 0-3, electron field 4-7, its conjugate
8-11. Electron states live in the 8-11 block and positron states in 4-7,
which is where the positive part of ``D M(p)`` sits for each.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .dirac import G0, R, slash, spinor_rep
from .errors import ConditionViolation, MasslessFermion, NotNormalized
from .kinematics import METRIC, check_unimodular, lorentz_from_sl2c, minkowski_dot, pauli_P

TWO_PI = 2 * np.pi
NORM_TOL = 1e-12


@dataclass(frozen=True)
class FieldLayout:
    photon: range = range(0, 4)
    electron: range = range(4, 8)
    conjugate: range = range(8, 12)
    n_boson: int = 4
    n_total: int = 12

    def block(self, species: str) -> range:
        return {"photon": self.photon, "positron": self.electron, "electron": self.conjugate}[species]


LAYOUT = FieldLayout()


def photon_block(p=None) -> np.ndarray:
    """``-2 pi g``; independent of momentum."""
    return -TWO_PI * METRIC.astype(complex)


def fermion_block(p, m: float, corrupt: bool = False) -> np.ndarray:
    """8x8 block with off-diagonal ``(slash p + m) g0`` and ``g0 (slash p - m)^T``.

    ``corrupt`` flips the mass sign in the lower block; it exists only as a
    negative control for :func:`verify_conditions`.
    """
    p = np.asarray(p, dtype=float)
    upper = R(p, m)
    lower = G0 @ (slash(p) + (m if corrupt else -m) * np.eye(4)).T
    z = np.zeros((4, 4), dtype=complex)
    return TWO_PI * np.block([[z, upper], [lower, z]])


def conjugation_D() -> np.ndarray:
    D2 = np.block([[np.zeros((4, 4)), np.eye(4)], [np.eye(4), np.zeros((4, 4))]])
    return block_diag(np.eye(4), D2)


def full_rep(A) -> np.ndarray:
    """``blockdiag(Lambda(A)^{-1}, S-bar(A), S(A))``."""
    A = check_unimodular(A)
    Sb = spinor_rep(A)
    return block_diag(np.linalg.inv(lorentz_from_sl2c(A)), Sb, Sb.conj())


@dataclass(frozen=True)
class TwoPointModel:
    mass: float = 1.0
    corrupt: bool = False
    D: np.ndarray = field(default_factory=conjugation_D, compare=False, repr=False)

    def M(self, p) -> np.ndarray:
        return block_diag(photon_block(p), fermion_block(p, self.mass, self.corrupt))

    def S(self, A) -> np.ndarray:
        return full_rep(A)

    def DM(self, p) -> np.ndarray:
        return self.D @ self.M(p)


def electrodynamics_model(mass: float = 1.0, corrupt: bool = False) -> TwoPointModel:
    return TwoPointModel(mass=mass, corrupt=corrupt)


def _rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1.0))


def condition_residuals(model: TwoPointModel, p, A) -> dict:
    """Residual of every two-point condition at on-shell ``p`` (electron mass)."""
    p = np.asarray(p, dtype=float)
    M = model.M(p)
    D = model.D
    res = {}
    off = M.copy()
    off[:4, :4] = 0
    off[4:, 4:] = 0
    res["block_structure"] = float(np.linalg.norm(off))
    res["conjugation"] = _rel(D.conj() @ D, np.eye(12))
    M1m, M2m = photon_block(-p), fermion_block(-p, model.mass, model.corrupt)
    res["matlocal"] = max(_rel(M1m.T, M[:4, :4]), _rel(M2m.T, -M[4:, 4:]))
    res["hermiticity"] = _rel(M.conj().T, D @ M @ D.T)
    # positivity: fermion block of DM on-shell, photon block on the transverse plane
    DM = D @ M
    fermion_min = np.linalg.eigvalsh(0.5 * (DM[4:, 4:] + DM[4:, 4:].conj().T)).min()
    T = transverse_projector(p)
    photon_min = np.linalg.eigvalsh(T.T @ DM[:4, :4] @ T).min() if T is not None else 0.0
    res["positivity"] = float(max(0.0, -min(fermion_min, photon_min)) / np.linalg.norm(DM))
    S = model.S(A)
    lam_inv = np.linalg.inv(lorentz_from_sl2c(A))
    res["covariance"] = _rel(S @ M @ S.T, model.M(lam_inv @ p))
    res["intertwining"] = _rel(S.conj() @ D, D @ S)
    return res


def transverse_projector(p):
    """4x2 real basis of the spatial plane orthogonal to ``p``; None at zero momentum."""
    k = np.asarray(p, dtype=float)[1:]
    if np.linalg.norm(k) == 0:
        return None
    e1, e2 = _transverse_pair(k / np.linalg.norm(k))
    return np.stack([np.r_[0.0, e1], np.r_[0.0, e2]], axis=1)


CONDITION_ORDER = (
    "block_structure",
    "conjugation",
    "matlocal",
    "hermiticity",
    "positivity",
    "covariance",
    "intertwining",
)


def verify_conditions(model: TwoPointModel, p, A, tol: float = 1e-10) -> dict:
    """Raise ``ConditionViolation`` naming the first failed condition."""
    res = condition_residuals(model, p, A)
    for name in CONDITION_ORDER:
        if res[name] > tol:
            raise ConditionViolation(name, res[name])
    return res


# photon polarizations


def _transverse_pair(u):
    """Two unit vectors completing ``u`` to a right-handed triad."""
    ux, uy, uz = u
    uyz = np.hypot(uy, uz)
    if uyz >= 1e-12:
        e1 = np.array([uyz, -ux * uy / uyz, -ux * uz / uyz])
        e2 = np.array([0.0, uz / uyz, -uy / uyz])
        return e1, e2
    # momentum along the x axis: Gram-Schmidt over coordinate axes
    basis = []
    for axis in np.eye(3)[[1, 2, 0]]:
        v = axis - np.dot(axis, u) * u
        for b in basis:
            v = v - np.dot(v, b) * b
        if np.linalg.norm(v) > 1e-6:
            basis.append(v / np.linalg.norm(v))
        if len(basis) == 2:
            break
    return basis[0], basis[1]


def photon_basis(p) -> np.ndarray:
    """Rows ``eps_0..eps_3`` for massless ``p``; each carries ``1/sqrt(2 omega)``."""
    p = np.asarray(p, dtype=float)
    k = p[1:]
    omega = np.linalg.norm(k)
    if omega == 0:
        raise ValueError("photon momentum must be non-zero")
    u = k / omega
    e1, e2 = _transverse_pair(u)
    eps = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, *e1],
            [0.0, *e2],
            [0.0, *u],
        ]
    )
    return eps / np.sqrt(2 * omega)


@dataclass(frozen=True)
class Polarization:
    species: str
    w: np.ndarray
    momentum: np.ndarray
    mass: float = 0.0

    @property
    def block(self) -> np.ndarray:
        return self.w[LAYOUT.block(self.species)] if self.species != "fermion" else self.w[4:]

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.mass**2 + np.dot(self.momentum[1:], self.momentum[1:])))


def _embed(vec, rng_block) -> np.ndarray:
    w = np.zeros(12, dtype=complex)
    w[rng_block] = vec
    return w


def transverse_polarization(p, a1: complex, a2: complex) -> Polarization:
    """``a1 eps_1 + a2 eps_2`` embedded in the photon block."""
    if abs(abs(a1) ** 2 + abs(a2) ** 2 - 1) > NORM_TOL:
        raise NotNormalized(f"|a1|^2 + |a2|^2 = {abs(a1) ** 2 + abs(a2) ** 2}")
    eps = photon_basis(p)
    vec = a1 * eps[1] + a2 * eps[2]
    return Polarization("photon", _embed(vec, LAYOUT.photon), np.asarray(p, dtype=float), 0.0)


def polarization_norm(pol: Polarization, model: TwoPointModel | None = None) -> complex:
    """``w-bar^T D M(p) w / (2 pi)``; equals ``1/(2 omega)`` for a normalized state."""
    model = model or TwoPointModel(mass=pol.mass or 1.0)
    w = pol.w
    return w.conj() @ model.DM(pol.momentum) @ w / TWO_PI


# fermion spinors

REST_U = np.array([[1, 0, 0, 0], [0, 1, 0, 0]], dtype=complex).T
REST_V = np.array([[0, 0, 0, -1], [0, 0, 1, 0]], dtype=complex).T


def rest_boost(p, m: float) -> np.ndarray:
    """SL(2,C) element whose transport law carries ``(m, 0)`` to ``p``.

    Under ``S-bar(A) R(q) S(A)^T = R(Lambda(A)^{-1} q)`` this is the inverse of
    the pure boost ``(P(p) + m) / sqrt(2m(E+m))``.
    """
    p = np.asarray(p, dtype=float)
    E = p[0]
    reflected = np.array([E, -p[1], -p[2], -p[3]])
    return (pauli_P(reflected) + m * np.eye(2)) / np.sqrt(2 * m * (E + m))


def _check_massive(p, m):
    if m <= 0:
        raise MasslessFermion("fermion mass must be positive")
    if np.asarray(p)[0] <= 0:
        raise ValueError("fermion momentum must have positive energy")


def fermion_spinors(p, m: float):
    """``(u1, u2, v1, v2)`` as 4-vectors, normalized by ``sqrt(m / omega)``."""
    _check_massive(p, m)
    p = np.asarray(p, dtype=float)
    Sb = spinor_rep(rest_boost(p, m))
    c = np.sqrt(m / p[0])
    U = c * Sb @ REST_U
    V = c * Sb @ REST_V
    return U[:, 0], U[:, 1], V[:, 0], V[:, 1]


def dual_polarizations(p, m: float):
    """``(w_p1, w_p2, w_a1, w_a2)`` as 4-vectors dual to the spinors."""
    _check_massive(p, m)
    p = np.asarray(p, dtype=float)
    Sb = spinor_rep(rest_boost(p, m))
    S = Sb.conj()
    c = 1 / (2 * np.sqrt(p[0] * m))
    WP = c * np.linalg.solve(S.T, REST_U)
    WA = c * np.linalg.solve(S.conj().T, REST_V)
    return WP[:, 0], WP[:, 1], WA[:, 0], WA[:, 1]


def general_polarization(p, m: float, c) -> Polarization:
    """Mixture ``sum c_r w_{p,r}`` (electron block) plus ``sum c_{r+2} w_{a,r}`` (positron block)."""
    c = np.asarray(c, dtype=complex).reshape(4)
    if abs(np.sum(np.abs(c) ** 2) - 1) > NORM_TOL:
        raise NotNormalized(f"sum |c|^2 = {np.sum(np.abs(c) ** 2)}")
    wp1, wp2, wa1, wa2 = dual_polarizations(p, m)
    w = np.zeros(12, dtype=complex)
    w[LAYOUT.conjugate] = c[0] * wp1 + c[1] * wp2
    w[LAYOUT.electron] = c[2] * wa1 + c[3] * wa2
    if np.allclose(c[2:], 0):
        species = "electron"
    elif np.allclose(c[:2], 0):
        species = "positron"
    else:
        species = "fermion"
    return Polarization(species, w, np.asarray(p, dtype=float), float(m))


def electron_polarization(p, m: float, r: int) -> Polarization:
    c = np.zeros(4)
    c[r - 1] = 1.0
    return general_polarization(p, m, c)


def spin_sum_residuals(p, m: float) -> dict:
    """Residuals of the electron, positron and rest-frame decomposition identities."""
    u1, u2, v1, v2 = fermion_spinors(p, m)
    omega = np.asarray(p)[0]
    U = np.stack([u1, u2], axis=1)
    V = np.stack([v1, v2], axis=1)
    pp = 2 * omega * U @ U.conj().T
    aa = 2 * omega * V.conj() @ V.T
    res = {
        "electron_spin_sum": _rel(pp, R(p, m)),
        "positron_spin_sum": _rel(aa, G0 @ (slash(p) - m * np.eye(4)).T),
    }
    DM = conjugation_D() @ TwoPointModel(mass=m).M(p) / TWO_PI
    decomposition = block_diag(aa, pp)
    res["DM_decomposition"] = _rel(DM[4:, 4:], decomposition)
    return res


def photon_completeness_residual(p) -> float:
    eps = photon_basis(p)
    omega = np.linalg.norm(np.asarray(p)[1:])
    total = sum(METRIC[r, r] * np.outer(eps[r], eps[r].conj()) for r in range(4))
    return _rel(total, METRIC / (2 * omega))


def transverse_conditions(w, p) -> tuple[float, float]:
    """Coulomb ``|w_0|`` and Lorentz ``|p.w|`` residuals for a photon 4-vector."""
    w = np.asarray(w)
    return float(abs(w[0])), float(abs(minkowski_dot(np.asarray(p, dtype=complex), w)))

