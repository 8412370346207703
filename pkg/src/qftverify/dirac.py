"""Gamma matrices, slash notation, R(p, mu) and its factor, bispinor representation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IdentityViolation, NotSemidefinite
from .kinematics import METRIC, SIGMA, check_unimodular, lorentz_from_sl2c, pauli_P

I2 = np.eye(2, dtype=complex)
Z2 = np.zeros((2, 2), dtype=complex)
IDENTITY_TOL = 1e-10


def _blocks(a, b, c, d) -> np.ndarray:
    return np.block([[a, b], [c, d]])


@dataclass(frozen=True)
class GammaBasis:
    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray

    def __getitem__(self, mu: int) -> np.ndarray:
        return (self.g0, self.g1, self.g2, self.g3)[mu]

    def star(self, mu: int) -> np.ndarray:
        """Adjoint ``gamma_mu^* = g_{mu mu} gamma_mu``."""
        return METRIC[mu, mu] * self[mu]

    def as_array(self) -> np.ndarray:
        return np.stack([self.g0, self.g1, self.g2, self.g3])


def gamma_basis() -> GammaBasis:
    g0 = _blocks(I2, Z2, Z2, -I2)
    gs = [_blocks(Z2, SIGMA[j], -SIGMA[j], Z2) for j in (1, 2, 3)]
    return GammaBasis(g0, *gs)


GAMMA = gamma_basis().as_array()
GAMMA_STAR = np.einsum("m,mij->mij", np.diag(METRIC), GAMMA)
G0 = GAMMA[0]


def slash(p) -> np.ndarray:
    """``sum_k p_k gamma_k^*``; ``p`` may be complex (polarization vectors)."""
    return np.tensordot(np.asarray(p), GAMMA_STAR, axes=(0, 0))


def R(p, mu: float) -> np.ndarray:
    """``(slash(p) + mu) gamma_0``."""
    return (slash(p) + mu * np.eye(4)) @ G0


def R_eigenvalues(p, mu: float) -> np.ndarray:
    """Closed-form spectrum ``E -/+ sqrt(mu^2 + |p|^2)``, each twice, ascending."""
    p = np.asarray(p, dtype=float)
    r = np.sqrt(mu**2 + np.dot(p[1:], p[1:]))
    return np.array([p[0] - r, p[0] - r, p[0] + r, p[0] + r])


def factor_R(p, mu: float) -> np.ndarray:
    """Upper block-triangular ``C`` with ``C^* C = R(p, mu)``.

    Requires ``E >= 0`` and ``p.p >= mu^2`` so that ``R`` is positive
    semidefinite. The closed form divides by ``sqrt(E + mu)``; when that is
    numerically zero an eigendecomposition square root is used instead.
    """
    p = np.asarray(p, dtype=float)
    E = p[0]
    Rm = R(p, mu)
    scale = np.linalg.norm(Rm)
    sq = E**2 - np.dot(p[1:], p[1:]) - mu**2
    if E < -IDENTITY_TOL * max(scale, 1.0) or sq < -IDENTITY_TOL * max(scale, 1.0) ** 2:
        raise NotSemidefinite(f"R(p, {mu}) is not positive semidefinite for p = {p}")
    if E + mu < 1e-12:
        w, v = np.linalg.eigh(Rm)
        if w.min() < -IDENTITY_TOL * max(scale, 1.0):
            raise NotSemidefinite(f"R(p, {mu}) has eigenvalue {w.min()}")
        return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    P0 = pauli_P(np.array([0.0, *p[1:]]))
    top = _blocks((E + mu) * I2, P0, Z2, np.sqrt(max(sq, 0.0)) * I2)
    return top / np.sqrt(E + mu)


def min_eigenvalue(M) -> float:
    return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T)).min())


# bispinor representation


def spinor_rep(A) -> np.ndarray:
    """``S_p-bar(A)``; the conjugate representation is ``spinor_rep(A).conj()``."""
    A = check_unimodular(A)
    Ai = np.linalg.inv(A)
    As = A.conj().T
    plus = 0.5 * (Ai + As)
    minus = 0.5 * (Ai - As)
    return _blocks(plus, minus, minus, plus)


def similarity_B():
    """Real orthogonal ``B`` taking the standard gammas to the primed ones."""
    B = _blocks(I2, -I2, I2, I2) / np.sqrt(2)
    return B, B.T.copy()


def primed_gammas() -> np.ndarray:
    B, Bi = similarity_B()
    return np.einsum("ij,mjk,kl->mil", B, GAMMA, Bi)


def _residual(a, b) -> float:
    return float(np.linalg.norm(a - b))


def verify_sp_identities(A, p, tol: float = IDENTITY_TOL) -> dict:
    """Check the four bispinor identities at ``p' = p``, ``p = Lambda^{-1} p'``.

    Returns residuals keyed by clause. Raises ``IdentityViolation`` with the
    clause index when one exceeds ``tol`` (relative to the matrix scale).
    """
    A = check_unimodular(A)
    Sb = spinor_rep(A)
    S = Sb.conj()
    Sbi = np.linalg.inv(Sb)
    STi = np.linalg.inv(S.T)
    lam_inv = np.linalg.inv(lorentz_from_sl2c(A))
    p_prime = np.asarray(p, dtype=float)
    p_un = lam_inv @ p_prime

    res = {}
    lhs = slash(p_un)
    res["slash_transport"] = _residual(lhs, Sb @ slash(p_prime) @ Sbi) / max(np.linalg.norm(lhs), 1.0)

    lhs2 = np.einsum("nij,nm->mij", GAMMA_STAR, lam_inv)
    rhs2 = np.einsum("ij,mjk,kl->mil", Sb, GAMMA_STAR, Sbi)
    res["gamma_star_left"] = _residual(lhs2, rhs2)

    lhs3 = np.einsum("mn,nij->mij", lam_inv, GAMMA_STAR)
    rhs3 = np.einsum("ij,mjk,kl->mil", S.T, GAMMA_STAR, STi)
    res["gamma_star_right"] = _residual(lhs3, rhs3)

    B, Bi = similarity_B()
    g0p = B @ G0 @ Bi
    Sbp = B @ Sb @ Bi
    Sp = B @ S @ Bi
    res["gamma0_invariance"] = _residual(np.linalg.inv(Sbp) @ g0p @ np.linalg.inv(Sp.T), g0p)

    for i, (name, r) in enumerate(res.items(), start=1):
        if r > tol:
            raise IdentityViolation(f"{i}:{name}", r)
    return res


def R_transport_residual(A, p, m: float) -> float:
    """``|| S-bar R(p, m) S^T - R(Lambda^{-1} p, m) ||`` relative to ``||R||``."""
    Sb = spinor_rep(A)
    lam_inv = np.linalg.inv(lorentz_from_sl2c(A))
    lhs = Sb @ R(p, m) @ Sb.conj().T
    rhs = R(lam_inv @ np.asarray(p, dtype=float), m)
    return _residual(lhs, rhs) / max(np.linalg.norm(rhs), 1.0)
