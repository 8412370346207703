"""Minkowski four-vectors, mass shells and the SL(2,C) cover of the Lorentz group.

Four-vectors are plain numpy arrays ``(E, px, py, pz)``. The metric is
``diag(1, -1, -1, -1)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotUnimodular, ZeroMasslessMomentum

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

SIGMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

UNIMODULAR_TOL = 1e-9


def four_vector(e, px=0.0, py=0.0, pz=0.0) -> np.ndarray:
    v = np.array([e, px, py, pz], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("four-vector components must be finite")
    return v


def minkowski_dot(a, b):
    """``a0 b0 - a.b``; accepts real or complex components."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def minkowski_square(a):
    return minkowski_dot(a, a)


@dataclass(frozen=True)
class OnShellMomentum:
    """Momentum on the mass shell; the energy is derived, not stored."""

    mass: float
    p3: tuple
    sign: int = 1

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.mass**2 + np.dot(self.p3, self.p3)))

    @property
    def energy(self) -> float:
        return self.sign * self.omega

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.energy, *self.p3], dtype=float)


def mass_shell(mass: float, p3, sign: int = 1) -> OnShellMomentum:
    p3 = tuple(float(x) for x in np.asarray(p3, dtype=float).reshape(3))
    if mass < 0:
        raise ValueError("mass must be non-negative")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if mass == 0 and np.dot(p3, p3) == 0:
        raise ZeroMasslessMomentum("massless momentum must be non-zero")
    return OnShellMomentum(float(mass), p3, int(sign))


def on_shell(mass: float, p3, sign: int = 1) -> np.ndarray:
    """Four-vector shortcut for ``mass_shell(...).vec``."""
    return mass_shell(mass, p3, sign).vec


def pauli_P(p) -> np.ndarray:
    """``sum_k p_k sigma_k`` for a four-vector ``p``."""
    p = np.asarray(p)
    return np.tensordot(p, SIGMA, axes=(0, 0))


def vector_from_P(P) -> np.ndarray:
    """Inverse of :func:`pauli_P` for Hermitian ``P``."""
    comps = 0.5 * np.einsum("kij,ji->k", SIGMA, P)
    return comps.real


# SL(2,C)


def check_unimodular(A, tol: float = UNIMODULAR_TOL) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise NotUnimodular("expected a 2x2 matrix")
    det = np.linalg.det(A)
    if abs(det - 1) > tol:
        raise NotUnimodular(f"det A = {det} differs from 1")
    return A


def lorentz_from_sl2c(A) -> np.ndarray:
    """Lorentz matrix ``Lambda_{mu nu} = Tr(sigma_mu A sigma_nu A^*) / 2``."""
    A = check_unimodular(A)
    Ad = A.conj().T
    lam = 0.5 * np.einsum("mij,jk,nkl,li->mn", SIGMA, A, SIGMA, Ad)
    return lam.real


def boost_z(rapidity: float) -> np.ndarray:
    h = 0.5 * rapidity
    return np.diag([np.exp(h), np.exp(-h)]).astype(complex)


def rotation(axis, angle: float) -> np.ndarray:
    """``exp(-i angle/2 axis.sigma)`` in closed form."""
    n = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(n) - 1) > 1e-12:
        raise ValueError("rotation axis must be a unit vector")
    ns = np.tensordot(n, SIGMA[1:], axes=(0, 0))
    return np.cos(angle / 2) * SIGMA[0] - 1j * np.sin(angle / 2) * ns


def boost(direction, rapidity: float) -> np.ndarray:
    """Pure boost ``exp(rapidity/2 n.sigma)``."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    ns = np.tensordot(n, SIGMA[1:], axes=(0, 0))
    return np.cosh(rapidity / 2) * SIGMA[0] + np.sinh(rapidity / 2) * ns


def polar_decompose(A):
    """Split ``A = U V Dg V^*`` with unitary ``U, V`` and ``Dg = diag(l, 1/l)``, ``l >= 1``.

    Built from the SVD ``A = W S Vh``: the positive part is ``Vh^* S Vh`` and
    the unitary part is ``W Vh``. ``V`` is rescaled to unit determinant,
    which leaves ``V Dg V^*`` unchanged.
    """
    A = check_unimodular(A)
    W, s, Vh = np.linalg.svd(A)
    if abs(s[0] - s[1]) < 1e-14:
        # det A = 1 forces both singular values to 1: A is already unitary
        return A.copy(), np.eye(2, dtype=complex), np.eye(2, dtype=complex)
    V = Vh.conj().T
    V = V / np.sqrt(np.linalg.det(V))
    U = W @ Vh
    return U, V, np.diag(s).astype(complex)


def random_sl2c(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random unimodular matrix: rotation times boost with rapidity up to ``scale``."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    R = rotation(axis, rng.uniform(0, 4 * np.pi))
    d = rng.normal(size=3)
    B = boost(d, rng.uniform(-scale, scale))
    return R @ B


def random_momentum(rng: np.random.Generator, mass: float, scale: float = 1.0) -> np.ndarray:
    p3 = rng.normal(scale=scale, size=3)
    return on_shell(mass, p3)
