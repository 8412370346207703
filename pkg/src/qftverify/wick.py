"""Signed permutations, free-field pairings and discrete-measure transforms."""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import InvalidPermutation, OffShell, OutsideForwardCone, TooLarge
from .fields import LAYOUT, TwoPointModel
from .kinematics import minkowski_dot

MAX_LEGS = 12


def is_fermion(kappa: int, n_boson: int = LAYOUT.n_boson) -> bool:
    # 0-based layout: indices 0..n_boson-1 are bosons
    return kappa >= n_boson


def permutation_sign(kappas, perm, n_boson: int = LAYOUT.n_boson) -> int:
    """Sign of reordering ``kappas`` into ``[kappas[i] for i in perm]``.

    Built from adjacent transpositions (bubble sort of ``perm``): each swap of
    two fermion indices gives -1, any other swap +1. A repeated fermion index
    makes every sign 0, since moving the two copies next to each other and
    swapping them forces ``s = -s``.
    """
    kappas = list(kappas)
    perm = list(perm)
    n = len(kappas)
    if sorted(perm) != list(range(n)):
        raise InvalidPermutation(f"{perm} is not a permutation of range({n})")
    ferm = [k for k in kappas if is_fermion(k, n_boson)]
    if len(set(ferm)) < len(ferm):
        return 0
    seq = perm[:]
    sign = 1
    # bubble sort seq back to identity; the swaps mirror the transpositions
    for i in range(n):
        for j in range(n - 1 - i):
            if seq[j] > seq[j + 1]:
                if is_fermion(kappas[seq[j]], n_boson) and is_fermion(kappas[seq[j + 1]], n_boson):
                    sign = -sign
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
    return sign


@dataclass(frozen=True)
class PairingList:
    pairs: tuple
    sign: int = 1

    @property
    def order(self) -> tuple:
        return tuple(i for pair in self.pairs for i in pair)


def pairing_count(n: int) -> int:
    if n % 2:
        return 0
    k = n // 2
    return factorial(n) // (2**k * factorial(k))


def _pairings(items):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        remaining = rest[:i] + rest[i + 1 :]
        for tail in _pairings(remaining):
            yield ((first, partner),) + tail


def enumerate_pairings(n: int, kappas=None, n_boson: int = LAYOUT.n_boson) -> list[PairingList]:
    """All perfect matchings of ``0..n-1`` in lexicographic order with their signs.

    Without ``kappas`` every leg is treated as a boson and all signs are +1.
    """
    if n > MAX_LEGS:
        raise TooLarge(f"n = {n} exceeds the {MAX_LEGS}-leg limit")
    if n < 0 or n % 2:
        return []
    kappas = list(kappas) if kappas is not None else [0] * n
    out = []
    for pairs in _pairings(list(range(n))):
        order = [i for pair in pairs for i in pair]
        out.append(PairingList(pairs, permutation_sign(kappas, order, n_boson)))
    return out


@dataclass(frozen=True)
class IndexedLeg:
    momentum: np.ndarray
    kappa: int
    direction: str = "in"

    @property
    def argument(self) -> np.ndarray:
        """Momentum entering the two-point function; outgoing legs enter negated."""
        p = np.asarray(self.momentum, dtype=float)
        return p if self.direction == "in" else -p


@dataclass(frozen=True)
class PairingTerm:
    pairing: PairingList
    coefficient: complex
    supported: bool
    kinds: tuple  # "B" or "F" per pair


@dataclass(frozen=True)
class FreeNPoint:
    terms: tuple
    value: complex


def _check_shell(leg: IndexedLeg, model: TwoPointModel, tol: float):
    p = leg.argument
    mass = model.mass if is_fermion(leg.kappa) else 0.0
    scale = max(1.0, float(np.dot(p, p)))
    if abs(minkowski_dot(p, p) - mass**2) > tol * scale:
        raise OffShell(f"leg with kappa={leg.kappa} is off its mass shell")


def free_npoint(legs, model: TwoPointModel | None = None, tol: float = 1e-9) -> FreeNPoint:
    """Sum over pairings of signed products of two-point coefficients.

    The pair ``(a, b)``, ``a < b``, contributes ``M(p_b)[kappa_a, kappa_b]``
    on the support ``p_a + p_b = 0``. The delta factors themselves, including
    the energy-sign support, are left symbolic.
    """
    model = model or TwoPointModel()
    legs = list(legs)
    for leg in legs:
        _check_shell(leg, model, tol)
    n = len(legs)
    if n % 2:
        return FreeNPoint((), 0j)
    kappas = [leg.kappa for leg in legs]
    terms = []
    total = 0j
    for pl in enumerate_pairings(n, kappas):
        coeff = complex(pl.sign)
        supported = True
        kinds = []
        for a, b in pl.pairs:
            pa, pb = legs[a].argument, legs[b].argument
            kinds.append("F" if is_fermion(kappas[a]) else "B")
            if np.linalg.norm(pa + pb) > tol * max(1.0, np.linalg.norm(pb)):
                supported = False
            coeff *= model.M(pb)[kappas[a], kappas[b]]
        terms.append(PairingTerm(pl, coeff, supported, tuple(kinds)))
        if supported:
            total += coeff
    return FreeNPoint(tuple(terms), total)


# discrete measures


@dataclass(frozen=True)
class DiscreteMeasure:
    points: np.ndarray  # (n,) scalars or (n, 4) four-vectors
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0):
            raise ValueError("measure weights must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))

    @classmethod
    def from_atoms(cls, atoms):
        atoms = list(atoms)
        if not atoms:
            return cls(np.zeros((0,)), np.zeros((0,)))
        pts, ws = zip(*atoms)
        return cls(np.array(pts, dtype=float), np.array(ws, dtype=float))

    def __len__(self) -> int:
        return len(self.weights)


def moments(measure: DiscreteMeasure, n_max: int) -> np.ndarray:
    lam = measure.points.reshape(-1)
    powers = lam[None, :] ** np.arange(n_max + 1)[:, None]
    return powers @ measure.weights


def hankel_matrix(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    k = (len(c) - 1) // 2
    idx = np.arange(k + 1)
    return c[idx[:, None] + idx[None, :]]


def check_hankel(c, tol: float = 1e-10) -> bool:
    """True when the Hankel matrix ``[c_{i+j}]`` is positive semidefinite."""
    H = hankel_matrix(c)
    if H.size == 0:
        return True
    w = np.linalg.eigvalsh(H)
    return bool(w.min() >= -tol * max(1.0, np.abs(H).max()))


def _forward_cone(p, tol=1e-12):
    p = np.asarray(p, dtype=float)
    if p[0] < np.linalg.norm(p[1:]) - tol * max(1.0, abs(p[0])):
        raise OutsideForwardCone(f"{p} is outside the closed forward cone")
    return p


def _laplace_weights(measure: DiscreteMeasure, p) -> np.ndarray:
    p = _forward_cone(p)
    if len(measure) == 0:
        return np.zeros(0)
    return measure.weights * np.exp(-minkowski_dot(measure.points, p))


def laplace_B(measure: DiscreteMeasure, p, model: TwoPointModel | None = None) -> np.ndarray:
    """``sum_i w_i M(s_i) exp(-s_i . p)``."""
    model = model or TwoPointModel()
    ew = _laplace_weights(measure, p)
    out = np.zeros((12, 12), dtype=complex)
    for s, c in zip(measure.points, ew):
        out += c * model.M(s)
    return out


def upsilon(measure: DiscreteMeasure, p) -> float:
    return float(np.sum(_laplace_weights(measure, p)))


def beta(measure: DiscreteMeasure, j: int) -> float:
    v = measure.points.reshape(-1)
    return float(np.sum(measure.weights * np.exp(-j * v)))
