"""Randomized identity suites shared by the ``verify`` command and the acceptance tests.

Each check draws ``trials`` random inputs and reports the worst residual.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from typing import Callable

import numpy as np

from . import dirac, fields, kinematics, scattering, wick
from .errors import QFTVerifyError
from .kinematics import METRIC

SUITES = ("kinematics", "dirac", "fields", "wick", "scattering")
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class CheckRow:
    suite: str
    identity: str
    residual: float
    tol: float
    error: str = ""

    @property
    def passed(self) -> bool:
        return not self.error and self.residual <= self.tol


@dataclass
class Context:
    rng: np.random.Generator
    trials: int = 100
    tol: float = DEFAULT_TOL
    mass: float = 1.0
    corrupt: bool = False

    @property
    def model(self) -> fields.TwoPointModel:
        return fields.TwoPointModel(mass=self.mass, corrupt=self.corrupt)


def _rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1.0))


def _worst(ctx: Context, fn: Callable[[], float]) -> float:
    return max(fn() for _ in range(ctx.trials))


# kinematics


def _homomorphism(ctx):
    def one():
        A, B = kinematics.random_sl2c(ctx.rng), kinematics.random_sl2c(ctx.rng)
        L = kinematics.lorentz_from_sl2c
        return _rel(L(A @ B), L(A) @ L(B))

    return _worst(ctx, one)


def _pauli_transport(ctx):
    def one():
        A = kinematics.random_sl2c(ctx.rng)
        p = ctx.rng.normal(size=4)
        lhs = A @ kinematics.pauli_P(p) @ A.conj().T
        return _rel(lhs, kinematics.pauli_P(kinematics.lorentz_from_sl2c(A) @ p))

    return _worst(ctx, one)


def _metric_preserved(ctx):
    def one():
        L = kinematics.lorentz_from_sl2c(kinematics.random_sl2c(ctx.rng))
        return _rel(L @ METRIC @ L.T, METRIC)

    return _worst(ctx, one)


def _polar_decomposition(ctx):
    def one():
        A = kinematics.random_sl2c(ctx.rng, scale=2.0)
        U, V, Dg = kinematics.polar_decompose(A)
        return _rel(U @ V @ Dg @ V.conj().T, A)

    return _worst(ctx, one)


def _mass_shell(ctx):
    def one():
        p = kinematics.random_momentum(ctx.rng, ctx.mass, scale=3.0)
        return abs(kinematics.minkowski_dot(p, p) - ctx.mass**2) / max(1.0, p[0] ** 2)

    return _worst(ctx, one)


# dirac


def _clifford(ctx):
    G = dirac.GAMMA
    res = 0.0
    for a in range(4):
        for b in range(4):
            anti = G[a] @ G[b] + G[b] @ G[a]
            res = max(res, float(np.abs(anti - 2 * METRIC[a, b] * np.eye(4)).max()))
    return res


def _R_eigenvalues(ctx):
    def one():
        p = ctx.rng.normal(size=4)
        mu = ctx.rng.normal()
        ev = np.sort(np.linalg.eigvalsh(dirac.R(p, mu)))
        root = np.sqrt(mu**2 + p[1:] @ p[1:])
        expect = np.sort([p[0] - root] * 2 + [p[0] + root] * 2)
        return float(np.abs(ev - expect).max() / max(1.0, abs(p[0]) + root))

    return _worst(ctx, one)


def _R_transport(ctx):
    def one():
        A = kinematics.random_sl2c(ctx.rng)
        p = kinematics.random_momentum(ctx.rng, ctx.mass)
        return dirac.R_transport_residual(A, p, ctx.mass)

    return _worst(ctx, one)


def _sp_clause(name):
    def check(ctx):
        def one():
            A = kinematics.random_sl2c(ctx.rng)
            p = kinematics.random_momentum(ctx.rng, ctx.mass)
            return dirac.verify_sp_identities(A, p, tol=np.inf)[name]

        return _worst(ctx, one)

    return check


def _R_factor(ctx):
    def one():
        p = kinematics.random_momentum(ctx.rng, ctx.mass)
        C = dirac.factor_R(p, ctx.mass)
        Rm = dirac.R(p, ctx.mass)
        return _rel(C.conj().T @ C, Rm)

    return _worst(ctx, one)


# fields


def _condition(name):
    def check(ctx):
        def one():
            A = kinematics.random_sl2c(ctx.rng)
            p = kinematics.random_momentum(ctx.rng, ctx.mass)
            return fields.condition_residuals(ctx.model, p, A)[name]

        return _worst(ctx, one)

    return check


def _DM_spectrum(ctx):
    def one():
        p = ctx.rng.normal(size=4)
        w = np.sqrt(ctx.mass**2 + p[1:] @ p[1:])
        ev = np.sort(np.linalg.eigvals(ctx.model.DM(p)[4:, 4:]).real) / (2 * np.pi)
        expect = np.sort([p[0] - w] * 4 + [p[0] + w] * 4)
        off = float(np.abs(ev - expect).max() / max(1.0, abs(p[0]) + w))
        q = kinematics.random_momentum(ctx.rng, ctx.mass)
        ev_on = np.sort(np.linalg.eigvals(ctx.model.DM(q)[4:, 4:]).real) / (2 * np.pi)
        return max(off, float(np.abs(ev_on[:4]).max() / q[0]))

    return _worst(ctx, one)


def _spin_sums(ctx):
    def one():
        p = kinematics.random_momentum(ctx.rng, ctx.mass)
        return max(fields.spin_sum_residuals(p, ctx.mass).values())

    return _worst(ctx, one)


def _photon_completeness(ctx):
    def one():
        return fields.photon_completeness_residual(kinematics.random_momentum(ctx.rng, 0.0))

    return _worst(ctx, one)


# wick


def _brute_sign(kappas, perm, n_boson=4):
    """Reference sign: inversion parity among fermions, 0 on repeated fermion indices."""
    ferm = [kappas[i] for i in perm if kappas[i] >= n_boson]
    if len(set(ferm)) < len(ferm):
        return 0
    fpos = [i for i in perm if kappas[i] >= n_boson]
    inv = sum(1 for a in range(len(fpos)) for b in range(a + 1, len(fpos)) if fpos[a] > fpos[b])
    return -1 if inv % 2 else 1


def _pairing_counts(ctx):
    from math import factorial

    bad = 0
    for k in range(7):
        n = 2 * k
        expect = factorial(n) // (2**k * factorial(k))
        bad += abs(len(wick.enumerate_pairings(n)) - expect) + abs(wick.pairing_count(n) - expect)
    return float(bad)


def _permutation_rules(ctx):
    bad = 0
    labels = (0, 1, 4, 5, 9)  # two bosons and three fermions
    for n in range(1, 6):
        for kappas in product(labels, repeat=n):
            for perm in permutations(range(n)):
                bad += wick.permutation_sign(kappas, perm) != _brute_sign(kappas, perm)
    return float(bad)


def _link4_signs(ctx):
    bad = 0
    for kappas, expect in (((4, 5, 6, 7), [1, -1, 1]), ((0, 1, 2, 3), [1, 1, 1]), ((0, 4, 1, 5), [1, 1, -1])):
        bad += [pl.sign for pl in wick.enumerate_pairings(4, kappas)] != expect
    return float(bad)


def _fermion_antisymmetry(ctx):
    model = ctx.model

    def one():
        p = kinematics.random_momentum(ctx.rng, model.mass)
        q = kinematics.random_momentum(ctx.rng, model.mass)
        # distinct indices, one from each conjugate block per pair
        a, c = ctx.rng.permutation(np.arange(4, 8))[:2]
        b, d = ctx.rng.permutation(np.arange(8, 12))[:2]
        legs = [
            wick.IndexedLeg(p, int(a), "in"),
            wick.IndexedLeg(p, int(b), "out"),
            wick.IndexedLeg(q, int(c), "in"),
            wick.IndexedLeg(q, int(d), "out"),
        ]
        swapped = [legs[1], legs[0], legs[2], legs[3]]
        v = wick.free_npoint(legs, model).value
        w = wick.free_npoint(swapped, model).value
        return abs(v + w) / max(1.0, abs(v))

    return _worst(ctx, one)


def _hankel(ctx):
    def one():
        n = int(ctx.rng.integers(1, 6))
        meas = wick.DiscreteMeasure(ctx.rng.uniform(-2, 2, n), ctx.rng.uniform(0.1, 1, n))
        H = wick.hankel_matrix(wick.moments(meas, 8))
        return max(0.0, -float(np.linalg.eigvalsh(H).min())) / max(1.0, float(np.abs(H).max()))

    return _worst(ctx, one)


# scattering


def random_compton_kinematics(rng, m: float = 1.0):
    rho = float(np.exp(rng.uniform(np.log(1e-3), np.log(10.0))))
    theta = float(rng.uniform(0.05, np.pi - 0.05))
    phi = float(rng.uniform(0, 2 * np.pi))
    pols = rng.integers(0, 2, size=4)
    return scattering.compton_kinematics(rho, theta, m, *map(int, pols), phi=phi), rho, theta


def _s_channel(ctx):
    def one():
        kin, *_ = random_compton_kinematics(ctx.rng, ctx.mass)
        r = scattering.verify_s_channel(kin, tol=np.inf)
        return max(r["reconstruction"], max(0.0, -r["min_eigenvalue"]))

    return _worst(ctx, one)


def _u_channel(ctx):
    def one():
        kin, *_ = random_compton_kinematics(ctx.rng, ctx.mass)
        r = scattering.verify_u_channel(kin, tol=np.inf)
        return max(
            r["factor16_residual"],
            r["selected_block_residual"],
            r["structure_residual"],
            max(0.0, r["max_eigenvalue"], r["contracted_max"]),
        )

    return _worst(ctx, one)


def _rest_identity(ctx):
    kin, *_ = random_compton_kinematics(ctx.rng, ctx.mass)
    return scattering.verify_rest_frame_identity(kin, trials=1, rng=ctx.rng, tol=np.inf)["rest"]


def _transported_identity(ctx):
    kin, *_ = random_compton_kinematics(ctx.rng, ctx.mass)
    return scattering.verify_rest_frame_identity(kin, trials=ctx.trials, rng=ctx.rng, tol=np.inf)["transported"]


def _u_deviation(ctx):
    def one():
        kin, rho, theta = random_compton_kinematics(ctx.rng, ctx.mass)
        return abs(scattering.u_channel_deviation(kin) - scattering.fractional_error(rho, theta, ctx.mass))

    return _worst(ctx, one)


def _positivity(ctx):
    def one():
        grid = scattering.random_transverse_grid(ctx.rng, ctx.mass)
        r = scattering.connected_four_point_positivity(grid, ctx.mass, tol=np.inf)
        return max(0.0, -r["value"] / r["scale"], r["residual"])

    return _worst(ctx, one)


CHECKS: dict[str, list[tuple[str, Callable, float | None]]] = {
    "kinematics": [
        ("lorentz_homomorphism", _homomorphism, None),
        ("pauli_transport", _pauli_transport, None),
        ("metric_preserved", _metric_preserved, None),
        ("polar_decomposition", _polar_decomposition, None),
        ("mass_shell", _mass_shell, None),
    ],
    "dirac": [
        ("clifford", _clifford, 0.0),
        ("R_eigenvalues", _R_eigenvalues, 1e-10),
        ("R_transport", _R_transport, None),
        ("sp_slash_transport", _sp_clause("slash_transport"), None),
        ("sp_gamma_star_left", _sp_clause("gamma_star_left"), None),
        ("sp_gamma_star_right", _sp_clause("gamma_star_right"), None),
        ("sp_gamma0_invariance", _sp_clause("gamma0_invariance"), None),
        ("R_factor", _R_factor, 1e-10),
    ],
    "fields": [(name, _condition(name), None) for name in fields.CONDITION_ORDER]
    + [
        ("DM_spectrum", _DM_spectrum, 1e-10),
        ("spin_sums", _spin_sums, None),
        ("photon_completeness", _photon_completeness, None),
    ],
    "wick": [
        ("pairing_counts", _pairing_counts, 0.0),
        ("permutation_rules", _permutation_rules, 0.0),
        ("link4_signs", _link4_signs, 0.0),
        ("fermion_antisymmetry", _fermion_antisymmetry, None),
        ("hankel_psd", _hankel, 1e-10),
    ],
    "scattering": [
        ("s_channel_psd", _s_channel, 1e-10),
        ("u_channel_nsd", _u_channel, 1e-10),
        ("rest_identity", _rest_identity, 1e-12),
        ("transported_identity", _transported_identity, None),
        ("u_channel_deviation", _u_deviation, 1e-10),
        ("four_point_positivity", _positivity, 1e-10),
    ],
}


def run_suite(suite: str, ctx: Context) -> list[CheckRow]:
    """Run one suite (or ``"all"``) and return one row per identity."""
    names = SUITES if suite == "all" else (suite,)
    rows = []
    for s in names:
        for ident, fn, tol in CHECKS[s]:
            tol = ctx.tol if tol is None else tol
            try:
                rows.append(CheckRow(s, ident, float(fn(ctx)), tol))
            except QFTVerifyError as exc:
                rows.append(CheckRow(s, ident, float("nan"), tol, type(exc).__name__))
    return rows
