"""Equivalent nonrelativistic potentials for the distinguishable-particle amplitude."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import QuadratureFailure
from .kinematics import minkowski_dot

TWO_PI = 2 * np.pi
_XG, _WG = np.polynomial.legendre.leggauss(48)


@dataclass(frozen=True)
class YukawaSpec:
    delta: float
    epsilon: float
    alpha: float
    c4: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        if self.delta <= 0 or self.epsilon <= 0:
            raise ValueError("delta and epsilon must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.m <= 0:
            raise ValueError("mass must be positive")

    @property
    def near_constant(self) -> bool:
        """``alpha << delta^2 epsilon^2`` (taken as a factor of 10)."""
        return self.alpha * 10 <= (self.delta * self.epsilon) ** 2

    @property
    def yukawa_onset(self) -> float:
        """Distance where ``exp(-r/delta)`` equals ``alpha exp(-epsilon r)``."""
        return -self.delta * np.log(self.alpha) / (1 - self.epsilon * self.delta)

    @property
    def strength(self) -> float:
        return 16 * np.pi**5 * self.alpha * self.c4 / (self.m * self.delta) ** 2


def u_s(spec: YukawaSpec, q):
    """Multiplier at 3-momentum magnitude ``q``: ``U_s(0, 2q)``."""
    q2 = np.square(q)
    d2 = spec.delta**2
    return 1 / (1 + d2 * q2) + spec.alpha / (d2 * (spec.epsilon**2 + q2))


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a = np.where(t > 0, np.exp(-1 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1 / np.where(t < 1, 1 - t, 1.0)), 0.0)
    return a / (a + b)


def u_s_invariant(spec: YukawaSpec, k) -> float:
    """Invariant form at four-vector argument ``k = 2p``.

    ``x = -k.k / 4`` equals ``q^2`` for ``k = (0, 2q)``. The step cutting off
    ``x <= 0`` is a smooth ramp of width ``1e-3 epsilon^2``.
    """
    x = -minkowski_dot(k, k) / 4
    width = 1e-3 * spec.epsilon**2
    ramp = _smooth_step(x / width)
    if ramp == 0:
        return 0.0
    return float(u_s(spec, np.sqrt(x)) * ramp)


def wynn_epsilon(s):
    """Wynn epsilon extrapolation of partial sums; returns ``(limit, error estimate)``."""
    e_prev = np.zeros(len(s) + 1)
    e_cur = np.asarray(s, dtype=float)
    best, best_err = e_cur[-1], abs(e_cur[-1] - e_cur[-2])
    k = 0
    while len(e_cur) >= 2:
        d = np.diff(e_cur)
        if np.any(d == 0) or not np.all(np.isfinite(d)):
            break
        e_prev, e_cur = e_cur, e_prev[1 : len(e_cur)] + 1 / d
        k += 1
        if k % 2 == 0 and len(e_cur) >= 2:
            err = abs(e_cur[-1] - e_cur[-2])
            if err < best_err:
                best, best_err = e_cur[-1], err
    return float(best), float(best_err)


def sine_integral(phi, r: float, scale: float = 1.0, n_tail: int = 40, rtol: float = 1e-8) -> float:
    """``int_0^inf q phi(q) sin(q r) dq``.

    Finite oscillatory-weight quadrature up to a zero of ``sin(q r)`` past
    ``40 scale``, then half-period Gauss-Legendre pieces whose alternating
    partial sums are extrapolated.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    f = lambda q: q * phi(q)
    k0 = max(1, int(np.ceil(40 * scale * r / np.pi)))
    b = k0 * np.pi / r
    h = np.pi / r
    # geometric breakpoints inside the first half-period resolve narrow peaks at the origin
    edges = np.concatenate([[0.0], h * 2.0 ** -np.arange(30, -1, -1)])
    if b > h:
        edges = np.append(edges, b)
    head = head_err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for lo_, hi_ in zip(edges[:-1], edges[1:]):
            v, err = quad(f, lo_, hi_, weight="sin", wvar=r, limit=5000, epsabs=1e-17, epsrel=1e-13)
            head += v
            head_err += err
    lo = b + h * np.arange(n_tail)
    x = lo[:, None] + 0.5 * h * (_XG[None, :] + 1)
    fx = f(x)
    # the extrapolation would also sum divergent oscillatory tails (Abel limit), so demand decay
    env = np.abs(fx).max(axis=1)
    if env[-1] > 0 and env[-1] >= env[0]:
        raise QuadratureFailure(f"sine integral at r={r}: integrand does not decay")
    pieces = 0.5 * h * (fx * np.sin(x * r)) @ _WG
    total, tail_err = wynn_epsilon(head + np.cumsum(pieces))
    # error floor relative to the integrand size, not the (possibly tiny) result
    ref = np.abs(f(np.linspace(0, b, 4001)[1:])).max() * h
    if not np.isfinite(total) or head_err + tail_err > max(rtol * abs(total), 1e-12 * ref):
        raise QuadratureFailure(f"sine integral at r={r}: error estimate {head_err + tail_err}")
    return total


def radial_fourier(phi, r: float, scale: float = 1.0, rtol: float = 1e-8) -> float:
    """``int d^3q exp(i q.x) phi(|q|) = (4 pi / r) int_0^inf q phi(q) sin(q r) dq``."""
    return 4 * np.pi / r * sine_integral(phi, r, scale, rtol=rtol)


def _scale(spec: YukawaSpec) -> float:
    return max(1 / spec.delta, spec.epsilon)


def u_s_transform(spec: YukawaSpec, r: float) -> float:
    return radial_fourier(lambda q: u_s(spec, q), r, scale=_scale(spec))


def yukawa_transform(spec: YukawaSpec, r):
    """Closed form ``(2 pi^2 / (delta^2 r)) (exp(-r/delta) + alpha exp(-epsilon r))``."""
    r = np.asarray(r, dtype=float)
    return 2 * np.pi**2 / (spec.delta**2 * r) * (np.exp(-r / spec.delta) + spec.alpha * np.exp(-spec.epsilon * r))


@dataclass(frozen=True)
class PotentialValue:
    value: complex
    magnitude: float
    phase: float


def potential_prefactor(spec: YukawaSpec, p1) -> float:
    """``(2 pi)^3 c4 / m^2`` times the conjugated multiplier at the incident momentum."""
    p = np.linalg.norm(np.asarray(p1, dtype=float))
    return TWO_PI**3 * spec.c4 / spec.m**2 * float(np.conj(u_s(spec, p)))


def equivalent_potential(spec: YukawaSpec, p1, r: float, direction=None, quadrature: bool = True) -> PotentialValue:
    """Potential at ``x = r * direction``; magnitude and phase reported separately.

    The phase is ``-p1.x``; the remaining factor is real and positive.
    """
    p1 = np.asarray(p1, dtype=float)
    if direction is None:
        n = np.linalg.norm(p1)
        direction = p1 / n if n > 0 else np.array([0.0, 0.0, 1.0])
    x = r * np.asarray(direction, dtype=float)
    radial = u_s_transform(spec, r) if quadrature else float(yukawa_transform(spec, r))
    mag = abs(potential_prefactor(spec, p1) * radial)
    phase = float(-p1 @ x)
    return PotentialValue(mag * np.exp(1j * phase), mag, phase)


def potential_profile(spec: YukawaSpec, r) -> np.ndarray:
    """``|V(r)|`` at zero incident momentum from the closed-form transform."""
    return potential_prefactor(spec, np.zeros(3)) * yukawa_transform(spec, r)


def fit_yukawa(r, magnitude):
    """Least-squares fit of ``log(r |V|) = log C - eps r``; returns ``(C, eps)``."""
    r = np.asarray(r, dtype=float)
    slope, intercept = np.polyfit(r, np.log(r * np.asarray(magnitude, dtype=float)), 1)
    return float(np.exp(intercept)), float(-slope)


def reduced_mass(m1: float, m2: float) -> float:
    return m1 * m2 / (m1 + m2)


def potential_transform(spec: YukawaSpec, p1, p3, include_phase: bool = True) -> float:
    """``int d^3x exp(i (p1 - p3).x) V(x)`` by quadrature of the radial profile.

    With the phase ``exp(-i p1.x)`` kept, the transform is evaluated at
    ``|p3|``; treating ``|V|`` as an ordinary potential it is evaluated at the
    momentum transfer ``|p1 - p3|``.
    """
    p1 = np.asarray(p1, dtype=float)
    p3 = np.asarray(p3, dtype=float)
    k = np.linalg.norm(p3) if include_phase else np.linalg.norm(p1 - p3)
    pref = potential_prefactor(spec, p1)
    radial = lambda x: yukawa_transform(spec, np.maximum(x, 1e-300))
    if k == 0:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            val, _ = quad(lambda x: 4 * np.pi * x**2 * radial(x), 0, np.inf, limit=500)
        return pref * val
    return pref * radial_fourier(radial, k, scale=max(1 / spec.epsilon, spec.delta))


def born_cross_section(v_transform: complex, mu: float) -> float:
    """First Born ``|-(mu / 2 pi) int exp(i q.x) V(x) dx|^2``."""
    return float(abs(mu / TWO_PI * v_transform) ** 2)


def rutherford_shape(theta) -> np.ndarray:
    return 1 / np.sin(np.asarray(theta) / 2) ** 4
