"""Exponent arithmetic, regime flags and power-law particular solutions.

The systems handled here are, in radial form,

    -Delta_p u = eps1 * |x|^a * v^delta
    -Delta_q v = eps2 * |x|^b * u^mu

with (eps1, eps2) fixed by the :class:`Kind`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParams, RegimeError

#: strict inequalities in regime tests use this absolute margin
REGIME_TOL = 1e-12


class Kind(str, enum.Enum):
    ABSORPTION = "absorption"
    MIXED = "mixed"
    SOURCE = "source"

    @property
    def eps(self) -> tuple[int, int]:
        return {
            Kind.ABSORPTION: (-1, -1),
            Kind.MIXED: (-1, 1),
            Kind.SOURCE: (1, 1),
        }[self]


@dataclass(frozen=True)
class SystemParams:
    n_dim: int
    p: float
    q: float
    delta: float
    mu: float
    a: float = 0.0
    b: float = 0.0
    kind: Kind = Kind.ABSORPTION

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        n = self.n_dim
        if int(n) != n or n < 2:
            raise InvalidParams(f"n_dim must be an integer >= 2, got {n}")
        object.__setattr__(self, "n_dim", int(n))
        for name in ("p", "q"):
            val = getattr(self, name)
            if not (1.0 < val < n):
                raise InvalidParams(f"{name} must satisfy 1 < {name} < N={n}, got {val}")
        for name in ("delta", "mu"):
            val = getattr(self, name)
            if not val > 0.0:
                raise InvalidParams(f"{name} must be > 0, got {val}")
        if not self.a > -self.p:
            raise InvalidParams(f"a must satisfy a > -p={-self.p}, got {self.a}")
        if not self.b > -self.q:
            raise InvalidParams(f"b must satisfy b > -q={-self.q}, got {self.b}")

    @property
    def eps(self) -> tuple[int, int]:
        return self.kind.eps

    def swapped(self) -> "SystemParams":
        """Exchange the roles (u, p, a, delta) <-> (v, q, b, mu)."""
        return replace(self, p=self.q, q=self.p, delta=self.mu, mu=self.delta, a=self.b, b=self.a)


@dataclass(frozen=True)
class ExponentSet:
    big_d: float
    gamma_ab: float
    xi_ab: float
    gamma0: float
    xi0: float
    harmonic_p: float
    harmonic_q: float


@dataclass(frozen=True)
class RegimeFlags:
    d_positive: bool
    gamma_supercritical: bool
    xi_supercritical: bool
    mu_below_qb: bool
    mu_above_nb: bool
    delta_below_na: bool
    delta_above_pa: bool
    particular_exists: bool


@dataclass(frozen=True)
class ParticularSolution:
    a_star: float
    b_star: float
    gamma_ab: float
    xi_ab: float

    def u(self, r):
        return self.a_star * np.power(r, -self.gamma_ab)

    def v(self, r):
        return self.b_star * np.power(r, -self.xi_ab)

    def du(self, r):
        return -self.gamma_ab * self.a_star * np.power(r, -self.gamma_ab - 1.0)

    def dv(self, r):
        return -self.xi_ab * self.b_star * np.power(r, -self.xi_ab - 1.0)


def big_d(params: SystemParams) -> float:
    return params.delta * params.mu - (params.p - 1.0) * (params.q - 1.0)


def compute_exponents(params: SystemParams) -> ExponentSet:
    """Evaluate D, the weighted singular exponents and the harmonic exponents.

    When D = 0 the singular exponents are reported as ``nan``; a negative D
    gives (meaningless but finite) negative-denominator values.
    """
    n, p, q = params.n_dim, params.p, params.q
    delta, mu, a, b = params.delta, params.mu, params.a, params.b
    d = big_d(params)

    def ratio(num):
        return num / d if d != 0.0 else math.nan

    return ExponentSet(
        big_d=d,
        gamma_ab=ratio((p + a) * (q - 1.0) + (q + b) * delta),
        xi_ab=ratio((q + b) * (p - 1.0) + (p + a) * mu),
        gamma0=ratio(p * (q - 1.0) + q * delta),
        xi0=ratio(q * (p - 1.0) + p * mu),
        harmonic_p=(n - p) / (p - 1.0),
        harmonic_q=(n - q) / (q - 1.0),
    )


def classify_regimes(params: SystemParams, exps: ExponentSet) -> RegimeFlags:
    n, p, q = params.n_dim, params.p, params.q
    delta, mu, a, b = params.delta, params.mu, params.a, params.b
    d_pos = exps.big_d > 0.0
    g_sup = exps.gamma_ab > exps.harmonic_p + REGIME_TOL
    x_sup = exps.xi_ab > exps.harmonic_q + REGIME_TOL
    x_sub = exps.xi_ab < exps.harmonic_q - REGIME_TOL

    if not d_pos:
        exists = False
    elif params.kind is Kind.ABSORPTION:
        exists = g_sup and x_sup
    elif params.kind is Kind.MIXED:
        exists = g_sup and x_sub
    else:
        exists = False

    return RegimeFlags(
        d_positive=d_pos,
        gamma_supercritical=exps.gamma_ab > exps.harmonic_p,
        xi_supercritical=exps.xi_ab > exps.harmonic_q,
        mu_below_qb=mu < (q + b) * (p - 1.0) / (n - p),
        mu_above_nb=mu > (n + b) * (p - 1.0) / (n - p),
        delta_below_na=delta < (n + a) * (q - 1.0) / (n - q),
        delta_above_pa=delta > (p + a) * (q - 1.0) / (n - q),
        particular_exists=exists,
    )


def particular_coefficients(params: SystemParams, exps: ExponentSet | None = None) -> ParticularSolution:
    """Amplitudes A*, B* of the exact pair (A* r^-gamma, B* r^-xi).

    Plugging the power ansatz into the radial operator gives

        (A gamma)^(p-1) (p-1) |gamma - h_p| = B^delta
        (B xi)^(q-1)    (q-1) |xi - h_q|    = A^mu

    which is linear in (log A, log B) with determinant D.
    """
    if exps is None:
        exps = compute_exponents(params)
    flags = classify_regimes(params, exps)
    if not flags.particular_exists:
        raise RegimeError(
            f"no positive particular solution for kind={params.kind.value} "
            f"(gamma_ab={exps.gamma_ab:.6g}, h_p={exps.harmonic_p:.6g}, "
            f"xi_ab={exps.xi_ab:.6g}, h_q={exps.harmonic_q:.6g}, D={exps.big_d:.6g})"
        )
    p, q, delta, mu = params.p, params.q, params.delta, params.mu
    g, x = exps.gamma_ab, exps.xi_ab
    c1 = (p - 1.0) * abs(g - exps.harmonic_p)
    c2 = (q - 1.0) * abs(x - exps.harmonic_q)
    mat = np.array([[p - 1.0, -delta], [mu, -(q - 1.0)]])
    rhs = np.array([
        -(p - 1.0) * math.log(g) - math.log(c1),
        (q - 1.0) * math.log(x) + math.log(c2),
    ])
    log_a, log_b = np.linalg.solve(mat, rhs)
    return ParticularSolution(
        a_star=math.exp(log_a), b_star=math.exp(log_b), gamma_ab=g, xi_ab=x
    )
