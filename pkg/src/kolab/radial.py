"""Regular radial solutions of the scalar equation and of the coupled systems.

Each component ``y`` with diffusion exponent ``p`` and weight ``a`` is carried
through its normalized flux

    M = r^(N-1) |y'|^(p-2) y' / r^(N+a),

integrated in ``t = ln r``.  In these variables the degenerate origin is a
regular point: ``M`` tends to ``forcing(0) / (N+a)`` and

    dy/dt = sign(M) |M|^(1/(p-1)) r^((p+a)/(p-1))
    dM/dt = s * c * source^e - (N+a) M

where ``s = -eps`` is the sign of the forcing in ``div(|y'|^(p-2) y') = ...``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import DegenerateStart, InvalidParams, NotBlownUp, OutOfRange, StepFailure
from .exponents import SystemParams, compute_exponents

BLOWUP_LEVEL = 1e12
START_FACTOR = 1e-8
DEFAULT_SAMPLES = 2000


@dataclass(frozen=True)
class ScalarParams:
    """Parameters of ``Delta_p u = c |x|^sigma u^Q``."""

    n_dim: int
    p: float
    big_q: float
    c: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if int(self.n_dim) != self.n_dim or self.n_dim < 2:
            raise InvalidParams(f"n_dim must be an integer >= 2, got {self.n_dim}")
        object.__setattr__(self, "n_dim", int(self.n_dim))
        if not (1.0 < self.p < self.n_dim):
            raise InvalidParams(f"p must satisfy 1 < p < N={self.n_dim}, got {self.p}")
        if not self.big_q > self.p - 1.0:
            raise InvalidParams(f"Q must satisfy Q > p-1={self.p - 1.0}, got {self.big_q}")
        if not self.c > 0.0:
            raise InvalidParams(f"c must be > 0, got {self.c}")
        if not self.sigma > -self.p:
            raise InvalidParams(f"sigma must satisfy sigma > -p={-self.p}, got {self.sigma}")

    @property
    def ko_exponent(self) -> float:
        """Exponent of the scalar Keller-Osserman envelope, (p+sigma)/(Q+1-p)."""
        return (self.p + self.sigma) / (self.big_q + 1.0 - self.p)


@dataclass(frozen=True)
class SolutionStatus:
    kind: str  # "completed" | "blowup" | "extinct"
    radius: float
    bracket: Optional[tuple[float, float]] = None


@dataclass(frozen=True)
class RadialSolution:
    params: object
    r: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    u0: Optional[float]
    v0: Optional[float]
    status: SolutionStatus
    integrator_stats: dict = field(default_factory=dict)

    @property
    def is_scalar(self) -> bool:
        return isinstance(self.params, ScalarParams)

    @cached_property
    def _splines(self):
        out = {"u": _monotone_hermite(self.r, self.u, self.du)}
        if self.v.size:
            out["v"] = _monotone_hermite(self.r, self.v, self.dv)
        return out


# -- problem description shared by the scalar and system solvers -----------


@dataclass(frozen=True)
class _Component:
    p: float
    a: float
    sign: float  # sign of the forcing in div(|y'|^(p-2) y')
    coeff: float
    source: int
    power: float


def _components(params) -> list[_Component]:
    if isinstance(params, ScalarParams):
        return [_Component(params.p, params.sigma, 1.0, params.c, 0, params.big_q)]
    e1, e2 = params.eps
    return [
        _Component(params.p, params.a, -float(e1), 1.0, 1, params.delta),
        _Component(params.q, params.b, -float(e2), 1.0, 0, params.mu),
    ]


def _length_scale(params, y0: Sequence[float]) -> float:
    """Intrinsic radius of the data, from the scaling symmetry of the model."""
    if isinstance(params, ScalarParams):
        u0 = y0[0]
        if u0 <= 0:
            return 1.0
        return (u0 ** (params.big_q + 1.0 - params.p) * params.c) ** (-1.0 / (params.p + params.sigma))
    exps = compute_exponents(params)
    if not exps.big_d > 0:
        return 1.0
    s = 0.0
    if y0[0] > 0:
        s = max(s, y0[0] ** (1.0 / exps.gamma_ab))
    if y0[1] > 0:
        s = max(s, y0[1] ** (1.0 / exps.xi_ab))
    return 1.0 / s if s > 0 else 1.0


def _startup(comps, n_dim, y0, r, refine=True):
    """Leading-order state (y, M, y') at radius r.

    With ``refine`` a component whose forcing vanishes at the origin picks up
    the forcing generated by the other component's own leading growth.
    """
    y0 = np.asarray(y0, dtype=float)
    m = np.array([c.sign * c.coeff * max(y0[c.source], 0.0) ** c.power / (n_dim + c.a)
                  for c in comps])
    kappa = np.zeros(len(comps))
    if refine:
        base = m.copy()
        for i, c in enumerate(comps):
            j = c.source
            if base[i] == 0.0 and j != i and base[j] > 0.0:
                cj = comps[j]
                k_j = (cj.p + cj.a) / (cj.p - 1.0)
                amp = (cj.p - 1.0) / (cj.p + cj.a) * base[j] ** (1.0 / (cj.p - 1.0))
                kappa[i] = k_j * c.power
                m[i] = (c.sign * c.coeff * amp ** c.power / (n_dim + c.a + kappa[i])
                        * r ** kappa[i])
    y = y0.copy()
    dy = np.zeros(len(comps))
    for i, c in enumerate(comps):
        if m[i] == 0.0:
            continue
        k = (c.p + c.a) / (c.p - 1.0)
        y[i] += (np.sign(m[i]) * (c.p - 1.0) / (kappa[i] + c.p + c.a)
                 * abs(m[i]) ** (1.0 / (c.p - 1.0)) * r ** k)
        dy[i] = np.sign(m[i]) * (abs(m[i]) * r ** (1.0 + c.a)) ** (1.0 / (c.p - 1.0))
    return y, m, dy


def series_startup(params: SystemParams, u0: float, v0: float, r_start: float):
    """Leading-order values (u, v, du, dv) at ``r_start`` for regular data.

    u = u0 + s1 (p-1)/(p+a) (v0^delta/(N+a))^(1/(p-1)) r^((p+a)/(p-1)) and
    symmetrically for v; valid while the correction stays below ~1e-8 of the
    data scale, i.e. ``r_start`` <= 1e-8 times the intrinsic length.
    """
    if u0 == 0 and v0 == 0:
        raise DegenerateStart("series startup is undefined for u0 = v0 = 0")
    if u0 < 0 or v0 < 0:
        raise InvalidParams("initial data must be nonnegative")
    comps = _components(params)
    y, _, dy = _startup(comps, params.n_dim, [u0, v0], r_start, refine=False)
    return float(y[0]), float(y[1]), float(dy[0]), float(dy[1])


# -- integration ------------------------------------------------------------


def _make_rhs(comps, n_dim):
    n = len(comps)
    p = np.array([c.p for c in comps])
    a = np.array([c.a for c in comps])
    sgn = np.array([c.sign * c.coeff for c in comps])
    src = np.array([c.source for c in comps])
    pw = np.array([c.power for c in comps])
    k = (p + a) / (p - 1.0)
    inv = 1.0 / (p - 1.0)
    na = n_dim + a

    def rhs(t, s):
        y, m = s[:n], s[n:]
        out = np.empty_like(s)
        out[:n] = np.sign(m) * np.abs(m) ** inv * np.exp(k * t)
        out[n:] = sgn * np.maximum(y[src], 0.0) ** pw - na * m
        return out

    return rhs


def _derivs(comps, t, m):
    r = np.exp(t)
    out = []
    for i, c in enumerate(comps):
        out.append(np.sign(m[i]) * (np.abs(m[i]) * r ** (1.0 + c.a)) ** (1.0 / (c.p - 1.0)))
    return out


def _integrate(params, y0, r_max, tol, n_samples):
    if not (1e-14 < tol < 1e-3):
        raise InvalidParams(f"tol must lie in (1e-14, 1e-3), got {tol}")
    if r_max <= 0:
        raise InvalidParams("r_max must be positive")
    y0 = [float(x) for x in y0]
    if any(x < 0 for x in y0):
        raise InvalidParams("initial data must be nonnegative")
    comps = _components(params)
    n = len(comps)
    length = _length_scale(params, y0)
    r_start = START_FACTOR * min(length, r_max)

    if all(x == 0.0 for x in y0):
        r = np.geomspace(r_start, r_max, n_samples)
        z = np.zeros_like(r)
        return _pack(params, r, [z] * n, [z] * n, y0,
                     SolutionStatus("completed", r_max), {"nfev": 0, "r_start": r_start})

    ys, ms, _ = _startup(comps, params.n_dim, y0, r_start)
    t0, t1 = math.log(r_start), math.log(r_max)
    rhs = _make_rhs(comps, params.n_dim)

    def blowup(t, s):
        return np.max(s[:n]) - BLOWUP_LEVEL

    blowup.terminal = True
    blowup.direction = 1
    events = [blowup]
    for i in range(n):
        def extinct(t, s, i=i):
            return s[i]
        extinct.terminal = True
        extinct.direction = -1
        events.append(extinct)

    sol = solve_ivp(rhs, (t0, t1), np.concatenate([ys, ms]), method="DOP853",
                    rtol=tol, atol=1e-250, dense_output=True, events=events)
    if sol.status == -1:
        raise StepFailure(f"integration failed: {sol.message}", last_radius=float(math.exp(sol.t[-1])))

    t_end = float(sol.t[-1])
    status = SolutionStatus("completed", math.exp(t_end))
    stats = {"nfev": int(sol.nfev), "naccepted": int(sol.t.size - 1), "r_start": r_start,
             "length_scale": length}
    if sol.status == 1:
        if sol.t_events[0].size:
            bracket, tail = _blowup_bracket(comps, params.n_dim, t_end, sol.y[:, -1], tol)
            status = SolutionStatus("blowup", 0.5 * (bracket[0] + bracket[1]), bracket)
            stats.update(tail)
        else:
            status = SolutionStatus("extinct", math.exp(t_end))

    t_grid = _sample_grid(sol.sol, t0, t_end, sol.t, n, n_samples)
    states = sol.sol(t_grid)
    states[:, 0] = np.concatenate([ys, ms])
    states[:, -1] = sol.y[:, -1]
    ders = _derivs(comps, t_grid, states[n:])
    ys_out = [_monotone_clean(np.maximum(states[i], 0.0), ders[i]) for i in range(n)]
    return _pack(params, np.exp(t_grid), ys_out, ders, y0, status, stats)


def _monotone_clean(y, dy):
    """Remove dense-output wiggles below the tolerance where the slope sign is fixed.

    The slope sign comes from the integrated flux, so it is exact; near the
    origin increments of y fall under one ulp and the interpolant can dip.
    """
    if np.all(dy >= 0):
        return np.maximum.accumulate(y)
    if np.all(dy <= 0):
        return np.minimum.accumulate(y)
    return y


def _sample_grid(dense, t0, t1, steps, n, n_samples):
    """Grid uniform in arclength of (ln r, sum ln(1+y)); resolves blow-up layers."""
    fine = np.union1d(np.linspace(t0, t1, 8 * n_samples), steps)
    ys = dense(fine)[:n]
    g = np.sum(np.log1p(np.abs(ys)), axis=0)
    arc = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(fine), np.diff(g)))])
    grid = np.interp(np.linspace(0.0, arc[-1], n_samples), arc, fine)
    grid[0], grid[-1] = t0, t1
    return np.unique(grid)


def _pack(params, r, ys, ders, y0, status, stats):
    def frozen(x):
        x = np.array(x, dtype=float)
        x.setflags(write=False)
        return x

    empty = frozen(np.empty(0))
    scalar = len(ys) == 1
    return RadialSolution(
        params=params,
        r=frozen(r),
        u=frozen(ys[0]),
        v=empty if scalar else frozen(ys[1]),
        du=frozen(ders[0]),
        dv=empty if scalar else frozen(ders[1]),
        u0=y0[0],
        v0=None if scalar else y0[1],
        status=status,
        integrator_stats=stats,
    )


def _blowup_bracket(comps, n_dim, t_b, state, tol):
    """Continue past the threshold in log variables until the radius settles.

    The independent variable becomes tau = ln(y_c) of the component that
    crossed the threshold; all unknowns are logarithms, so nothing overflows
    however far tau is pushed.  dt/dtau decays like exp(-tau/k) near the
    singularity, which gives the remaining distance ~ k dt/dtau.
    """
    n = len(comps)
    ys, ms = state[:n], state[n:]
    c_idx = int(np.argmax(ys))
    t_b = float(t_b)
    if np.any(ys <= 0) or np.any(ms == 0):
        # cannot switch to logs; fall back to a one-step local estimate
        dy = _derivs(comps, np.array([t_b]), ms[:, None])
        r = math.exp(t_b)
        width = ys[c_idx] / max(float(dy[c_idx][0]), 1e-300)
        return (r, r + width), {"tail": "local"}

    sm = np.sign(ms)
    p = np.array([c.p for c in comps])
    a = np.array([c.a for c in comps])
    coef = np.array([c.sign * c.coeff for c in comps])
    src = np.array([c.source for c in comps])
    pw = np.array([c.power for c in comps])
    k = (p + a) / (p - 1.0)
    na = n_dim + a

    def dt_ddt(t, ly, lm):
        dly = sm * np.exp(lm / (p - 1.0) + k * t - ly)
        dlm = coef * sm * np.exp(pw * ly[src] - lm) - na
        return dly, dlm

    def rhs(tau, s):
        t, ly, lm = s[0], s[1:n + 1], s[n + 1:]
        dly, dlm = dt_ddt(t, ly, lm)
        dtdtau = 1.0 / dly[c_idx]
        return np.concatenate([[dtdtau], dly * dtdtau, dlm * dtdtau])

    floor = 1e-3 * min(tol, 1e-7)

    def settled(tau, s):
        t, ly, lm = s[0], s[1:n + 1], s[n + 1:]
        dly, _ = dt_ddt(t, ly, lm)
        return 1.0 / dly[c_idx] - floor

    settled.terminal = True
    settled.direction = -1
    s0 = np.concatenate([[t_b], np.log(ys), np.log(np.abs(ms))])
    tau0 = float(s0[1 + c_idx])
    sol = solve_ivp(rhs, (tau0, tau0 + 20000.0), s0, method="DOP853", rtol=1e-10,
                    atol=1e-12, events=[settled], dense_output=True)
    tau_end = float(sol.t[-1])
    t_end = float(sol.y[0, -1])
    s_end = sol.y[:, -1]
    rate_end = rhs(tau_end, s_end)[0]
    s_prev = sol.sol(tau_end - 1.0)
    rate_prev = rhs(tau_end - 1.0, s_prev)[0]
    ratio = rate_prev / rate_end if rate_end > 0 else math.inf
    k_est = 1.0 / math.log(ratio) if ratio > 1.0 else 1e3
    remaining = 2.0 * k_est * rate_end + 1e-15
    r_lo = math.exp(t_end)
    r_hi = math.exp(t_end + remaining)
    return (r_lo, r_hi), {"tail": "log", "tail_level_log10": tau_end / math.log(10.0),
                          "tail_exponent": k_est}


def solve_regular(params: SystemParams, u0: float, v0: float, r_max: float = 1e4,
                  tol: float = 1e-10, n_samples: int = DEFAULT_SAMPLES) -> RadialSolution:
    """Regular radial solution with u(0)=u0, v(0)=v0 and zero slopes at 0.

    Integration stops at ``r_max``, when max(u, v) exceeds 1e12 (blow-up,
    bracketed by a continuation in log variables) or when a profile reaches 0
    (extinct).
    """
    return _integrate(params, [u0, v0], r_max, tol, n_samples)


def solve_scalar(sc: ScalarParams, u0: float, r_max: float = 1e4, tol: float = 1e-10,
                 n_samples: int = DEFAULT_SAMPLES) -> RadialSolution:
    return _integrate(sc, [u0], r_max, tol, n_samples)


def blowup_radius(sol: RadialSolution) -> tuple[float, float]:
    if sol.status.kind != "blowup" or sol.status.bracket is None:
        raise NotBlownUp(f"solution status is {sol.status.kind}")
    return sol.status.bracket


# -- residual oracle ----------------------------------------------------------


def centered_derivative(x, f):
    """Five-point Lagrange derivative at interior nodes (nonuniform grid).

    Returns derivative at x[2:-2]; three-point stencils if fewer than five
    nodes are available.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    width = 5 if x.size >= 5 else 3
    half = width // 2
    idx = np.arange(half, x.size - half)
    offs = np.stack([x[idx + j] - x[idx] for j in range(-half, half + 1)], axis=1)
    vals = np.stack([f[idx + j] for j in range(-half, half + 1)], axis=1)
    w = np.zeros_like(offs)
    for kk in range(width):
        others = [m for m in range(width) if m != kk]
        denom = np.prod([offs[:, kk] - offs[:, m] for m in others], axis=0)
        num = np.zeros(offs.shape[0])
        for m in others:
            rest = [l for l in others if l != m]
            num += np.prod([-offs[:, l] for l in rest], axis=0)
        w[:, kk] = num / denom
    return np.sum(w * vals, axis=1), idx


def _flux(r, dy, p, n_dim):
    return np.sign(dy) * np.abs(dy) ** (p - 1.0) * r ** (n_dim - 1.0)


def _flux_derivative(r, flux):
    direct, idx = centered_derivative(r, flux)
    with np.errstate(divide="ignore", invalid="ignore"):
        logd, _ = centered_derivative(np.log(r), np.log(np.abs(flux)))
        via_log = flux[idx] * logd / r[idx]
    sgn = np.sign(flux)
    width = min(2, (r.size - 1) // 2)
    same = np.ones(idx.size, dtype=bool)
    for k in range(-width, width + 1):
        same &= (sgn[idx + k] == sgn[idx]) & (sgn[idx + k] != 0)
    return np.where(same & np.isfinite(via_log), via_log, direct), idx


def equation_residual(sol: RadialSolution) -> float:
    """Max defect of the divergence-form equations on the samples.

    Where the flux keeps one sign over a stencil it is differenced as
    ln|flux| against ln r (exact for power laws), elsewhere directly.  The defect |(r^(N-1) phi_p(y'))' -+ c r^(N-1+a) src^e| is divided by the
    source term (+1e-30), so it is not meaningful right at an extinction point
    where the source vanishes.
    """
    if sol.r.size < 3:
        raise InvalidParams("need at least 3 samples")
    comps = _components(sol.params)
    n_dim = sol.params.n_dim
    ys = [sol.u] if sol.is_scalar else [sol.u, sol.v]
    ders = [sol.du] if sol.is_scalar else [sol.du, sol.dv]
    worst = 0.0
    for i, c in enumerate(comps):
        flux = _flux(sol.r, ders[i], c.p, n_dim)
        dflux, idx = _flux_derivative(sol.r, flux)
        r = sol.r[idx]
        target = c.coeff * r ** (n_dim - 1.0 + c.a) * np.maximum(ys[c.source][idx], 0.0) ** c.power
        res = np.abs(dflux - c.sign * target) / (target + 1e-30)
        if res.size:
            worst = max(worst, float(np.max(res)))
    return worst


# -- interpolation --------------------------------------------------------------


def _monotone_hermite(x, y, dy):
    """Cubic Hermite on stored slopes, limited (Fritsch-Carlson) to keep monotonicity."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = np.array(dy, dtype=float)
    if x.size < 2:
        return None
    sec = np.diff(y) / np.diff(x)
    for i, s in enumerate(sec):
        if s == 0.0:
            m[i] = 0.0
            m[i + 1] = 0.0
            continue
        al, be = m[i] / s, m[i + 1] / s
        if al < 0.0:
            m[i] = 0.0
            al = 0.0
        if be < 0.0:
            m[i + 1] = 0.0
            be = 0.0
        mag = al * al + be * be
        if mag > 9.0:
            tau = 3.0 / math.sqrt(mag)
            m[i] = tau * al * s
            m[i + 1] = tau * be * s
    return CubicHermiteSpline(x, y, m)


def evaluate(sol: RadialSolution, r):
    """Interpolated (u, v, du, dv) at radius/radii ``r`` inside the sample range."""
    r_arr = np.asarray(r, dtype=float)
    lo, hi = sol.r[0], sol.r[-1]
    if np.any(r_arr < lo * (1 - 1e-14)) or np.any(r_arr > hi * (1 + 1e-14)):
        raise OutOfRange(f"radius outside sampled range [{lo:.6g}, {hi:.6g}]")
    r_arr = np.clip(r_arr, lo, hi)
    sp = sol._splines
    u = sp["u"](r_arr)
    du = sp["u"](r_arr, 1)
    if "v" in sp:
        v = sp["v"](r_arr)
        dv = sp["v"](r_arr, 1)
    else:
        v = np.full_like(u, np.nan)
        dv = np.full_like(u, np.nan)
    if np.ndim(r) == 0:
        return float(u), float(v), float(du), float(dv)
    return u, v, du, dv


def sample_particular(params: SystemParams, part, r_min=1e-3, r_max=1.0, n_samples=4000) -> RadialSolution:
    """Analytic particular pair sampled on a log grid, packed as a solution."""
    r = np.geomspace(r_min, r_max, n_samples)
    return _pack(params, r, [part.u(r), part.v(r)], [part.du(r), part.dv(r)],
                 [math.inf, math.inf], SolutionStatus("completed", r_max), {"source": "particular"})
