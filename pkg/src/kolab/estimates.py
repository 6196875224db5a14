"""Empirical certification of a-priori estimates on computed radial solutions.

Every experiment produces an :class:`EstimateReport`: one record per scale
with the two sides of the inequality and their quotient (the empirical
constant).  A constant is not expected to match anything in particular; the
verdict only asks that it stays within a declared factor across scales.

All ball and annulus integrals are one-dimensional radial quadratures, the
sphere measure being factored out analytically.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, special

from .errors import (HypothesisViolated, InvalidParams, NoBlowUp, RangeError, ZeroDenominator,
                     ZeroPotential)
from .exponents import ParticularSolution, SystemParams, compute_exponents
from .radial import (RadialSolution, ScalarParams, blowup_radius, evaluate, solve_regular,
                     solve_scalar)

BOUNDED, UNBOUNDED, INCONCLUSIVE = "Bounded", "Unbounded", "Inconclusive"

#: quintic smoothstep has max slope 15/8, below this gradient constant
CUTOFF_C0 = 2.5


@dataclass(frozen=True)
class ScaleRecord:
    scale: float
    lhs: float
    rhs: float
    constant: float


@dataclass
class EstimateReport:
    label: str
    records: list
    verdict: str
    ratio_bound: float = 5.0
    notes: dict = field(default_factory=dict)
    secondary_records: list = field(default_factory=list)

    @property
    def constants(self) -> np.ndarray:
        return np.array([rec.constant for rec in self.records], dtype=float)

    @property
    def constant_ratio(self) -> float:
        return _spread(self.constants)


def _spread(consts) -> float:
    c = np.asarray(consts, dtype=float)
    if c.size == 0 or np.any(np.isnan(c)):
        return math.nan
    if np.any(np.isinf(c)) or np.any(c <= 0):
        return math.inf
    return float(np.max(c) / np.min(c))


def _verdict(consts, bound) -> str:
    ratio = _spread(consts)
    if math.isnan(ratio):
        return INCONCLUSIVE
    return BOUNDED if ratio <= bound else UNBOUNDED


def _report(label, records, bound, **kw) -> EstimateReport:
    records = sorted(records, key=lambda rec: rec.scale)
    return EstimateReport(label, records, _verdict([r.constant for r in records], bound), bound, **kw)


# -- Wolff potential ------------------------------------------------------------


def _tail_integral(g, tol, chunk=4.0, x_max=700.0):
    """Integral of g over [0, inf) by chunks; inf when the chunks stop shrinking."""
    total, x, growing, prev = 0.0, 0.0, 0, math.inf
    while x < x_max:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            part, _ = integrate.quad(g, x, x + chunk, epsabs=0.0, epsrel=tol, limit=200)
        if not math.isfinite(part):
            return math.inf
        total += part
        x += chunk
        if part <= tol * 1e-2 * abs(total) or part == 0.0:
            return total
        growing = growing + 1 if part >= prev else 0
        if growing >= 3:
            return math.inf
        prev = part
    return math.inf


def _cap_fraction(s, r, d, t, n_dim):
    """Fraction of the sphere |x| = r inside B(x0, t), |x0| = d > t, with r = d + t s.

    1 - cos(theta_max) = t^2 (1 - s^2) / (2 r d) is formed directly so tiny
    balls far from the origin keep full precision.
    """
    one_minus_c = t * t * (1.0 - s * s) / (2.0 * r * d)
    sin2 = one_minus_c * (2.0 - one_minus_c)
    return 0.5 * float(special.betainc(0.5 * (n_dim - 1.0), 0.5, min(max(sin2, 0.0), 1.0)))


def ball_mean(f: Callable, t: float, n_dim: int, center: float = 0.0, tol: float = 1e-12) -> float:
    """Mean of a radial density over the ball B(x0, t) with |x0| = ``center``.

    Off-center balls must avoid the origin (t < center).
    """
    if center == 0.0:
        return n_dim * _tail_integral(lambda x: math.exp(-n_dim * x) * f(t * math.exp(-x)), tol)
    if not t < center:
        raise InvalidParams("off-center balls must not contain the origin")

    def g(s):
        r = center + t * s
        return f(r) * r ** (n_dim - 1.0) * _cap_fraction(s, r, center, t, n_dim)

    part, _ = integrate.quad(g, -1.0, 1.0, epsabs=0.0, epsrel=max(tol, 1e-13), limit=200)
    # radial integral over the ball normalized by |B_t| / |S^{N-1}| = t^N / N
    return part * t * n_dim / t ** n_dim


def wolff_potential(f: Callable, p: float, rho: float, n_dim: int, quad_tol: float = 1e-12,
                    center: float = 0.0) -> float:
    """W_{1,p}^f(B(x0, rho)) = int_0^rho (t^p mean_{B(x0,t)} f)^(1/(p-1)) dt/t.

    ``f`` is a nonnegative radial density given as a scalar callable of |x|.
    Returns ``inf`` when the integral diverges.
    """
    if not (p > 1.0 and rho > 0.0):
        raise InvalidParams("need p > 1 and rho > 0")
    expo = 1.0 / (p - 1.0)

    def integrand(y):
        t = rho * math.exp(-y)
        m = ball_mean(f, t, n_dim, center, quad_tol)
        if not math.isfinite(m):
            raise OverflowError
        return (t ** p * m) ** expo

    try:
        return _tail_integral(integrand, quad_tol)
    except OverflowError:
        return math.inf


# -- Keller-Osserman envelopes ----------------------------------------------------


def scaling_ray(params: SystemParams, count: int, base=(1.0, 1.0), factor: float = 2.0):
    """Initial data (s^gamma u_b, s^xi v_b), s = factor^k, mapped onto each other by scaling."""
    ex = compute_exponents(params)
    return [(base[0] * factor ** (k * ex.gamma_ab), base[1] * factor ** (k * ex.xi_ab))
            for k in range(count)]


def _solve_pair(params, datum, r_max, tol):
    return solve_regular(params, datum[0], datum[1], r_max=r_max, tol=tol)


def ko_envelope(params: SystemParams, data: Iterable, r_max: float = 1e4, tol: float = 1e-10,
                ratio_bound: float = 5.0, label: str = "ko_envelope", workers: int = 1) -> EstimateReport:
    """Blow-up form of the envelope at the center: u0 * R^gamma for each datum.

    When u0 = 0 the v-side constant v0 * R^xi is recorded instead.  With
    ``workers`` > 1 the solves run in a process pool (order is preserved).
    """
    ex = compute_exponents(params)
    if not ex.big_d > 0:
        raise InvalidParams("envelope needs D > 0")
    data = [tuple(map(float, d)) for d in data]
    solver = partial(_solve_pair, params, r_max=r_max, tol=tol)
    if workers > 1 and len(data) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(solver, data))
    else:
        sols = [solver(d) for d in data]
    records, missing = [], []
    for (u0, v0), sol in zip(data, sols):
        scale = u0 if u0 > 0 else v0
        try:
            if sol.status.kind != "blowup":
                raise NoBlowUp(f"datum ({u0}, {v0}) ended as {sol.status.kind} at r={sol.status.radius:.6g}")
            big_r, _ = blowup_radius(sol)
        except NoBlowUp as exc:
            missing.append(str(exc))
            records.append(ScaleRecord(scale, u0, math.nan, math.nan))
            continue
        const = u0 * big_r ** ex.gamma_ab if u0 > 0 else v0 * big_r ** ex.xi_ab
        records.append(ScaleRecord(scale, u0 if u0 > 0 else v0, big_r, const))
    return _report(label, records, ratio_bound, notes={"no_blowup": missing, "gamma": ex.gamma_ab})


def ko_envelope_scalar(sc: ScalarParams, data: Iterable[float], r_max: float = 1e4, tol: float = 1e-10,
                       ratio_bound: float = 5.0) -> EstimateReport:
    """Scalar envelope constant u0 * c^(1/(Q+1-p)) * R^((p+sigma)/(Q+1-p))."""
    theta = sc.ko_exponent
    records, missing = [], []
    for u0 in data:
        sol = solve_scalar(sc, u0, r_max=r_max, tol=tol)
        if sol.status.kind != "blowup":
            missing.append(f"u0={u0} did not blow up")
            records.append(ScaleRecord(u0, u0, math.nan, math.nan))
            continue
        big_r, _ = blowup_radius(sol)
        const = u0 * sc.c ** (1.0 / (sc.big_q + 1.0 - sc.p)) * big_r ** theta
        records.append(ScaleRecord(u0, u0, big_r, const))
    return _report("ko_envelope_scalar", records, ratio_bound, notes={"no_blowup": missing, "theta": theta})


# -- Harnack ratios ---------------------------------------------------------------


def _profile(profile, component):
    if isinstance(profile, RadialSolution):
        y = getattr(profile, component)
        origin = profile.u0 if component == "u" else profile.v0
        return np.asarray(profile.r), np.asarray(y), origin
    r, y = profile
    return np.asarray(r, dtype=float), np.asarray(y, dtype=float), None


def _ratio(vals):
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if lo <= 0:
        return math.inf
    return hi / lo


def harnack_ratios(profile, radii: Sequence[float], component: str = "u", origin: Optional[float] = None,
                   ratio_bound: float = 5.0) -> EstimateReport:
    """sup/inf of a radial profile over balls B(0, r) (records) and annuli r<=|x|<=2r (secondary).

    ``profile`` is a RadialSolution (with ``component``) or a pair (r, y).
    The value at the origin, when known, enters the ball ratios.
    """
    r, y, known = _profile(profile, component)
    origin = known if origin is None else origin
    if origin is not None and not math.isfinite(origin):
        origin = None
    balls, annuli = [], []
    for rad in radii:
        sel = y[r <= rad * (1 + 1e-12)]
        if origin is not None:
            sel = np.append(sel, origin)
        if sel.size == 0:
            raise RangeError(f"no samples inside B(0, {rad})")
        balls.append(ScaleRecord(rad, float(np.max(sel)), float(np.min(sel)), _ratio(sel)))
        ring = (r >= rad * (1 - 1e-12)) & (r <= 2 * rad * (1 + 1e-12))
        if np.any(ring):
            vals = y[ring]
            annuli.append(ScaleRecord(rad, float(np.max(vals)), float(np.min(vals)), _ratio(vals)))
    return _report(f"harnack[{component}]", balls, ratio_bound,
                   secondary_records=sorted(annuli, key=lambda rec: rec.scale))


# -- punctual ratio ---------------------------------------------------------------


def punctual_ratio(sol, params: Optional[SystemParams] = None, r=None, ratio_bound: float = 5.0,
                   decades: float = 2.0) -> EstimateReport:
    """r^(q+b) u^mu / v^(q-1) recorded per dyadic shell.

    Bounded iff the shell maxima are finite and within ``ratio_bound`` over the
    ``decades`` nearest to r = 0.
    """
    if isinstance(sol, ParticularSolution):
        if params is None or r is None:
            raise InvalidParams("a particular solution needs params and radii")
        r = np.asarray(r, dtype=float)
        u, v = sol.u(r), sol.v(r)
    else:
        params = params or sol.params
        r, u, v = sol.r, sol.u, sol.v
    if np.any(v <= 0):
        raise ZeroDenominator("v vanishes on the sampled range")
    g = r ** (params.q + params.b) * np.maximum(u, 0.0) ** params.mu / v ** (params.q - 1.0)
    r_min = float(r[0])
    n_shells = max(int(math.floor(math.log2(r[-1] / r_min) + 1e-9)), 1)
    records = []
    for k in range(n_shells):
        lo, hi = r_min * 2.0 ** k, r_min * 2.0 ** (k + 1)
        sel = (r >= lo) & (r <= hi)
        if np.any(sel):
            records.append(ScaleRecord(lo, float(np.max(g[sel])), float(np.min(g[sel])), float(np.max(g[sel]))))
    near = [rec.constant for rec in records if rec.scale < r_min * 10.0 ** decades]
    rep = _report("punctual_ratio", records, ratio_bound, notes={"values": g})
    rep.verdict = _verdict(near, ratio_bound)
    rep.notes["near_zero_ratio"] = _spread(near)
    return rep


# -- Caccioppoli-type integral estimate -----------------------------------------


def smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)


def cutoff_power(p: float, ell: float) -> float:
    """lambda = p * theta' with theta = ell / (alpha + p - 1), alpha = min(1, ell + 1 - p) / 2."""
    if not ell > p - 1.0:
        raise InvalidParams(f"need ell > p - 1, got ell={ell}")
    alpha = 0.5 * min(1.0, ell + 1.0 - p)
    theta = ell / (alpha + p - 1.0)
    return p * theta / (theta - 1.0)


def _cutoff(placement, rho, eps, big_r=None):
    """Radial cutoff xi: plateau [lo, hi], smoothstep ramps of width eps*rho."""
    w = eps * rho
    if placement == "ball":
        lo, hi = 0.0, rho
    elif placement == "annulus":
        lo, hi = rho, 2.0 * rho
    elif placement == "boundary":
        lo, hi = big_r - 3.0 * rho, big_r - 2.0 * rho
    else:
        raise InvalidParams(f"unknown placement {placement!r}")

    def xi(r):
        r = np.asarray(r, dtype=float)
        rise = smoothstep((r - (lo - w)) / w) if lo > 0 else np.ones_like(r)
        fall = smoothstep(((hi + w) - r) / w)
        return rise * fall

    support = (max(lo - w, 0.0) if lo > 0 else 0.0, hi + w)
    return xi, support, (lo, hi)


def caccioppoli_ratio(sol: RadialSolution, ell: float, rhos: Sequence[float], eps: float = 0.5,
                      placement: str = "ball", ratio_bound: float = 2.0,
                      big_r: Optional[float] = None) -> EstimateReport:
    """Weighted means of f = r^a v^delta and u^ell under phi = xi^lambda.

    Records lhs = mean_phi f and rhs = (eps rho)^(-p) (mean_phi u^ell)^((p-1)/ell);
    ``notes['rhs_core']`` holds the bracket without the explicit factor.
    """
    params = sol.params
    if not (0 < eps <= 0.5):
        raise InvalidParams("eps must lie in (0, 1/2]")
    lam = cutoff_power(params.p, ell)
    n = params.n_dim
    if placement == "boundary" and big_r is None:
        big_r = sol.status.radius
    regular = sol.u0 is not None and math.isfinite(sol.u0)
    records, cores = [], []
    for rho in rhos:
        xi, (s_lo, s_hi), (lo, hi) = _cutoff(placement, rho, eps, big_r)
        if s_hi > sol.r[-1] * (1 + 1e-12) or (s_lo < sol.r[0] and not (s_lo == 0.0 and regular)):
            raise RangeError(f"cutoff support [{s_lo:.6g}, {s_hi:.6g}] leaves the solution range")

        def fields(r):
            rr = np.clip(r, sol.r[0], sol.r[-1])
            u, v, _, _ = evaluate(sol, rr)
            return np.maximum(u, 0.0), r ** params.a * np.maximum(v, 0.0) ** params.delta

        def integral(k):
            def g(r):
                uu, ff = fields(r)
                val = (ff, uu ** ell)[k]
                return float(val * xi(r) ** lam * r ** (n - 1.0))
            pts = sorted({s_lo, min(max(lo, s_lo), s_hi), min(hi, s_hi), s_hi})
            total = 0.0
            for a_, b_ in zip(pts[:-1], pts[1:]):
                if b_ > a_:
                    total += integrate.quad(g, a_, b_, epsabs=0.0, epsrel=1e-11, limit=200)[0]
            return total

        mass = integral_of_phi(xi, lam, n, s_lo, s_hi, lo, hi)
        lhs = integral(0) / mass
        core = (integral(1) / mass) ** ((params.p - 1.0) / ell)
        rhs = (eps * rho) ** (-params.p) * core
        const = 0.0 if lhs == 0.0 and rhs == 0.0 else lhs / rhs
        records.append(ScaleRecord(rho, lhs, rhs, const))
        cores.append(core)
    rep = _report(f"caccioppoli[{placement}]", records, ratio_bound,
                  notes={"lambda": lam, "eps": eps, "ell": ell, "rhs_core": cores})
    if all(rec.lhs == 0.0 and rec.rhs == 0.0 for rec in records):
        rep.verdict = BOUNDED
    return rep


def integral_of_phi(xi, lam, n_dim, s_lo, s_hi, lo, hi) -> float:
    def g(r):
        return float(xi(r) ** lam * r ** (n_dim - 1.0))
    pts = sorted({s_lo, min(max(lo, s_lo), s_hi), min(hi, s_hi), s_hi})
    return sum(integrate.quad(g, a_, b_, epsabs=0.0, epsrel=1e-12, limit=200)[0]
               for a_, b_ in zip(pts[:-1], pts[1:]) if b_ > a_)


# -- bootstrap certificate -------------------------------------------------------


@dataclass(frozen=True)
class BootstrapResult:
    passes: bool
    c_formula: float
    worst_ratio: float
    notes: dict


def bootstrap_constant(d, h, big_k, big_m, eps0) -> float:
    return ((big_k * eps0 ** (-h)) ** (1.0 / (1.0 - d)) * 2.0 ** (h / (1.0 - d) ** 2)
            * big_m ** (d / (1.0 - d) ** 2))


def _as_function(y):
    if callable(y):
        return y, None
    rho, vals = (np.asarray(a, dtype=float) for a in y)
    lr, lv = np.log(rho), np.log(vals)

    def f(x):
        return np.exp(np.interp(np.log(x), lr, lv))

    return f, float(rho[-1])


def bootstrap_certificate(y, phi: Callable, d: float, h: float, big_k: float, big_m: float,
                          eps0: float, r_max: Optional[float] = None, n_rho: int = 200,
                          n_eps: int = 40, rho_min_factor: float = 1e-6) -> BootstrapResult:
    """Check the recurrence hypotheses on sampled scales, then the conclusion.

    ``y`` is a callable (with ``r_max``) or a pair of arrays (rho, y).  The
    recurrence y(rho) <= K eps^-h Phi(rho) y(rho(1+eps))^d is tested on a grid
    of eps in (0, eps0] and rho in (0, R/2]; Phi must satisfy
    max_[rho, 3rho/2] Phi <= M Phi(rho).  Monotonicity of y is reported only.
    """
    if not (0.0 < d < 1.0):
        raise InvalidParams("d must lie in (0, 1)")
    if not (0.0 < eps0 <= 0.5):
        raise InvalidParams("eps0 must lie in (0, 1/2]")
    yf, sampled_r = _as_function(y)
    big_r = r_max if r_max is not None else sampled_r
    if big_r is None:
        raise InvalidParams("r_max is required for a callable y")
    rhos = np.geomspace(big_r * rho_min_factor, big_r / 2.0, n_rho)
    if sampled_r is not None:
        rhos = rhos[rhos * (1 + eps0) <= sampled_r]
    slack = 1.0 + 1e-12
    y_vals = np.array([yf(r) for r in rhos], dtype=float)
    phi_vals = np.array([phi(r) for r in rhos], dtype=float)
    if np.any(y_vals <= 0) or np.any(phi_vals <= 0):
        raise HypothesisViolated("y and Phi must be positive", "positivity", float(rhos[0]))
    for eps in np.geomspace(eps0 * 1e-4, eps0, n_eps):
        bound = big_k * eps ** (-h) * phi_vals * np.array([yf(r * (1 + eps)) for r in rhos]) ** d
        bad = np.nonzero(y_vals > bound * slack)[0]
        if bad.size:
            rho = float(rhos[bad[0]])
            raise HypothesisViolated(f"recurrence fails at eps={eps:.3g}, rho={rho:.3g}", "recurrence", rho)
    for rho, ph in zip(rhos, phi_vals):
        top = max(phi(t) for t in np.linspace(rho, 1.5 * rho, 16))
        if top > big_m * ph * slack:
            raise HypothesisViolated(f"Phi not quasi-monotone at rho={rho:.3g}", "phi_quasi_monotone", float(rho))
    c = bootstrap_constant(d, h, big_k, big_m, eps0)
    sel = rhos <= big_r / (2.0 * math.e)
    ratio = y_vals[sel] / (phi_vals[sel] ** (1.0 / (1.0 - d)))
    worst = float(np.max(ratio)) if ratio.size else math.nan
    notes = {"y_nondecreasing": bool(np.all(np.diff(y_vals) >= 0)), "n_rho": int(rhos.size)}
    return BootstrapResult(bool(ratio.size and worst <= c * slack), c, worst, notes)


# -- Wolff bound ------------------------------------------------------------------


def _limit_at_zero(r, y):
    """Richardson estimate of lim_{r->0} y from three samples in the smallest decade."""
    i1 = 0
    i3 = int(np.searchsorted(r, r[0] * 10.0))
    i3 = min(i3, r.size - 1)
    i2 = int(np.searchsorted(r, math.sqrt(r[i1] * r[i3])))
    y1, y2, y3 = y[i1], y[i2], y[i3]
    if not ((y1 <= y2 <= y3) or (y1 >= y2 >= y3)):
        return math.nan
    den = y1 + y3 - 2.0 * y2
    if den == 0.0:
        return float(y1)
    est = (y1 * y3 - y2 * y2) / den
    return float(est) if abs(est - y1) <= abs(y3 - y1) + 1e-300 else float(y1)


def wolff_bound_check(sol: Union[RadialSolution, ParticularSolution], params: SystemParams,
                      rhos: Sequence[float], center_factor: float = 0.0,
                      ratio_bound: float = 5.0, quad_tol: float = 1e-10) -> EstimateReport:
    """Empirical C = (sup_{B(x0,2rho)} u - limsup_{x->x0} u) / W^f_{1,p}(B(x0, rho)), f = |x|^a v^delta.

    x0 sits at distance ``center_factor * rho`` from the origin (0: centered).
    Off-center balls keep the potential finite for profiles singular at 0.
    """
    p, delta, a = params.p, params.delta, params.a
    if isinstance(sol, ParticularSolution):
        u_of = sol.u
        v_of = sol.v
        u_zero = math.inf
    else:
        r_lo = float(sol.r[0])

        def u_of(r):
            return evaluate(sol, np.clip(r, r_lo, sol.r[-1]))[0]

        def v_of(r):
            return evaluate(sol, np.clip(r, r_lo, sol.r[-1]))[1]

        u_zero = sol.u0 if sol.u0 is not None else _limit_at_zero(sol.r, sol.u)

    def f(r):
        return r ** a * max(float(v_of(r)), 0.0) ** delta

    records = []
    inconclusive = False
    for rho in rhos:
        d0 = center_factor * rho
        if d0 == 0.0:
            top = float(u_of(2.0 * rho))
            base = u_zero
        else:
            if d0 < 2.0 * rho:
                raise InvalidParams("off-center balls must avoid the origin (center_factor >= 2)")
            top = max(float(u_of(d0 - 2.0 * rho)), float(u_of(d0 + 2.0 * rho)))
            base = float(u_of(d0))
        num = top - base
        w = wolff_potential(f, p, rho, params.n_dim, quad_tol, center=d0)
        if not math.isfinite(num):
            inconclusive = True
            records.append(ScaleRecord(rho, num, w, math.nan))
            continue
        if w == 0.0:
            if abs(num) <= 1e-300:
                inconclusive = True
                records.append(ScaleRecord(rho, 0.0, 0.0, math.nan))
                continue
            raise ZeroPotential(f"potential vanishes at rho={rho:.6g} while the oscillation is {num:.6g}")
        records.append(ScaleRecord(rho, num, w, num / w))
    rep = _report("wolff_bound", records, ratio_bound, notes={"center_factor": center_factor})
    if inconclusive:
        rep.verdict = INCONCLUSIVE
    return rep
