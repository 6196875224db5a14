"""Autonomous four-dimensional system in logarithmic radial variables.

With t = ln r and

    X = -r u'/u,  Y = -r v'/v,
    Z = -eps1 r^(1+a) v^delta u'/|u'|^p,  W = -eps2 r^(1+b) u^mu v'/|v'|^q,

radial solutions of the weighted systems become trajectories of

    X_t = X [X - (N-p)/(p-1) + Z/(p-1)]
    Y_t = Y [Y - (N-q)/(q-1) + W/(q-1)]
    Z_t = Z [N + a - delta Y - Z]
    W_t = W [N + b - mu X - W]

and (u, v) are recovered from |X|^(p-1)|Z| = r^(p+a) v^delta u^(1-p) and
|Y|^(q-1)|W| = r^(q+b) u^mu v^(1-q).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment

from .errors import (DegenerateProfile, EscapeToInfinity, InsufficientRange, InvalidParams,
                     NonrealEigenvector, ZeroCoordinate)
from .exponents import SystemParams, classify_regimes, compute_exponents
from .radial import RadialSolution, SolutionStatus, _pack, centered_derivative

ESCAPE_NORM = 1e8
LABELS = ("N0", "S0", "S0_sym", "G0", "G0_sym", "A0", "P0", "Q0", "M0")


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    z: float
    w: float
    t: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z, self.w)):
            raise InvalidParams("phase coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.w])


@dataclass(frozen=True)
class FixedPointInfo:
    label: str
    coords: PhaseState
    eigenvalues: tuple
    unstable_dim: int
    admissible: bool


@dataclass
class PhaseTrajectory:
    t: np.ndarray
    states: np.ndarray  # shape (n, 4)
    params: Optional[SystemParams] = None
    escape_time: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def signs(self, i: int = 0) -> str:
        """Sign pattern like '-+++' of sample ``i``."""
        return "".join("+" if c > 0 else "-" if c < 0 else "0" for c in self.states[i])

    def orthant_fraction(self, pattern: str) -> float:
        """Fraction of samples whose signs agree with ``pattern`` ('*' matches anything)."""
        ok = np.ones(len(self.t), dtype=bool)
        for k, ch in enumerate(pattern):
            if ch == "+":
                ok &= self.states[:, k] > 0
            elif ch == "-":
                ok &= self.states[:, k] < 0
        return float(np.mean(ok))


def _as_states(s):
    if isinstance(s, PhaseState):
        return s.as_array()
    return np.asarray(s, dtype=float)


def _consts(params: SystemParams):
    n = params.n_dim
    return ((n - params.p) / (params.p - 1.0), (n - params.q) / (params.q - 1.0),
            n + params.a, n + params.b)


def sigma_field(s, params: SystemParams) -> np.ndarray:
    """Right-hand side of the autonomous system; ``s`` has trailing axis 4."""
    st = _as_states(s)
    hp, hq, na, nb = _consts(params)
    x, y, z, w = st[..., 0], st[..., 1], st[..., 2], st[..., 3]
    return np.stack([
        x * (x - hp + z / (params.p - 1.0)),
        y * (y - hq + w / (params.q - 1.0)),
        z * (na - params.delta * y - z),
        w * (nb - params.mu * x - w),
    ], axis=-1)


def sigma_jacobian(s, params: SystemParams) -> np.ndarray:
    x, y, z, w = _as_states(s)
    hp, hq, na, nb = _consts(params)
    p1, q1 = params.p - 1.0, params.q - 1.0
    return np.array([
        [2 * x - hp + z / p1, 0.0, x / p1, 0.0],
        [0.0, 2 * y - hq + w / q1, 0.0, y / q1],
        [0.0, -params.delta * z, na - params.delta * y - 2 * z, 0.0],
        [-params.mu * w, 0.0, 0.0, nb - params.mu * x - 2 * w],
    ])


def _m0_eigenvalues(coords, params):
    """Roots of (X-l)(Y-l)(Z+l)(W+l) = delta mu XYZW / ((p-1)(q-1)) at the interior point."""
    x, y, z, w = coords
    poly = np.polynomial.Polynomial
    char = poly([x, -1.0]) * poly([y, -1.0]) * poly([z, 1.0]) * poly([w, 1.0])
    char = char - params.delta * params.mu * x * y * z * w / ((params.p - 1.0) * (params.q - 1.0))
    roots = char.roots()
    roots = np.where(np.abs(roots.imag) < 1e-12 * (1 + np.abs(roots.real)), roots.real, roots)
    return tuple(sorted(roots, key=lambda c: (-np.real(c), np.imag(c))))


def fixed_point_catalog(params: SystemParams) -> list[FixedPointInfo]:
    """All labeled fixed points with closed-form eigenvalues.

    Eigenvalues are listed per coordinate direction (X, Y, Z, W), the Jacobian
    being permutation-triangular at every point except M0.
    """
    exps = compute_exponents(params)
    if exps.big_d == 0:
        raise InvalidParams("D = 0: the singular exponents are undefined")
    flags = classify_regimes(params, exps)
    n, p, q, a, b = params.n_dim, params.p, params.q, params.a, params.b
    dl, mu = params.delta, params.mu
    hp, hq = exps.harmonic_p, exps.harmonic_q
    na, nb = n + a, n + b
    g, xi = exps.gamma_ab, exps.xi_ab

    def tri(coords):
        return tuple(float(v) for v in np.diag(sigma_jacobian(coords, params)))

    entries = []

    def add(label, coords, admissible, eig=None):
        coords = tuple(float(c) + 0.0 for c in coords)
        eig = tri(coords) if eig is None else eig
        unstable = sum(1 for e in eig if np.real(e) > 0)
        entries.append(FixedPointInfo(label, PhaseState(*coords), tuple(eig), unstable, bool(admissible)))

    add("N0", (0.0, 0.0, na, nb), True)
    xs = -(p + a) / (p - 1.0)
    add("S0", (xs, 0.0, na, nb - mu * xs), flags.d_positive)
    ys = -(q + b) / (q - 1.0)
    add("S0_sym", (0.0, ys, na - dl * ys, nb), flags.d_positive)
    add("G0", (hp, 0.0, 0.0, nb - hp * mu), flags.mu_below_qb)
    add("G0_sym", (0.0, hq, na - hq * dl, 0.0), dl < (p + a) * (q - 1.0) / (n - q))
    add("A0", (hp, hq, 0.0, 0.0),
        flags.delta_below_na and mu < (n + b) * (p - 1.0) / (n - p))
    # y*, x* taken from the nullcline expression the field itself evaluates
    w_p = nb - hp * mu
    add("P0", (hp, hq - w_p / (q - 1.0), 0.0, w_p),
        flags.gamma_supercritical and (flags.mu_above_nb or flags.mu_below_qb))
    z_q = na - hq * dl
    add("Q0", (hp - z_q / (p - 1.0), hq, z_q, 0.0),
        flags.xi_supercritical and (dl > (n + a) * (q - 1.0) / (n - q) or dl < (p + a) * (q - 1.0) / (n - q)))
    m0 = (g, xi, na - dl * xi, nb - mu * g)
    add("M0", m0, flags.particular_exists, _m0_eigenvalues(m0, params))
    return entries


def fixed_point(params: SystemParams, label: str) -> FixedPointInfo:
    for fp in fixed_point_catalog(params):
        if fp.label == label:
            return fp
    raise KeyError(f"unknown fixed point {label!r}; expected one of {LABELS}")


def match_spectra(closed, numeric) -> float:
    """Max distance between two eigenvalue multisets under the best pairing."""
    a = np.asarray(closed, dtype=complex)
    b = np.asarray(numeric, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


# -- radial profile <-> trajectory --------------------------------------------


def to_phase(sol: RadialSolution) -> PhaseTrajectory:
    params = sol.params
    if not isinstance(params, SystemParams):
        raise InvalidParams("to_phase needs a system solution")
    r, u, v, du, dv = sol.r, sol.u, sol.v, sol.du, sol.dv
    keep = (u > 0) & (v > 0) & (du != 0) & (dv != 0) & np.isfinite(du) & np.isfinite(dv)
    if not np.any(keep):
        raise DegenerateProfile("u, v, u', v' vanish somewhere on every sample")
    r, u, v, du, dv = r[keep], u[keep], v[keep], du[keep], dv[keep]
    e1, e2 = params.eps
    p, q = params.p, params.q
    x = -r * du / u
    y = -r * dv / v
    z = -e1 * r ** (1.0 + params.a) * v ** params.delta * np.sign(du) * np.abs(du) ** (1.0 - p)
    w = -e2 * r ** (1.0 + params.b) * u ** params.mu * np.sign(dv) * np.abs(dv) ** (1.0 - q)
    return PhaseTrajectory(np.log(r), np.stack([x, y, z, w], axis=1), params,
                           meta={"source": "to_phase", "trimmed": int(np.sum(~keep))})


def sigma_residual(traj: PhaseTrajectory, params: Optional[SystemParams] = None) -> float:
    """Max of |dS/dt - F(S)| / (1 + |S|_inf^2) by five-point differencing along t."""
    params = params or traj.params
    worst = 0.0
    for k in range(4):
        d, idx = centered_derivative(traj.t, traj.states[:, k])
        f = sigma_field(traj.states[idx], params)[:, k]
        norm = 1.0 + np.max(np.abs(traj.states[idx]), axis=1) ** 2
        worst = max(worst, float(np.max(np.abs(d - f) / norm)))
    return worst


def reconstruct_uv(traj: PhaseTrajectory, params: Optional[SystemParams] = None,
                   anchor_r: Optional[float] = None) -> RadialSolution:
    """Radial profiles from a trajectory.

    ``r = exp(t)`` by default; with ``anchor_r`` the first sample is placed at
    that radius (a t-shift, i.e. a rescaled solution).
    """
    params = params or traj.params
    exps = compute_exponents(params)
    d = exps.big_d
    st = traj.states
    if np.any(st == 0.0):
        raise ZeroCoordinate("reconstruction needs all four coordinates nonzero")
    t = np.asarray(traj.t, dtype=float)
    if anchor_r is not None:
        t = t - t[0] + math.log(anchor_r)
    r = np.exp(t)
    p, q = params.p, params.q
    pu = np.abs(st[:, 0]) ** (p - 1.0) * np.abs(st[:, 2])
    qv = np.abs(st[:, 1]) ** (q - 1.0) * np.abs(st[:, 3])
    lu = -exps.gamma_ab * t + ((q - 1.0) * np.log(pu) + params.delta * np.log(qv)) / d
    lv = -exps.xi_ab * t + (params.mu * np.log(pu) + (p - 1.0) * np.log(qv)) / d
    u, v = np.exp(lu), np.exp(lv)
    du = -st[:, 0] * u / r
    dv = -st[:, 1] * v / r
    status = SolutionStatus("completed", float(r[-1]))
    return _pack(params, r, [u, v], [du, dv], [None, None], status,
                 {"source": "reconstruct", **traj.meta})


# -- shooting -------------------------------------------------------------------


def _unit_eigvec(jac, lam):
    w, vecs = np.linalg.eig(jac)
    j = int(np.argmin(np.abs(w - lam)))
    vec = vecs[:, j]
    if np.max(np.abs(vec.imag)) > 1e-10:
        raise NonrealEigenvector(f"eigenvector for {lam} is complex")
    vec = vec.real / np.linalg.norm(vec.real)
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return vec


def _arc_grid(dense, t0, t1, steps, n_samples):
    fine = np.union1d(np.linspace(t0, t1, 8 * n_samples), steps)
    g = np.log1p(np.abs(dense(fine)))
    arc = np.concatenate([[0.0], np.cumsum(np.sqrt(np.diff(fine) ** 2 + np.sum(np.diff(g, axis=1) ** 2, axis=0)))])
    grid = np.interp(np.linspace(0.0, arc[-1], n_samples), arc, fine)
    grid[0], grid[-1] = t0, t1
    return np.unique(grid)


def shoot_unstable(fp: FixedPointInfo, eig_index, side, params: SystemParams,
                   t_span=(0.0, 40.0), eta: float = 1e-6, t_back: float = 0.0,
                   n_samples: int = 2000, on_escape: str = "truncate") -> PhaseTrajectory:
    """Integrate forward from ``coords + eta * sum(side_k * e_k)``.

    ``eig_index``/``side`` may be scalars or equal-length sequences; several
    indices shoot into the span of those unstable directions.  ``t_back``
    prepends the linearized unstable manifold on [t0 - t_back, t0).
    """
    if not (1e-10 <= eta <= 1e-4):
        raise InvalidParams(f"eta must lie in [1e-10, 1e-4], got {eta}")
    idx = [eig_index] if np.ndim(eig_index) == 0 else list(eig_index)
    sides = [side] * len(idx) if np.ndim(side) == 0 else list(side)
    if len(sides) != len(idx):
        raise InvalidParams("side and eig_index lengths differ")
    coords = fp.coords.as_array()
    jac = sigma_jacobian(coords, params)
    lams, vecs = [], []
    for k in idx:
        lam = complex(fp.eigenvalues[k])
        if abs(lam.imag) > 1e-12 or lam.real <= 0:
            raise NonrealEigenvector(f"eigenvalue {k} of {fp.label} is {lam}, not real positive")
        lams.append(lam.real)
        vecs.append(_unit_eigvec(jac, lam.real))
    offsets = [float(np.sign(s)) * eta * vec for s, vec in zip(sides, vecs)]
    x0 = coords + np.sum(offsets, axis=0)

    def rhs(t, s):
        return sigma_field(s, params)

    def escape(t, s):
        return np.max(np.abs(s)) - ESCAPE_NORM

    escape.terminal = True
    escape.direction = 1
    t0, t1 = map(float, t_span)
    sol = solve_ivp(rhs, (t0, t1), x0, method="DOP853", rtol=1e-12, atol=1e-14,
                    dense_output=True, events=[escape])
    t_end = float(sol.t[-1])
    escape_time = float(sol.t_events[0][0]) if sol.t_events[0].size else None
    if escape_time is not None and on_escape == "raise":
        raise EscapeToInfinity(f"trajectory escaped at t={escape_time:.6g}", escape_time)
    grid = _arc_grid(sol.sol, t0, t_end, sol.t, n_samples)
    states = sol.sol(grid).T
    states[0] = x0
    t_all = grid
    if t_back > 0:
        n_back = max(int(n_samples * t_back / max(t_end - t0, 1e-9)), 50)
        tb = np.linspace(t0 - t_back, t0, n_back, endpoint=False)
        lin = coords + sum(off * np.exp(lam * (tb - t0))[:, None] for off, lam in zip(offsets, lams))
        t_all = np.concatenate([tb, grid])
        states = np.concatenate([lin, states])
    traj = PhaseTrajectory(t_all, states, params, escape_time,
                           meta={"source": f"shoot:{fp.label}", "eig_index": idx,
                                 "side": [int(np.sign(s)) for s in sides], "eta": eta,
                                 "t_back": t_back, "t_start": t0})
    return traj


def shoot_into_orthant(fp: FixedPointInfo, eig_index, params: SystemParams, pattern: str,
                       **kwargs) -> list[PhaseTrajectory]:
    """Shoot every side combination, keep those whose first steps lie in ``pattern``.

    Returns the matching trajectories (normally one; two means a tie).
    """
    idx = [eig_index] if np.ndim(eig_index) == 0 else list(eig_index)
    out = []
    for sides in itertools.product((1, -1), repeat=len(idx)):
        traj = shoot_unstable(fp, idx, list(sides), params, **kwargs)
        start = int(np.searchsorted(traj.t, traj.meta["t_start"]))
        probe = PhaseTrajectory(traj.t[start:start + 20], traj.states[start:start + 20])
        if probe.orthant_fraction(pattern) == 1.0:
            out.append(traj)
    return out


def asymptotic_fit(r, y, theta: float, decades: float = 1.0):
    """Least-squares constant fit of r^theta * y over the smallest decade of r.

    Returns (limit, drift) with drift the max relative deviation from the fit.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    r_min = float(np.min(r))
    if np.max(r) < r_min * 10.0 ** decades * (1 - 1e-12):
        raise InsufficientRange("need at least one decade of radii")
    sel = r <= r_min * 10.0 ** decades
    g = r[sel] ** theta * y[sel]
    if np.any(g <= 0):
        raise InsufficientRange("profile not positive on the fitted decade")
    limit = float(np.mean(g))
    drift = float(np.max(np.abs(g / limit - 1.0)))
    return limit, drift
