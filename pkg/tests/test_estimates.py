import math

import numpy as np
import pytest

from kolab.errors import HypothesisViolated, InvalidParams, RangeError, ZeroDenominator
from kolab.estimates import (BOUNDED, INCONCLUSIVE, ball_mean, bootstrap_certificate, caccioppoli_ratio,
                             cutoff_power, harnack_ratios, ko_envelope, punctual_ratio, scaling_ray,
                             smoothstep, wolff_bound_check, wolff_potential)
from kolab.exponents import SystemParams, particular_coefficients
from kolab.radial import _pack, solve_regular


def test_wolff_closed_forms():
    assert wolff_potential(lambda r: 1.0, 2.0, 1.0, 3) == pytest.approx(0.5, rel=1e-12)
    for p in (1.5, 2.5, 4.0):
        exact = (p - 1) / p * 0.8 ** (p / (p - 1))
        assert wolff_potential(lambda r: 1.0, p, 0.8, 5) == pytest.approx(exact, rel=1e-10)
    n, p, s, rho = 4, 3.0, -2.5, 1.7
    exact = (n / (n + s)) ** (1 / (p - 1)) * (p - 1) / (p + s) * rho ** ((p + s) / (p - 1))
    assert wolff_potential(lambda r: r ** s, p, rho, n) == pytest.approx(exact, rel=1e-10)


def test_wolff_divergent_is_inf():
    assert wolff_potential(lambda r: r ** -3.5, 2.0, 1.0, 3) == math.inf


def test_off_center_mean():
    # mean of |x|^2 over B(x0, t) is |x0|^2 + N t^2 / (N + 2)
    for n in (2, 3, 5):
        assert ball_mean(lambda r: r * r, 0.5, n, center=2.0) == pytest.approx(4 + n / (n + 2) * 0.25, rel=1e-12)
    with pytest.raises(InvalidParams):
        ball_mean(lambda r: 1.0, 2.0, 3, center=1.0)


def test_ko_scaling_ray(model):
    rep = ko_envelope(model, scaling_ray(model, 4))
    assert rep.verdict == BOUNDED and rep.constant_ratio < 1 + 1e-6


def test_ko_mixed_no_blowup_inconclusive():
    p = SystemParams(3, 2, 2, 12, 0.5, kind="mixed")
    rep = ko_envelope(p, [(0.0, 1.0)])
    assert rep.verdict == INCONCLUSIVE and rep.notes["no_blowup"]


def test_harnack_examples():
    r = np.geomspace(1e-3, 10, 500)
    rep = harnack_ratios((r, np.full_like(r, 3.0)), [0.01, 0.1, 1.0])
    assert np.all(rep.constants == 1.0)
    theta = 1.7
    r = np.geomspace(1e-3, 10, 2 ** 10 + 1)
    r = np.unique(np.concatenate([r, 0.01 * 2.0 ** np.arange(8)]))
    rep = harnack_ratios((r, 4 * r ** -theta), [0.01, 0.04, 0.16])
    for rec in rep.secondary_records:
        assert rec.constant == pytest.approx(2 ** theta, rel=1e-12)
    rep = harnack_ratios((r, r ** 2), [0.1], origin=0.0)
    assert rep.constants[0] == math.inf


def test_punctual_particular_constant(model):
    part = particular_coefficients(model)
    r = np.geomspace(1e-4, 1, 1000)
    rep = punctual_ratio(part, model, r=r)
    g = rep.notes["values"]
    assert np.ptp(g) / g[0] < 1e-10
    assert g[0] == pytest.approx(part.a_star ** 2 / part.b_star, rel=1e-12)


def test_punctual_zero_denominator(model):
    r = np.geomspace(1e-3, 1, 50)
    v = r - 0.5
    sol = _pack(model, r, [np.ones_like(r), v], [np.zeros_like(r), np.ones_like(r)], [None, None], None, {})
    with pytest.raises(ZeroDenominator):
        punctual_ratio(sol)


def test_cutoff_power_and_smoothstep():
    # ell = 2, p = 2: alpha = 1/2, theta = 4/3, theta' = 4, lambda = 8
    assert cutoff_power(2.0, 2.0) == pytest.approx(8.0)
    with pytest.raises(InvalidParams):
        cutoff_power(2.0, 0.5)
    x = np.linspace(0, 1, 100001)
    assert np.max(np.gradient(smoothstep(x), x)) <= 15 / 8 + 1e-6


def test_caccioppoli_zero_solution(model):
    sol = solve_regular(model, 0.0, 0.0)
    rep = caccioppoli_ratio(sol, 2.0, [0.1, 0.2])
    assert np.all(rep.constants == 0.0)


def test_caccioppoli_eps_factor(model_regular):
    big_r = model_regular.status.radius
    for eps in (0.5, 0.25):
        rep = caccioppoli_ratio(model_regular, 2.0, [big_r / 16, big_r / 8], eps=eps)
        for rec, core in zip(rep.records, rep.notes["rhs_core"]):
            assert rec.rhs == (eps * rec.scale) ** -2.0 * core


def test_caccioppoli_range_error(model_particular):
    with pytest.raises(RangeError):
        caccioppoli_ratio(model_particular, 2.0, [0.1], placement="ball")


def test_bootstrap_examples():
    res = bootstrap_certificate(lambda r: r ** -2.0, lambda r: 1 / r, 0.5, 1.0, 1.0, 1.0, 0.5, r_max=1.0)
    assert res.passes and res.c_formula == 64.0
    assert not res.notes["y_nondecreasing"]
    res = bootstrap_certificate(lambda r: 3.0, lambda r: 2.0, 0.5, 1.0, 1.0, 1.0, 0.5, r_max=1.0)
    assert res.passes
    with pytest.raises(HypothesisViolated) as exc:
        bootstrap_certificate(lambda r: r ** -3.0, lambda r: 1 / r, 0.5, 1.0, 1.0, 1.0, 0.5, r_max=1.0)
    assert exc.value.inequality == "recurrence"


def test_bootstrap_sampled_input():
    rho = np.geomspace(1e-4, 1, 300)
    res = bootstrap_certificate((rho, rho ** -2.0), lambda r: 1 / r, 0.5, 1.0, 1.0, 1.0, 0.5)
    assert res.passes


def test_bootstrap_quasi_monotone_violation():
    with pytest.raises(HypothesisViolated) as exc:
        bootstrap_certificate(lambda r: 1.0, lambda r: r ** 4, 0.5, 1.0, 1.0, 1.0, 0.5, r_max=1.0)
    assert exc.value.inequality in ("recurrence", "phi_quasi_monotone")


def test_wolff_bound_zero_solution(model):
    rep = wolff_bound_check(solve_regular(model, 0.0, 0.0), model, [0.1, 0.2])
    assert rep.verdict == INCONCLUSIVE


def test_wolff_bound_regular_positive(model, model_regular):
    big_r = model_regular.status.radius
    rep = wolff_bound_check(model_regular, model, [big_r / 64, big_r / 32, big_r / 16, big_r / 8])
    assert np.all(rep.constants > 0) and rep.verdict == BOUNDED
