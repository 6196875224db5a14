import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_params
from kolab.errors import InvalidParams, RegimeError
from kolab.exponents import (Kind, SystemParams, classify_regimes, compute_exponents,
                             particular_coefficients)
from kolab.radial import equation_residual, sample_particular


@pytest.mark.parametrize("kw, d, g, x", [
    (dict(n_dim=3, p=2, q=2, delta=3, mu=3), 8, 1, 1),
    (dict(n_dim=4, p=2, q=3, delta=2, mu=4), 6, 5 / 3, 11 / 6),
    (dict(n_dim=3, p=2, q=2, delta=2, mu=2, a=1), 3, 7 / 3, 8 / 3),
])
def test_exponent_examples(kw, d, g, x):
    ex = compute_exponents(SystemParams(**kw))
    assert ex.big_d == pytest.approx(d, rel=1e-14)
    assert ex.gamma_ab == pytest.approx(g, rel=1e-14)
    assert ex.xi_ab == pytest.approx(x, rel=1e-14)


def test_unweighted_fields_ignore_weights():
    ex = compute_exponents(SystemParams(3, 2, 2, 2, 2, a=1.0, b=0.5))
    ex0 = compute_exponents(SystemParams(3, 2, 2, 2, 2))
    assert ex.gamma0 == ex0.gamma_ab and ex.xi0 == ex0.xi_ab


@pytest.mark.parametrize("kw, msg", [
    (dict(n_dim=3, p=1.0, q=2, delta=1, mu=1), "1 < p"),
    (dict(n_dim=3, p=2, q=3.0, delta=1, mu=1), "q < N"),
    (dict(n_dim=3, p=2, q=2, delta=0.0, mu=1), "delta"),
    (dict(n_dim=3, p=2, q=2, delta=1, mu=-1), "mu"),
    (dict(n_dim=3, p=2, q=2, delta=1, mu=1, a=-2.5), "a > -p"),
    (dict(n_dim=3, p=2, q=2, delta=1, mu=1, b=-2.0), "b > -q"),
    (dict(n_dim=1, p=2, q=2, delta=1, mu=1), "n_dim"),
])
def test_invalid_params_name_the_bound(kw, msg):
    with pytest.raises(InvalidParams, match=msg):
        SystemParams(**kw)


def test_kind_signs():
    assert Kind.ABSORPTION.eps == (-1, -1)
    assert Kind.MIXED.eps == (-1, 1)
    assert Kind.SOURCE.eps == (1, 1)


def test_d_zero_gives_nan():
    ex = compute_exponents(SystemParams(3, 2, 2, 1, 1))
    assert ex.big_d == 0 and math.isnan(ex.gamma_ab)


def test_regime_examples():
    p = SystemParams(3, 2, 2, 2, 2)
    f = classify_regimes(p, compute_exponents(p))
    assert f.gamma_supercritical and f.xi_supercritical and f.particular_exists
    p = SystemParams(4, 2, 2, 5, 0.5)
    assert classify_regimes(p, compute_exponents(p)).mu_below_qb
    p = SystemParams(3, 2, 2, 0.5, 4)
    ex = compute_exponents(p)
    assert ex.big_d == 1 and ex.gamma_ab == 3 and classify_regimes(p, ex).mu_above_nb


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mu_flags_exclusive(seed):
    params = random_params(np.random.default_rng(seed), kinds=tuple(Kind))
    f = classify_regimes(params, compute_exponents(params))
    assert not (f.mu_above_nb and f.mu_below_qb)
    if params.kind is Kind.SOURCE:
        assert not f.particular_exists


def test_particular_model_case():
    p = SystemParams(3, 2, 2, 2, 2)
    part = particular_coefficients(p)
    assert part.a_star == pytest.approx(2, rel=1e-13)
    assert part.b_star == pytest.approx(2, rel=1e-13)
    assert equation_residual(sample_particular(p, part)) < 1e-10


def test_particular_degenerate_harmonic():
    with pytest.raises(RegimeError):
        particular_coefficients(SystemParams(3, 2, 2, 3, 3))


def test_particular_mixed_amplitude_equations():
    p = SystemParams(3, 2, 2, 12, 0.5, kind="mixed")
    ex = compute_exponents(p)
    assert ex.gamma_ab == pytest.approx(26 / 5) and ex.xi_ab == pytest.approx(3 / 5)
    part = particular_coefficients(p)
    assert 21.84 * part.a_star == pytest.approx(part.b_star ** 12, rel=1e-10)
    assert 0.24 * part.b_star == pytest.approx(part.a_star ** 0.5, rel=1e-12)
    assert equation_residual(sample_particular(p, part)) < 1e-10


def test_source_has_no_particular():
    with pytest.raises(RegimeError):
        particular_coefficients(SystemParams(3, 2, 2, 2, 2, kind="source"))


def test_swapped_exchanges_exponents():
    p = SystemParams(4, 2, 3, 2, 4, a=0.3, b=-0.2)
    ex, exs = compute_exponents(p), compute_exponents(p.swapped())
    assert exs.gamma_ab == pytest.approx(ex.xi_ab) and exs.xi_ab == pytest.approx(ex.gamma_ab)
