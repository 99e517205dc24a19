import json
import math

import numpy as np
import pytest

from conftest import tensor_cf
from qvar.cf import cf_at, sup_q
from qvar.density import Beta, Polynomial, uniform
from qvar.dist import cdf_q
from qvar.errors import DomainError, SizeError
from qvar.kernel import PsiContext
from qvar.quadform import QuadFormSpec, cdf_form, cf_form_at, coefficients_form, sup_q_form

HET = QuadFormSpec((1.0, 1.0), (0.6, 0.6), "minus", None, (uniform(), Polynomial((0.0, 2.0))))
PLUS = QuadFormSpec((1.0, 2.0), (0.6, 0.3), "plus", ((0.0, 1.0), (-0.5, 1.0)),
                    (uniform(), Beta(2, 2)))


def form_oracle(spec, t, m=400):
    """E exp(i t Q) by tensor Gauss-Legendre over the unit square."""
    (a1, b1), (a2, b2) = spec.supports

    def q_of(u1, u2):
        x = np.stack([a1 + (b1 - a1) * u1, a2 + (b2 - a2) * u2], axis=-1)
        return spec.value(x)
    return tensor_cf(q_of, [f.pdf for f in spec.densities], t, m)


def test_sup_reductions():
    assert sup_q_form(QuadFormSpec.sample_variance(3)) == pytest.approx(2 / 3)
    s = 1 / math.sqrt(2)
    assert sup_q_form(QuadFormSpec((1, 1), (s, s))) == pytest.approx(0.5)
    eps = 1e-3
    spec = QuadFormSpec((1, 1), (eps, eps), "plus")
    assert sup_q_form(spec) == pytest.approx(2 + 4 * eps ** 2)


def test_lambda_and_matrix():
    assert HET.lam == pytest.approx(1 - 0.72, abs=1e-15)
    assert PLUS.lam == pytest.approx(1 + 0.36 + 0.045, abs=1e-15)
    assert QuadFormSpec.sample_variance(4).lam == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("kwargs", [
    dict(d=(1, 1), c=(1, 1)),                      # lambda < 0
    dict(d=(1, 1), c=(0.5, 0.0)),                  # one nonzero c
    dict(d=(1, -1), c=(0.5, 0.5)),
    dict(d=(1, 1, 1), c=(0.5, 0.5)),
    dict(d=(1, 1), c=(0.5, 0.5), supports=((0.1, 1.0), (0.0, 1.0))),
    dict(d=(1, 1), c=(0.5, 0.5), sign="times"),
])
def test_validation(kwargs):
    with pytest.raises(DomainError):
        QuadFormSpec(**kwargs)


def test_density_validation():
    from qvar.errors import InvalidDensity
    with pytest.raises(InvalidDensity):
        QuadFormSpec((1, 1), (0.5, 0.5), densities=(uniform(), Polynomial((1.0, 1.0))))


def test_size_cap():
    n = 25
    spec = QuadFormSpec((1.0,) * n, (1 / math.sqrt(n),) * n)
    with pytest.raises(SizeError):
        sup_q_form(spec)


def test_json_round_trip():
    back = QuadFormSpec.from_json(json.loads(json.dumps(PLUS.to_json())))
    assert back.to_json() == PLUS.to_json()
    assert sup_q_form(back) == sup_q_form(PLUS)


def test_cf_near_zero():
    assert abs(cf_form_at(HET, 1e-9) - 1) < 1e-8


def test_sample_variance_reduction():
    spec = QuadFormSpec.sample_variance(3)
    ctx = PsiContext(uniform())
    for k in range(1, 21):
        t = k * math.pi / sup_q(3)
        assert abs(cf_form_at(spec, t) - cf_at(ctx, 3, t)) <= 1e-8


@pytest.mark.parametrize("spec", [HET, PLUS], ids=["minus", "plus"])
def test_vs_tensor_oracle(spec):
    q = sup_q_form(spec)
    for k in (1, 2, 5, 13, 40):
        t = k * math.pi / q
        assert abs(cf_form_at(spec, t) - form_oracle(spec, t)) <= 1e-7


def test_cdf_reduction():
    from conftest import cached_coefficients
    spec = QuadFormSpec.sample_variance(3)
    x = np.linspace(0, 2 / 3, 41)
    ref = cdf_q(cached_coefficients(uniform(), 3, 1e-8), x)
    assert np.max(np.abs(cdf_form(spec, x, tol=1e-6) - ref)) <= 2e-6
    assert cdf_form(spec, 0.0, tol=1e-6) == 0.0


def test_heterogeneous_cdf_vs_monte_carlo():
    N = 1_000_000
    x1 = uniform().sample(11, N)
    x2 = Polynomial((0.0, 2.0)).sample(12, N)
    qs = np.sort(HET.value(np.stack([x1, x2], axis=-1)))
    c = coefficients_form(HET, 1e-6)
    grid = np.linspace(0, c.q, 2001)
    F = np.interp(qs, grid, cdf_q(c, grid))
    i = np.arange(1, N + 1)
    ks = max(np.max(i / N - F), np.max(F - (i - 1) / N))
    assert ks <= 0.004
