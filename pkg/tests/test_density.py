import math

import numpy as np
import pytest
from scipy import integrate

from qvar.density import (Beta, Polynomial, PowerTailMix, SupportMap, TrigPolynomial,
                          decompose_beta, from_json, power_density, standardize, uniform,
                          validate)
from qvar.errors import InvalidDensity

DENSITIES = [uniform(), Polynomial((0.0, 2.0)), Beta(2, 2), Beta(0.5, 0.5), Beta(0.7, 2.3),
             power_density(0.5), TrigPolynomial(1.0, cos=((2, 0.5),), sin=((2, 0.3),)),
             TrigPolynomial(1.0, exp=((1, 0.2 + 0.1j),))]


@pytest.mark.parametrize("d", DENSITIES)
def test_validate_accepts(d):
    rep = validate(d)
    assert rep.defect < 1e-10


@pytest.mark.parametrize("d", [Polynomial((1.0, 1.0)), Polynomial((3.0, -4.0)),
                               TrigPolynomial(1.0, cos=((1, 1.5),))])
def test_validate_rejects(d):
    with pytest.raises(InvalidDensity):
        validate(d)


def test_rejects_bad_parameters():
    with pytest.raises(InvalidDensity):
        Beta(0.0, 1.0)
    with pytest.raises(InvalidDensity):
        PowerTailMix(left=((1.0, -0.5),))
    with pytest.raises(InvalidDensity):
        TrigPolynomial(1.0, cos=((0, 0.1),))


@pytest.mark.parametrize("d,j,expected", [
    (uniform(), 1, 0.5), (uniform(), 2, 1 / 3), (Beta(2, 2), 1, 0.5),
    (power_density(0.5), 1, 1 / 3), (Beta(0.5, 0.5), 2, 3 / 8)])
def test_moments(d, j, expected):
    assert abs(d.moment(j) - expected) < 1e-12


@pytest.mark.parametrize("d", DENSITIES)
@pytest.mark.parametrize("j", [0, 1, 3])
def test_moments_vs_quadrature(d, j):
    ref = integrate.quad(lambda x: x ** j * d.pdf(x), 0, 1, limit=200, epsabs=1e-13)[0]
    assert abs(d.moment(j) - ref) < 1e-9


@pytest.mark.parametrize("d", DENSITIES)
def test_reflection(d):
    x = np.linspace(0.05, 0.95, 19)
    assert np.allclose(d.reflect().pdf(x), d.pdf(1 - x), rtol=1e-12, atol=1e-12)


def test_decompose_beta_integer_shapes():
    assert decompose_beta(1, 1).pdf(0.3) == pytest.approx(1.0)
    d = decompose_beta(2, 3)
    assert not d.left and not d.right
    x = np.linspace(0, 1, 11)
    assert np.allclose(d.pdf(x), 12 * x * (1 - x) ** 2, atol=1e-12)


@pytest.mark.parametrize("p,q", [(0.5, 0.5), (0.3, 2.0), (1.5, 0.7)])
def test_decompose_beta_fractional(p, q):
    d = decompose_beta(p, q)
    x = np.linspace(0.001, 0.999, 999)
    assert np.max(np.abs(d.pdf(x) - Beta(p, q).pdf(x))) < 1e-8
    if p == 0.5:
        assert d.left[0] == pytest.approx((1 / math.pi, 0.5))
        assert d.right[0] == pytest.approx((1 / math.pi, 0.5))


def test_standardize():
    d, smap = standardize(0, 1, uniform())
    assert d == uniform() and smap.scale == 1
    d, smap = standardize(-1, 1, Polynomial((0.5,)))
    assert d.pdf(0.3) == pytest.approx(1.0) and smap.scale == 4
    d, smap = standardize(0, 2, Polynomial((0.0, 0.5)))
    assert np.allclose(d.coeffs, [0.0, 2.0]) and smap.scale == 4
    assert smap.from_unit(smap.to_unit(1.3)) == pytest.approx(1.3)
    with pytest.raises(InvalidDensity):
        SupportMap(1.0, 1.0)


@pytest.mark.parametrize("d", DENSITIES)
def test_json_round_trip(d):
    back, smap = from_json(d.to_json())
    assert smap.scale == 1
    x = np.linspace(0.05, 0.95, 7)
    assert np.allclose(back.pdf(x), d.pdf(x), rtol=1e-14)


@pytest.mark.parametrize("obj", [{}, {"type": "gamma"}, {"type": "beta", "p": 1},
                                 {"type": "polynomial", "coeffs": [1], "version": 2}])
def test_json_errors(obj):
    with pytest.raises(InvalidDensity):
        from_json(obj)


def test_json_support():
    d, smap = from_json({"type": "polynomial", "coeffs": [0.5], "support": [-1, 1]})
    assert d.pdf(0.4) == pytest.approx(1.0)
    assert (smap.a, smap.b) == (-1.0, 1.0)


@pytest.mark.parametrize("d", [uniform(), power_density(0.5), Beta(2, 2), Beta(0.5, 0.5),
                               TrigPolynomial(1.0, cos=((2, 0.5),))])
def test_sampling_mean(d):
    N = 100_000
    x = d.sample(7, N)
    assert x.shape == (N,) and np.all((x >= 0) & (x <= 1))
    sigma = math.sqrt(d.variance())
    assert abs(x.mean() - d.mean()) < 4 * sigma / math.sqrt(N)


def test_sampling_deterministic():
    d = Beta(0.5, 0.5)
    assert np.array_equal(d.sample(3, 1000), d.sample(3, 1000))
    assert not np.array_equal(d.sample(3, 1000), d.sample(4, 1000))
