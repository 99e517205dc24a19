import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, special as sp

from qvar.errors import DomainError
from qvar.special import (erf_cplx, erfcx_cplx, gauss_power_int, gauss_power_table, h_p,
                          h_p_parabolic, hermite, kummer_1f1)


def erf_segment(z):
    # (2/sqrt(pi)) int_0^1 exp(-(s z)**2) z ds along the straight segment
    re = integrate.quad(lambda s: (np.exp(-(s * z) ** 2) * z).real, 0, 1, epsabs=1e-14)[0]
    im = integrate.quad(lambda s: (np.exp(-(s * z) ** 2) * z).imag, 0, 1, epsabs=1e-14)[0]
    return 2 / math.sqrt(math.pi) * complex(re, im)


def test_erf_values():
    assert erf_cplx(0.0) == 0
    assert abs(erf_cplx(1.0) - 0.8427007929497149) < 1e-14


@pytest.mark.parametrize("z", [1 + 0.5j, 0.3 - 0.2j, 2.5 + 2.4j, -4 + 1j, 7 - 6.9j, 30 + 3j])
def test_erf_matches_segment_quadrature(z):
    assert abs(erf_cplx(z) - erf_segment(z)) < 1e-12 * max(1, abs(erf_segment(z)))


@pytest.mark.parametrize("z", [1 + 0.5j, 3 - 2j, 0.7 + 0.1j])
def test_erf_symmetries(z):
    assert abs(erf_cplx(-z) + erf_cplx(z)) < 1e-15
    assert abs(erf_cplx(np.conj(z)) - np.conj(erf_cplx(z))) < 1e-15


def test_erf_vs_scipy_real_axis():
    x = np.linspace(-6, 6, 241)
    assert np.max(np.abs(erf_cplx(x) - sp.erf(x))) < 1e-14


def test_erf_critical_area():
    with pytest.raises(DomainError):
        erf_cplx(1 + 3j)
    # small arguments are admitted only on request
    with pytest.raises(DomainError):
        erf_cplx(0.5 + 1.8j)
    z = 0.5 + 1.8j
    assert abs(erf_cplx(z, allow_small_critical=True) - complex(mpmath.erf(z))) < 1e-13


def test_erfcx_matches_mpmath():
    z = np.array([0.2 + 0.1j, 2 + 1.9j, 10 - 3j, 100 + 50j])
    ref = np.array([complex(mpmath.exp(v * v) * mpmath.erfc(v)) for v in z])
    assert np.max(np.abs(erfcx_cplx(z) - ref) / np.abs(ref)) < 1e-13
    with pytest.raises(DomainError):
        erfcx_cplx(-1.0 + 0j)


def test_gauss_power_closed_forms():
    assert abs(gauss_power_int(0, 30.0) - math.sqrt(math.pi) / 2) < 1e-14
    assert abs(gauss_power_int(1, 1.0) - 0.3160602794142788) < 1e-14


@pytest.mark.parametrize("k", [0, 1, 3, 7, 12])
@pytest.mark.parametrize("w", [1.5, 0.4 + 0.3j, 3 - 2.5j, 6 + 5.9j, -2 + 1j])
def test_gauss_power_vs_mpmath(k, w):
    ref = complex(mpmath.quad(lambda s: mpmath.exp(-(s * w) ** 2) * (s * w) ** k * w, [0, 1]))
    assert abs(gauss_power_int(k, w) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_gauss_power_table_shapes():
    w = np.array([0.5, 1 + 1j])
    tab = gauss_power_table(4, w)
    assert tab.shape == (5, 2)
    assert np.allclose(tab[2], [gauss_power_int(2, v) for v in w], atol=1e-15)


def test_kummer_identities():
    assert kummer_1f1(0.7, 1.9, 0.0) == 1
    assert abs(kummer_1f1(1, 2, 2.0) - (math.exp(2) - 1) / 2) < 1e-12
    assert abs(kummer_1f1(0.5, 1.5, -1.0) - 0.7468241328124271) < 1e-12


@pytest.mark.parametrize("a,b,z", [(0.3, 1.7, 5 - 3j), (1.5, 2.5, -20 + 7j), (0.5, 1.5, -80j),
                                   (0.25, 1.25, -150 + 60j), (2.0, 3.5, 35 + 10j)])
def test_kummer_vs_mpmath(a, b, z):
    ref = complex(mpmath.hyp1f1(a, b, z))
    assert abs(kummer_1f1(a, b, z) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_kummer_transformation():
    a, b, z = 0.4, 1.9, 3 + 4j
    lhs = kummer_1f1(a, b, z)
    rhs = np.exp(z) * kummer_1f1(b - a, b, -z)
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_hermite():
    assert hermite(0, 0.3 + 1j) == 1
    assert hermite(2, 1.0) == 2
    assert hermite(3, 0.5) == -5
    z = 0.3 - 0.8j
    assert abs(hermite(5, z) - (32 * z ** 5 - 160 * z ** 3 + 120 * z)) < 1e-12


def test_h_p_at_zero_and_limit():
    assert abs(h_p(0.5, 0.0, 1) - 0.5 * math.gamma(0.25) / 2) < 1e-12
    assert abs(h_p(0.5, 0.0, -1) - 0.9064024770554771) < 1e-9
    assert abs(50 ** 0.5 * h_p(0.5, 50.0, -1) / (0.5 * math.sqrt(math.pi)) - 1) < 0.01


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("sign", [1, -1])
def test_h_p_vs_parabolic_and_tanh_sinh(p, sign):
    y = np.linspace(0, 10, 11)
    val = h_p(p, y, sign)
    par = h_p_parabolic(p, y, sign)
    # x = s**(1/p) removes the endpoint singularity; exp(-y**2) is factored out
    ref = np.array([float(mpmath.exp(-v * v) * mpmath.quad(
        lambda s: mpmath.exp(-s ** (2 / p) - 2 * sign * v * s ** (1 / p)),
        [0, (1 / (2 * v + 1)) ** p, 1, (max(v, 1) + 1) ** p, mpmath.inf])) for v in y])
    assert np.max(np.abs(val - ref) / ref) < 1e-8
    assert np.max(np.abs(par - ref) / ref) < 1e-8


def test_h_p_monotone():
    y = np.linspace(0, 8, 33)
    assert np.all(np.diff(h_p(0.5, y, 1)) < 0)
    with pytest.raises(ValueError):
        h_p(1.2, 0.0, 1)
