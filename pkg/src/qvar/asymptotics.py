"""Small-x and near-sup asymptotics of the sample-variance distribution.

Laws have the form F(x) ~ C x**delta (times ln(1/x) in the boundary case).
For the power densities p x**(p-1) the constant follows from the Laplace
transform E exp(-tQ) = sqrt(n/pi) int lambda(t, y)**n dy, whose large-t
behaviour is governed by

    h_p^{+/-}(y) = p int_0^inf exp(-(x +/- y)**2) x**(p-1) dx.
"""

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import comb

from .errors import ConvergenceError, DomainError
from .quadrature import composite_legendre
from .special import h_p
from .cf import sup_q

H_CUT = 60.0
H_REL = 1e-6


@dataclass(frozen=True)
class AsymptoticLaw:
    exponent: float
    constant: float = None
    log_factor: bool = False
    regime: str = ""

    def __call__(self, x):
        if self.constant is None:
            raise DomainError("law has no constant")
        x = np.asarray(x, dtype=float)
        out = self.constant * x ** self.exponent
        return out * np.log(1.0 / x) if self.log_factor else out


def _check_n(n):
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")


def _check_p(p):
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")


def uniform_small_x(n):
    """F(x) ~ sqrt(n) b_{n-1} x**((n-1)/2): a thin cylinder around the diagonal."""
    _check_n(n)
    ball = math.pi ** ((n - 1) / 2.0) / math.gamma((n + 1) / 2.0)
    return AsymptoticLaw((n - 1) / 2.0, math.sqrt(n) * ball, False, "uniform, x -> 0")


def uniform_upper_tail(n, displayed=False):
    """1 - F(q - x) ~ C x**n from the cube corners farthest from the diagonal.

    At a corner with a ones and b zeros, q - Q = sum w_i e_i to first order in
    the inward displacements e, with w = 2b/n on the ones and 2a/n on the
    zeros, so each corner holds a simplex of volume x**n / (n! prod w).  For
    even n all w are 1.  ``displayed=True`` gives the isotropic simplex
    constant (n/(4q))**(n/2) / n! per corner instead; it coincides for even
    n and is too small for odd n (by sqrt 2 at n = 3).
    """
    _check_n(n)
    q = sup_q(n)
    corners = (1 + n - 2 * (n // 2)) * comb(n, n // 2, exact=True)
    if displayed:
        const = corners / math.factorial(n) * (n / (4.0 * q)) ** (n / 2.0)
    else:
        a, b = n - n // 2, n // 2
        const = corners / (math.factorial(n) * (2.0 * b / n) ** a * (2.0 * a / n) ** b)
    return AsymptoticLaw(float(n), const, False, "uniform, x -> sup Q")


def power_density_exponent(n, p):
    """delta = min(np, n-1)/2 for the parent p x**(p-1); log factor when np = n-1."""
    _check_n(n)
    _check_p(p)
    boundary = math.isclose(n * p, n - 1, rel_tol=0, abs_tol=1e-12)
    return AsymptoticLaw(min(n * p, n - 1) / 2.0, None, boundary, _branch(n, p))


def _branch(n, p):
    if math.isclose(n * p, n - 1, rel_tol=0, abs_tol=1e-12):
        return "np = n-1"
    return "np < n-1" if n * p < n - 1 else "np > n-1"


def _h_tail(p, n, y0):
    # int_{y0}^inf (h^-)**n from h^-(y) = p sqrt(pi) y**(p-1) (1 + a/y**2 + b/y**4 + ...)
    a = (p - 1) * (p - 2) / 4.0
    b = 3.0 / 4.0 * (p - 1) * (p - 2) * (p - 3) * (p - 4) / 24.0
    m = n * (1 - p)
    c2 = n * a
    c4 = n * b + n * (n - 1) / 2.0 * a * a
    return (p * math.sqrt(math.pi)) ** n * (
        y0 ** (1 - m) / (m - 1) + c2 * y0 ** (-1 - m) / (m + 1) + c4 * y0 ** (-3 - m) / (m + 3))


def h_integral(p, n, method="gauss"):
    """int_0^inf ((h^-)**n + (h^+)**n) dy for np < n-1.

    ``gauss``: Gauss-Legendre panels on [0, 60] with h_p from the direct
    quadrature; ``tanh-sinh``: mpmath double-exponential quadrature with h_p
    from parabolic cylinder functions.  Both add the same asymptotic tail past
    y = 60, where h^+ is negligible.
    """
    _check_p(p)
    if n * p >= n - 1:
        raise DomainError("the h-integral diverges unless np < n-1")
    tail = _h_tail(p, n, H_CUT)
    if method == "gauss":
        edges = np.concatenate([np.linspace(0, 8, 17), np.geomspace(8, H_CUT, 13)[1:]])
        y, w = composite_legendre(edges, 20)
        body = np.sum(w * (h_p(p, y, -1) ** n + h_p(p, y, 1) ** n))
        return float(body + tail)
    if method == "tanh-sinh":
        with mpmath.workdps(25):
            g = mpmath.gamma(p + 1) * mpmath.mpf(2) ** (-p / 2.0)

            def h(y, sg):
                return g * mpmath.exp(-y * y / 2) * mpmath.pcfu(p - 0.5, sg * y * mpmath.sqrt(2))

            body = mpmath.quad(lambda y: h(y, -1) ** n + h(y, 1) ** n, [0, 1, 4, 12, H_CUT])
        return float(body) + tail
    raise DomainError("unknown method %r" % method)


def c_pn(p, n, method="gauss"):
    """Constant C_pn of F(x) ~ C_pn x**delta for the parent p x**(p-1)."""
    _check_n(n)
    _check_p(p)
    law = power_density_exponent(n, p)
    delta = law.exponent
    if law.log_factor:
        rhs = (p * math.sqrt(math.pi)) ** n / 2.0
    elif n * p > n - 1:
        rhs = (p * math.sqrt(math.pi)) ** n / ((p - 1) * n + 1)
    else:
        rhs = h_integral(p, n, method)
        check = h_integral(p, n, "tanh-sinh" if method == "gauss" else "gauss")
        if abs(rhs - check) > H_REL * abs(check):
            raise ConvergenceError("h-integral schemes disagree: %.12g vs %.12g" % (rhs, check))
    return rhs / (math.gamma(1 + delta) * math.sqrt(math.pi / n))


def power_density_law(n, p, method="gauss"):
    law = power_density_exponent(n, p)
    return AsymptoticLaw(law.exponent, c_pn(p, n, method), law.log_factor, law.regime)


def _lt_lambda(p, t, y):
    # t**(p/2) lambda(t, y) = p int_0^sqrt(t) exp(-(xi + y)**2) xi**(p-1) d xi
    top = math.sqrt(t)
    a = min(1.0, top)
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=400)
    head, _ = integrate.quad(lambda x: math.exp(-(x + y) ** 2), 0.0, a,
                             weight="alg", wvar=(p - 1.0, 0.0), **opts)
    pts = [v for v in (-y - 8.0, -y, -y + 8.0) if a < v < top]
    body, _ = integrate.quad(lambda x: math.exp(-(x + y) ** 2) * x ** (p - 1.0), a, top,
                             points=pts or None, **opts)
    return p * (head + body)


def laplace_scaled(p, n, t):
    """t**(np/2) E exp(-tQ) for the parent p x**(p-1), by real quadrature."""
    _check_n(n)
    _check_p(p)
    top = math.sqrt(t)
    opts = dict(epsabs=0.0, epsrel=1e-10, limit=200)
    pos, _ = integrate.quad(lambda y: _lt_lambda(p, t, y) ** n, 0.0, 12.0, **opts)
    edges = [0.0, 1.0, 3.0]
    while edges[-1] * 3.0 < top - 10.0:
        edges.append(edges[-1] * 3.0)
    edges += [v for v in (top - 10.0, top, top + 10.0) if v > edges[-1]]
    neg = sum(integrate.quad(lambda y: _lt_lambda(p, t, -y) ** n, lo, hi, **opts)[0]
              for lo, hi in zip(edges[:-1], edges[1:]))
    return math.sqrt(n / math.pi) * (pos + neg)


def lt_consistency(p, n, t):
    """Ratio of the scaled Laplace transform at t to its large-t limit (np < n-1)."""
    limit = math.sqrt(n / math.pi) * h_integral(p, n)
    return laplace_scaled(p, n, t) / limit
