"""Complex special functions on the argument sets the path integrals visit.

Everything here is vectorized over the complex argument.  The error function
is only evaluated in the admissible sector |Re z| >= |Im z|, where it stays
bounded; inside the "critical area" exp(-z**2) grows like exp(|Im z|**2) and
values are refused unless the caller explicitly allows small arguments.
"""

import math

import numpy as np
from scipy import special as sp

from .errors import ConvergenceError, DomainError
from .quadrature import composite_legendre, gauss_jacobi01

SQRT_PI = math.sqrt(math.pi)
SECTOR_TOL = 1e-9
SERIES_RADIUS = 1.5
CRITICAL_RADIUS = 3.0


def in_sector(z, tol=SECTOR_TOL):
    z = np.asarray(z, dtype=complex)
    return np.abs(z.imag) <= np.abs(z.real) + tol


def _erf_series(z):
    # Maclaurin series; rounding loss grows like exp(|z|**2), so only for small |z|
    z = np.asarray(z, dtype=complex)
    z2 = z * z
    term = z.copy()
    total = z.copy()
    for n in range(1, 200):
        term = -term * z2 / n
        inc = term / (2 * n + 1)
        total = total + inc
        if np.all(np.abs(inc) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return 2.0 / SQRT_PI * total


def _erfcx_cf(z):
    # Laplace continued fraction for exp(z**2) erfc(z), Re z > 0, evaluated
    # bottom-up; arguments are bucketed by modulus so each bucket runs at
    # the depth its smallest member needs
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    mod = np.abs(z)
    lo = SERIES_RADIUS
    for hi in (2.0, 3.0, 5.0, 10.0, 25.0, np.inf):
        sel = (mod >= lo) & (mod < hi) if lo > SERIES_RADIUS else mod < hi
        if np.any(sel):
            zs = z[sel]
            depth = int(math.ceil(20 + 420.0 / lo ** 2))
            f = np.zeros_like(zs)
            for k in range(depth, 0, -1):
                f = (0.5 * k) / (zs + f)
            out[sel] = 1.0 / (SQRT_PI * (zs + f))
        lo = hi
    return out


def erfcx_cplx(z):
    """Scaled complementary error function exp(z**2) erfc(z).

    Defined here for the right half of the admissible sector
    (Re z >= |Im z|), where the value is O(1/|z|) and the exponential
    factor never overflows.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.real < -SECTOR_TOL) or not np.all(in_sector(z)):
        raise DomainError("erfcx_cplx needs Re z >= |Im z|")
    out = np.empty_like(z)
    small = np.abs(z) < SERIES_RADIUS
    if np.any(small):
        zs = z[small]
        out[small] = np.exp(zs * zs) * (1.0 - _erf_series(zs))
    if np.any(~small):
        out[~small] = _erfcx_cf(z[~small])
    return out


def erf_cplx(z, allow_small_critical=False):
    """Error function for complex arguments in |Re z| >= |Im z|.

    Odd and conjugate symmetric.  Arguments inside the critical area raise
    DomainError; with ``allow_small_critical`` those with |z| < 3 are
    evaluated by the Maclaurin series instead.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    ok = in_sector(z)
    small = np.abs(z) < SERIES_RADIUS
    if not np.all(ok):
        bad = ~ok & ~small
        if allow_small_critical:
            bad &= np.abs(z) >= CRITICAL_RADIUS
        if np.any(bad):
            raise DomainError(
                "erf argument in the critical area |Re z| < |Im z|: %r"
                % complex(z[bad][0]))
        small = small | ~ok
    out = np.empty_like(z)
    if np.any(small):
        out[small] = _erf_series(z[small])
    big = ~small
    if np.any(big):
        zb = z[big]
        flip = zb.real < 0
        zr = np.where(flip, -zb, zb)
        val = 1.0 - np.exp(-zr * zr) * _erfcx_cf(zr)
        out[big] = np.where(flip, -val, val)
    return out[0] if scalar else out


def gauss_power_table(kmax, w):
    """I_k(w) = integral_0^w exp(-z**2) z**k dz for k = 0..kmax.

    Returns an array of shape (kmax + 1,) + w.shape.  Upward recurrence
    I_k = (k-1)/2 I_{k-2} - w**(k-1) exp(-w**2)/2 is used where it is stable
    (|w|**2 >= k/2 + 1); elsewhere the Kummer-transformed series
    I_k = w**(k+1)/(k+1) exp(-w**2) sum_m (w**2)**m / ((k+3)/2)_m,
    whose terms are monotone there, is summed directly.
    """
    w = np.asarray(w, dtype=complex)
    if w.ndim == 0:
        return gauss_power_table(kmax, w[None])[:, 0]
    out = np.empty((kmax + 1,) + w.shape, dtype=complex)
    w2 = w * w
    e = np.exp(-w2)
    out[0] = 0.5 * SQRT_PI * erf_cplx(w)
    if kmax >= 1:
        out[1] = -0.5 * np.expm1(-w2)
    absw2 = np.abs(w2)
    wpow = w.copy()  # w**(k-1)
    for k in range(2, kmax + 1):
        rec = absw2 >= 0.5 * k + 1.0
        val = 0.5 * (k - 1) * out[k - 2] - 0.5 * wpow * e
        if not np.all(rec):
            m = ~rec
            val[m] = _power_int_series(k, w[m], w2[m], e[m])
        out[k] = val
        wpow = wpow * w
    return out


def _power_int_series(k, w, w2, e):
    a = 0.5 * (k + 3)
    term = np.ones_like(w)
    total = np.ones_like(w)
    for m in range(1, 2000):
        term = term * w2 / (a + m - 1)
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    else:
        raise ConvergenceError("power-integral series did not converge")
    return w ** (k + 1) / (k + 1) * e * total


def gauss_power_int(k, w):
    """Single I_k(w); see gauss_power_table."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    w = np.asarray(w, dtype=complex)
    return gauss_power_table(k, w)[k]


def hermite(j, z):
    """Physicists' Hermite polynomial H_j(z) by three-term recurrence."""
    z = np.asarray(z, dtype=complex if np.iscomplexobj(z) else float)
    h0 = np.ones_like(z)
    if j == 0:
        return h0
    h1 = 2 * z
    for k in range(1, j):
        h0, h1 = h1, 2 * z * h1 - 2 * k * h0
    return h1


def _kummer_taylor(a, b, z, radius):
    if abs(z) > radius:
        return None
    term = 1.0 + 0j
    total = 1.0 + 0j
    mass = 1.0
    for n in range(5000):
        term *= (a + n) / (b + n) * z / (n + 1)
        total += term
        mass += abs(term)
        if abs(term) <= 1e-17 * abs(total) and n > abs(z):
            break
    else:
        return None
    # reject when cancellation has eaten more than ~4 digits
    if mass > 1e4 * abs(total):
        return None
    return total


def _kummer_integral(a, b, z, tol=1e-11):
    if not (b > a > 0):
        return None
    logc = math.lgamma(b) - math.lgamma(a) - math.lgamma(b - a)
    prev = None
    n = int(40 + 1.5 * abs(z))
    for _ in range(5):
        x, w = gauss_jacobi01(n, a - 1.0, b - a - 1.0)
        val = math.exp(logc) * np.sum(w * np.exp(z * x))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return complex(val)
        prev = val
        n = int(1.5 * n)
    return None


def _kummer_asymptotic(a, b, z, tol=1e-15):
    # large-|z| expansion, valid for -pi/2 < arg z <= 3 pi/2 (upper sign) and
    # its mirror image; each series is cut at its smallest term
    sign = 1.0 if z.imag >= 0 else -1.0

    def series(p1, p2, w):
        term = 1.0 + 0j
        total = 1.0 + 0j
        for k in range(200):
            nxt = term * (p1 + k) * (p2 + k) / ((k + 1) * w)
            if abs(nxt) >= abs(term):
                return total, abs(term)
            term = nxt
            total += term
            if abs(term) <= tol * abs(total):
                return total, 0.0
        return total, abs(term)

    s1, e1 = series(a, a - b + 1, -z)
    s2, e2 = series(1 - a, b - a, z)
    c1 = np.exp(sign * 1j * math.pi * a) * z ** (-a) * sp.rgamma(b - a)
    c2 = np.exp(z) * z ** (a - b) * sp.rgamma(a)
    val = math.gamma(b) * (c1 * s1 + c2 * s2)
    err = math.gamma(b) * (abs(c1) * e1 + abs(c2) * e2)
    if err > 1e-13 * max(abs(val), 1e-300):
        return None
    return complex(val)


def kummer_1f1(a, b, z, radius=30.0, asymptotic_radius=40.0):
    """Confluent hypergeometric 1F1(a; b; z) for complex z.

    Taylor series for |z| <= radius (also tried on the Kummer-transformed
    side e**z 1F1(b-a; b; -z)); the large-|z| asymptotic expansion past
    ``asymptotic_radius`` when its smallest term is negligible; otherwise
    the Euler integral with a Gauss-Jacobi rule (requires b > a > 0).
    """
    if b <= 0 and float(b).is_integer():
        raise DomainError("b must not be a non-positive integer")
    z = complex(z)
    if z == 0:
        return 1.0 + 0j
    val = _kummer_taylor(a, b, z, radius)
    if val is not None:
        return val
    val = _kummer_taylor(b - a, b, -z, radius)
    if val is not None:
        return complex(np.exp(z) * val)
    if abs(z) >= asymptotic_radius and z.real <= 0.5 * abs(z):
        val = _kummer_asymptotic(a, b, z)
        if val is not None:
            return val
    val = _kummer_integral(a, b, z)
    if val is not None:
        return val
    raise ConvergenceError("1F1(%g; %g; %r) did not converge" % (a, b, z))


def h_p(p, y, sign):
    """h_p^{+/-}(y) = p * integral_0^inf exp(-(x +/- y)**2) x**(p-1) dx.

    The integrable x**(p-1) singularity on [0, 1] is absorbed into a
    Gauss-Jacobi weight; [1, inf) is covered with Gauss-Legendre panels up
    to ten units past the Gaussian peak, beyond which the integrand is
    below exp(-100).
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    val = _h_p(p, y, sign, 48, 20)
    check = _h_p(p, y, sign, 72, 30)
    if np.any(np.abs(val - check) > 1e-10 * np.maximum(np.abs(check), 1e-300)):
        raise ConvergenceError("h_p quadrature not converged")
    return check[0] if scalar else check


def _h_p(p, y, sign, njac, nleg):
    return np.array([_h_p_one(p, float(v), sign, njac, nleg) for v in y])


def _h_p_one(p, y, sign, njac, nleg):
    # integrand exp(-(x + sign*y)**2) x**(p-1); the Gaussian factor is scaled
    # by exp(y**2) when sign = +1 so that large y keeps relative accuracy
    shift = y * y if sign > 0 else 0.0
    slope0 = 2.0 * y + 1.0 if sign > 0 else 1.0
    c = min(1.0, 1.0 / slope0)
    x, w = gauss_jacobi01(njac, p - 1.0, 0.0)
    x = c * x
    head = c ** p * np.sum(w * np.exp(shift - (x + sign * y) ** 2))
    if sign > 0:
        top = c + 40.0 / (2.0 * y + 1.0) + 7.0
    else:
        top = max(y, 1.0) + 10.0
    edges = [c]
    while edges[-1] < top:
        xe = edges[-1]
        rate = abs(2.0 * (xe + sign * y)) + 1.0
        edges.append(xe + min(1.0, 4.0 / rate, xe))
    xs, ws = composite_legendre(edges, nleg)
    body = np.sum(np.exp(shift - (xs + sign * y) ** 2) * xs ** (p - 1.0) * ws)
    return p * np.exp(-shift) * (head + body)


def h_p_parabolic(p, y, sign):
    """Parabolic-cylinder form 2**(-p/2) G(p+1) exp(-y**2/2) U(p-1/2, +/-y sqrt 2)."""
    y = np.asarray(y, dtype=float)
    d, _ = sp.pbdv(-p, sign * y * math.sqrt(2.0))
    return 2.0 ** (-p / 2.0) * math.gamma(p + 1.0) * np.exp(-y * y / 2.0) * d
