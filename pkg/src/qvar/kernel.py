"""The psi kernels.

    psi(t, z)      = E exp(-(z + s X)**2),   s = sqrt(-i t) = sqrt(t/2) (1 - i)
    psi_star(t, u) = E exp(i t (X + u)**2) = psi(t, u s)

The characteristic function of Q integrates psi**n along a path made of two
horizontal rays and the diagonal "bridge" z = u s, -1 <= u <= 0.  The rays
are served by ``psi_ray`` (the left ray through the reflected density, since
psi(t, -y - s; f) = psi(t, y; f(1 - .))) and the bridge by
``psi_bridge(t, u) = psi_star(t, -u)``.

Polynomial parts use the finite sum over Taylor coefficients and the
Gaussian power integrals I_k; exponential parts complete the square and use
erf; non-integer power terms x**a (1-x)**b P(x) are integrated either
directly with a Gauss-Jacobi rule (small t) or, for large t, along
horizontal steepest-descent lines leaving the endpoints.
"""

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .density import Components, Density
from .errors import ConvergenceError, DomainError
from .quadrature import gauss_hermite, gauss_jacobi01
from .special import SQRT_PI, erf_cplx, gauss_power_table, hermite, kummer_1f1

T_DIRECT = 60.0
PIECE_NODES = 32
CUT = 40.0
HERMITE_NODES = 120
# bridge points with u r below this use one-sided contours
ONE_SIDED = 2.0


def sqrt_mit(t):
    """Principal sqrt(-i t) for t > 0; positive real part."""
    r = math.sqrt(0.5 * t)
    return complex(r, -r)


def _taylor_tables(coeffs):
    # row k holds the power coefficients of p^(k) / k!
    c = np.asarray(coeffs, dtype=float)
    d = c.size - 1
    rows = []
    for k in range(d + 1):
        ck = np.array([c[j] * math.comb(j, k) for j in range(k, d + 1)])
        rows.append(ck)
    return rows


class _Part:
    """One side (f or its reflection) of a density, with cached tables."""

    def __init__(self, comp):
        self.comp = comp
        poly = np.trim_zeros(np.asarray(comp.poly, dtype=float), "b")
        self.poly = poly
        self.taylor = _taylor_tables(poly) if poly.size else []
        self.weighted = comp.weighted
        self.exps = comp.exps
        self._envelopes = {}

    # -- polynomial ---------------------------------------------------------
    def poly_psi(self, t, z):
        if not self.taylor:
            return np.zeros_like(z)
        s = sqrt_mit(t)
        d = len(self.taylor) - 1
        hi = gauss_power_table(d, z + s)
        lo = gauss_power_table(d, z)
        x0 = -z / s
        out = np.zeros_like(z)
        for k, row in enumerate(self.taylor):
            out += P.polyval(x0, row) / s ** (k + 1) * (hi[k] - lo[k])
        return out

    def poly_star(self, t, u):
        # sum_k p^(k)(-u)/k! [K_k(u + 1) - K_k(u)],  K_k(v) = I_k(s v) / s**(k+1)
        if not self.taylor:
            return np.zeros_like(u, dtype=complex)
        s = sqrt_mit(t)
        d = len(self.taylor) - 1
        hi = gauss_power_table(d, s * (u + 1))
        lo = gauss_power_table(d, s * u)
        out = np.zeros(np.shape(u), dtype=complex)
        for k, row in enumerate(self.taylor):
            out += P.polyval(-u, row) * (hi[k] - lo[k]) / s ** (k + 1)
        return out

    # -- exponentials ---------------------------------------------------------
    def exp_psi(self, t, z):
        out = np.zeros_like(z)
        for e in self.exps:
            out += e.amp * _exp_base(t, z, e.omega)
        return out

    # -- weighted power terms -------------------------------------------------
    def weighted_direct(self, t, z):
        out = np.zeros_like(z)
        for w in self.weighted:
            out += _weighted_direct(t, z, w)
        return out

    def weighted_ray(self, t, y):
        # contour pieces from both endpoints to +infinity
        out = np.zeros_like(y, dtype=complex)
        s = sqrt_mit(t)
        for w in self.weighted:
            out += (_piece(w, t, y, 0, +1) - _piece(w, t, y, 1, +1)) / s
        return out

    def weighted_bridge(self, t, u):
        s = sqrt_mit(t)
        r = s.real
        z = -u * s
        out = np.zeros_like(z)
        left = u * r < ONE_SIDED
        right = ((1 - u) * r < ONE_SIDED) & ~left
        mid = ~left & ~right
        for w in self.weighted:
            if np.any(left):
                zl = z[left]
                out[left] += (_piece(w, t, zl, 0, +1) - _piece(w, t, zl, 1, +1)) / s
            if np.any(right):
                zr = z[right]
                out[right] += (-_piece(w, t, zr, 0, -1) + _piece(w, t, zr, 1, -1)) / s
        if np.any(mid):
            out[mid] += self.envelope(t)(u[mid])
        return out

    def envelope(self, t):
        env = self._envelopes.get(t)
        if env is None:
            env = _BridgeEnvelope(self, t)
            if len(self._envelopes) > 16:
                self._envelopes.clear()
            self._envelopes[t] = env
        return env


def _exp_base(t, z, omega):
    """psi(t, z; exp(i omega x)) by completing the square."""
    s = sqrt_mit(t)
    if omega == 0.0:
        return 0.5 * SQRT_PI / s * (erf_cplx(z + s, True) - erf_cplx(z, True))
    c = -(omega / (2.0 * t)) * s
    a = z - c
    pref = np.exp(c * c - 2.0 * c * z)
    try:
        diff = erf_cplx(a + s, True) - erf_cplx(a, True)
    except DomainError:
        diff = None
    growth = np.max(np.abs(pref)) if np.size(pref) else 1.0
    if diff is None or growth > 1e3:
        return _exp_direct(t, z, omega)
    return pref * 0.5 * SQRT_PI / s * diff


def _phase_nodes(t, z):
    zmax = float(np.max(np.abs(z))) if np.size(z) else 0.0
    return int(40 + 1.3 * (t + 2.0 * zmax * math.sqrt(t)))


def _exp_direct(t, z, omega):
    s = sqrt_mit(t)
    n = _phase_nodes(t, z) + int(abs(omega))
    x, wts = gauss_jacobi01(n, 0.0, 0.0)
    ez = np.exp(-(z[..., None] + s * x) ** 2 + 1j * omega * x)
    return ez @ wts


def _weighted_direct(t, z, term):
    s = sqrt_mit(t)
    n = _phase_nodes(t, z)
    x, wts = gauss_jacobi01(n, term.alpha, term.beta)
    g = P.polyval(x, term.coeffs) * wts
    return np.exp(-(z[..., None] + s * x) ** 2) @ g


def _piece(term, t, z, end, d, scaled=False):
    """integral_0^inf exp(-(w_a + d tau)**2) g(end + d tau / s) d tau.

    w_a = z + s * end.  The integrand falls below exp(-40) of its peak once
    (rho + tau)**2 exceeds rho+**2 + 40, rho = Re(d w_a), so the line is
    cut there and the endpoint factor tau**gamma goes into a Gauss-Jacobi
    weight on the finite piece.  With ``scaled`` the factor exp(-w_a**2) is
    left out.
    """
    s = sqrt_mit(t)
    wa = z + s * end
    if end == 0:
        gamma, other = term.alpha, term.beta
        fac = (d / s) ** gamma
    else:
        gamma, other = term.beta, term.alpha
        fac = (-d / s) ** gamma
    xi, wxi = gauss_jacobi01(PIECE_NODES, gamma, 0.0)
    rho = (d * wa).real
    top = np.sqrt(CUT + np.maximum(rho, 0.0) ** 2) - rho
    tau = top[..., None] * xi
    x = end + d * tau / s
    expo = tau * (-(2.0 * d) * wa[..., None] - tau)
    if not scaled:
        expo -= (wa * wa)[..., None]
    if other != 0:
        # principal power of the smooth factor, folded into the exponent with
        # real log and arctan2 (much cheaper than complex log or pow)
        y = 1 - x if end == 0 else x
        yr, yi = y.real, y.imag
        expo += other * (0.5 * np.log(yr * yr + yi * yi) + 1j * np.arctan2(yi, yr))
    mag = np.exp(expo.real)
    vals = mag * np.cos(expo.imag) + 1j * (mag * np.sin(expo.imag))
    if len(term.coeffs) > 1:
        vals *= P.polyval(x, term.coeffs)
    else:
        wxi = wxi * term.coeffs[0]
    return fac * top ** (gamma + 1.0) * (vals @ wxi)


def _hermite_line(term, t, z):
    """integral over real sigma of exp(-sigma**2) g((sigma - z) / s)."""
    s = sqrt_mit(t)
    sig, ws = _hermite_pruned()
    x = (sig - z[..., None]) / s
    g = x ** term.alpha * (1 - x) ** term.beta * P.polyval(x, term.coeffs)
    return g @ ws


@lru_cache(maxsize=1)
def _hermite_pruned():
    sig, ws = gauss_hermite(HERMITE_NODES)
    keep = ws > 1e-22
    return sig[keep], ws[keep]


@lru_cache(maxsize=8)
def _cheb_nodes(m):
    j = np.arange(m)
    x = np.cos(np.pi * (2 * j + 1) / (2 * m))
    lam = (-1.0) ** j * np.sin(np.pi * (2 * j + 1) / (2 * m))
    return x, lam


def _bary(xq, a, b, vals, m):
    """Barycentric interpolation from m Chebyshev points on [a, b]."""
    xn, lam = _cheb_nodes(m)
    y = (2.0 * xq - (a + b)) / (b - a)
    diff = y[:, None] - xn
    exact = diff == 0
    diff[exact] = 1.0
    c = lam / diff
    out = (c @ vals.T) / c.sum(axis=1)[:, None]
    if np.any(exact):
        r, col = np.nonzero(exact)
        out[r] = vals.T[col]
    return out


class _BridgeEnvelope:
    """Smooth parts of the power-term bridge integrand away from u = 0, 1.

    psi_w(t, -u) = (exp(i t u**2) A(u) + B(u) + exp(i t (1-u)**2) C(u)) / s
    on the two-sided region; A, B, C are tabulated on dyadic Chebyshev
    panels and interpolated.
    """

    NODES = 24

    def __init__(self, part, t):
        s = sqrt_mit(t)
        r = s.real
        self.lo = ONE_SIDED / r
        self.hi = 1.0 - ONE_SIDED / r
        edges = []
        a = self.lo
        while a < 0.5:
            edges.append(a)
            a *= 2.0
        left = np.array(edges + [0.5])
        right = 1.0 - left[::-1]
        self.edges = np.unique(np.concatenate([left, right]))
        xn, _ = _cheb_nodes(self.NODES)
        a, b = self.edges[:-1, None], self.edges[1:, None]
        u = (0.5 * (a + b) + 0.5 * (b - a) * xn).ravel()
        z = -u * s
        A = np.zeros(u.size, dtype=complex)
        B = np.zeros(u.size, dtype=complex)
        Cc = np.zeros(u.size, dtype=complex)
        for w in part.weighted:
            A -= _piece(w, t, z, 0, -1, scaled=True)
            B += _hermite_line(w, t, z)
            Cc -= _piece(w, t, z, 1, +1, scaled=True)
        self.table = np.stack([A, B, Cc]).reshape(3, -1, self.NODES)
        self.t = t
        self.s = s

    def __call__(self, u):
        out = np.empty(u.size, dtype=complex)
        idx = np.clip(np.searchsorted(self.edges, u, side="right") - 1, 0, len(self.edges) - 2)
        for i in np.unique(idx):
            sel = idx == i
            a, b = self.edges[i], self.edges[i + 1]
            vals = _bary(u[sel], a, b, self.table[:, i, :], self.NODES)
            uu = u[sel]
            out[sel] = (np.exp(1j * self.t * uu * uu) * vals[:, 0] + vals[:, 1]
                        + np.exp(1j * self.t * (1 - uu) ** 2) * vals[:, 2])
        return out / self.s


class PsiContext:
    """Immutable evaluation context for one density.

    Holds the component split of the density and of its reflection
    f(1 - x), with Taylor tables of the polynomial parts precomputed.
    """

    def __init__(self, density, t_direct=T_DIRECT):
        if isinstance(density, Components):
            comp = density
            self.density = None
        elif isinstance(density, Density):
            comp = density.components()
            self.density = density
        else:
            raise TypeError("expected a Density or Components")
        self.components = comp
        self.t_direct = float(t_direct)
        self._f = _Part(comp)
        self._g = _Part(comp.reflect())

    @property
    def polynomial_only(self):
        return not self._f.weighted and not self._f.exps

    def _part(self, reflected):
        return self._g if reflected else self._f

    def psi(self, t, z, reflected=False):
        """psi(t, z) at arbitrary sector-safe z (vectorized).

        Power terms are integrated with the direct rule, which is exact in
        principle but needs O(t) nodes; the path-specific methods below are
        much faster for large t.
        """
        z = np.asarray(z, dtype=complex)
        if t == 0:
            return np.exp(-z * z) * 1.0
        part = self._part(reflected)
        out = part.poly_psi(t, z) + part.exp_psi(t, z)
        if part.weighted:
            out = out + part.weighted_direct(t, z)
        return out

    def psi_ray(self, t, y, reflected=False):
        """psi(t, y) for real y >= 0; with ``reflected`` this is psi(t, -y - s)."""
        y = np.asarray(y, dtype=float)
        z = y.astype(complex)
        part = self._part(reflected)
        out = part.poly_psi(t, z) + part.exp_psi(t, z)
        if part.weighted:
            if t < self.t_direct:
                out = out + part.weighted_direct(t, z)
            else:
                out = out + part.weighted_ray(t, y)
        return out

    def psi_bridge(self, t, u):
        """psi_star(t, -u) for 0 <= u <= 1."""
        u = np.asarray(u, dtype=float)
        part = self._f
        s = sqrt_mit(t)
        z = -u * s
        out = part.poly_star(t, -u) + part.exp_psi(t, z)
        if part.weighted:
            if t < self.t_direct:
                out = out + part.weighted_direct(t, z)
            else:
                out = out + part.weighted_bridge(t, u)
        return out

    def quad_exp(self, a, b):
        """E exp(i (a X**2 + b X)) by direct quadrature, a real, b complex.

        Used where the shifted-square variants would need erf deep inside the
        critical area (complex shifts whose factors grow).
        """
        b = np.asarray(b, dtype=complex)
        part = self._f
        reach = abs(a) + float(np.max(np.abs(b))) if b.size else abs(a)
        n = int(40 + 1.3 * reach)
        x, wts = gauss_jacobi01(n, 0.0, 0.0)
        ph = np.exp(1j * (a * x * x + b[..., None] * x))
        dens = np.zeros_like(x, dtype=complex)
        if part.poly.size:
            dens = dens + P.polyval(x, part.poly)
        for e in part.exps:
            dens = dens + e.amp * np.exp(1j * e.omega * x)
        out = ph @ (dens * wts)
        for w in part.weighted:
            xj, wj = gauss_jacobi01(n, w.alpha, w.beta)
            g = P.polyval(xj, w.coeffs) * wj
            out = out + np.exp(1j * (a * xj * xj + b[..., None] * xj)) @ g
        return out

    def psi_star(self, t, u):
        """E exp(i t (X + u)**2) for real or complex u (vectorized).

        Bounded variants only need erf on the diagonal direction, where the
        argument never leaves the admissible sector.
        """
        u = np.asarray(u, dtype=complex)
        if t == 0:
            return np.ones_like(u)
        part = self._f
        s = sqrt_mit(t)
        out = part.poly_star(t, u) + part.exp_psi(t, u * s)
        if part.weighted:
            real_bridge = (np.abs(u.imag) < 1e-15) & (u.real >= -1) & (u.real <= 0)
            if t >= self.t_direct and np.all(real_bridge):
                out = out + part.weighted_bridge(t, -u.real)
            else:
                out = out + part.weighted_direct(t, u * s)
        return out


def psi_moment_series(density, t, z, max_terms=200, tol=1e-13):
    """psi(t, z) = exp(-z**2) sum_j mu_j H_j(z) (-s)**j / j!  (guarded).

    Only usable for small t |z|; the partial sums are watched for growth and
    a ConvergenceError is raised when they stop settling.
    """
    z = complex(z)
    s = sqrt_mit(t)
    total = 0j
    peak = 0.0
    fact = 1.0
    for j in range(max_terms):
        if j:
            fact *= j
        term = density.moment(j) * complex(hermite(j, z)) * (-s) ** j / fact
        total += term
        peak = max(peak, abs(term))
        if j > 4 and abs(term) < tol * max(abs(total), 1e-300):
            if peak > 1e8 * max(abs(total), 1e-300):
                raise ConvergenceError("moment series lost all accuracy to cancellation")
            return np.exp(-z * z) * total
    raise ConvergenceError("moment series did not converge in %d terms" % max_terms)


# -- relation through 1 - F -------------------------------------------------

IBP_TERMS = 24


def _poly_cf(c, omega):
    # integral_0^1 c(x) exp(i omega x) dx; integration by parts terminates
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    if c.size == 0:
        return 0j
    deg = c.size - 1
    if abs(omega) < 2 * deg + 20:
        x, w = gauss_jacobi01(deg // 2 + int(abs(omega)) + 40, 0.0, 0.0)
        return complex(np.sum(w * P.polyval(x, c) * np.exp(1j * omega * x)))
    total = 0j
    e1 = np.exp(1j * omega)
    for j in range(deg + 1):
        total += (-1) ** j * (P.polyval(1.0, c) * e1 - P.polyval(0.0, c)) / (1j * omega) ** (j + 1)
        c = P.polyder(c)
    return complex(total)


def component_cf(comp, omega, power=0):
    """E X**power exp(i omega X) from the component form (power 0 or 1).

    Power terms x**alpha (1-x)**beta x**j give beta functions times
    1F1(alpha+j+1; alpha+beta+j+2; i omega).
    """
    omega = float(omega)
    shift = np.zeros(power)
    total = _poly_cf(np.concatenate([shift, comp.poly]) if len(comp.poly) else [], omega)
    for e in comp.exps:
        total += e.amp * _poly_cf(np.concatenate([shift, [1.0]]), omega + e.omega)
    for w in comp.weighted:
        bb = w.beta + 1.0
        for j, c in enumerate(w.coeffs):
            if c == 0:
                continue
            a = w.alpha + j + power + 1.0
            lb = math.lgamma(a) + math.lgamma(bb) - math.lgamma(a + bb)
            total += c * math.exp(lb) * kummer_1f1(a, a + bb, 1j * omega)
    return complex(total)


def _osc_psi(t, z, omegas):
    """psi(t, z; exp(i omega x)) for scalar z and an array of omegas.

    Large omegas use the integration-by-parts expansion in 1/omega with the
    derivatives of exp(-(z + x s)**2) written through Hermite polynomials.
    """
    s = sqrt_mit(t)
    omegas = np.asarray(omegas, dtype=float)
    out = np.empty(omegas.shape, dtype=complex)
    reach = abs(z) + abs(s) + math.sqrt(IBP_TERMS)
    big = np.abs(omegas) >= 4.0 * abs(s) * reach + 10.0
    zz = np.array([z], dtype=complex)
    for i in np.flatnonzero(~big):
        out[i] = _exp_base(t, zz, float(omegas[i]))[0]
    if np.any(big):
        om = omegas[big]
        y0, y1 = z, z + s
        g0, g1 = np.exp(-y0 * y0), np.exp(-y1 * y1)
        e1 = np.exp(1j * om)
        total = np.zeros(om.shape, dtype=complex)
        for j in range(IBP_TERMS):
            d0 = (-s) ** j * complex(hermite(j, y0)) * g0
            d1 = (-s) ** j * complex(hermite(j, y1)) * g1
            total += (-1) ** j * (d1 * e1 - d0) / (1j * om) ** (j + 1)
        out[big] = total
    return out


def psi_from_cdf(ctx, t, z, tol=1e-10, m_start=64, m_cap=1 << 14):
    """psi(t, z) through the cosine series of 1 - F and the sine series of x(1 - F).

    psi(f) = exp(-z**2) - 2 z s psi(1 - F) + 2 i t psi(x (1 - F)), with
    coefficients A_m = 2 Im f(m pi)/(m pi) and
    b_m = 2 (Im f(m pi)/(m pi) - d/dw Im f(m pi))/(m pi).  Partial sums at
    doubling M are extrapolated by Aitken's delta-squared process.
    """
    comp = ctx.components
    z = complex(z)
    s = sqrt_mit(t)
    mu1 = component_cf(comp, 0.0, 1).real
    base = np.exp(-z * z) - 2 * z * s * mu1 * _exp_base(t, np.array([z]), 0.0)[0]

    def block(lo, hi):
        m = np.arange(lo, hi, dtype=float)
        om = m * math.pi
        fs = np.array([component_cf(comp, w).imag for w in om])
        fds = np.array([component_cf(comp, w, 1).real for w in om])
        A = 2 * fs / om
        b = 2 * (fs / om - fds) / om
        ep = _osc_psi(t, z, om)
        em = _osc_psi(t, z, -om)
        pc = 0.5 * (ep + em)
        ps = (ep - em) / 2j
        return complex(-2 * z * s * np.sum(A * pc) + 2j * t * np.sum(b * ps))

    sums = []
    extrap = []
    M = m_start
    total = base + block(1, M + 1)
    sums.append(total)
    while True:
        if M * 2 > m_cap:
            break
        total = total + block(M + 1, 2 * M + 1)
        M *= 2
        sums.append(total)
        if len(sums) >= 3:
            d1 = sums[-2] - sums[-3]
            d2 = sums[-1] - sums[-2]
            den = d2 - d1
            extrap.append(sums[-1] - d2 * d2 / den if abs(den) > 1e-300 else sums[-1])
            if len(extrap) >= 2 and abs(extrap[-1] - extrap[-2]) <= tol:
                return extrap[-1]
    raise ConvergenceError("1 - F series not within %.1e at M = %d" % (tol, M))
