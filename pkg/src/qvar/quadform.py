"""Distribution of one-factorial quadratic forms Q = X'(D -/+ cc')X.

X has independent coordinates X_j with densities f_j on [a_j, b_j]
(a_j <= 0 <= b_j), D is diagonal and positive.  Completing the square
against a Gaussian in u gives

    f_Q(t) = sqrt(-/+ i t / pi) int exp(+/- i lam t u**2) prod_j psi*_j(t, u) du,

with psi*_j the cf of d_j (X_j +/- c_j u / d_j)**2 and lam = 1 -/+ sum c_j**2/d_j.
The u-integral runs over a finite core where the factors oscillate.  Past
U = max_j d_j max(|a_j|, |b_j|) / |c_j| every shifted coordinate keeps one
sign, and the two tails are turned by exp(+/- i pi/4) into the half plane
where the integrand decays like a Gaussian.
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cf import adaptive_gl, grow_coefficients, _graded, K_CAP, K_START
from .density import Density, from_json, uniform, validate
from .dist import cdf_q
from .errors import DomainError, SizeError
from .kernel import PsiContext, sqrt_mit
from .series import Family, _EPS, _classes

VERTEX_CAP = 24
FACE_CAP = 10
LAMBDA_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class QuadFormSpec:
    d: tuple
    c: tuple
    sign: str = "minus"
    supports: tuple = None
    densities: tuple = None

    def __post_init__(self):
        d = tuple(float(v) for v in self.d)
        c = tuple(float(v) for v in self.c)
        n = len(d)
        if n < 1 or len(c) != n:
            raise DomainError("d and c must have the same positive length")
        supports = self.supports or tuple((0.0, 1.0) for _ in range(n))
        supports = tuple((float(a), float(b)) for a, b in supports)
        densities = self.densities or tuple(uniform() for _ in range(n))
        densities = tuple(densities)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "supports", supports)
        object.__setattr__(self, "densities", densities)
        if len(supports) != n or len(densities) != n:
            raise DomainError("need one support and one density per variable")
        if self.sign not in ("minus", "plus"):
            raise DomainError("sign must be 'minus' or 'plus'")
        if min(d) <= 0:
            raise DomainError("all d_j must be positive")
        if sum(1 for v in c if v != 0) < 2:
            raise DomainError("at least two c_j must be nonzero")
        for a, b in supports:
            if not (a <= 0 <= b and a < b):
                raise DomainError("supports need a_j <= 0 <= b_j and a_j < b_j")
        if not all(isinstance(f, Density) for f in densities):
            raise DomainError("densities must be Density objects on [0, 1]")
        for f in densities:
            validate(f)
        if self.lam < -LAMBDA_TOL:
            raise DomainError("lambda = %.3g < 0: the form is not semi-definite" % self.lam)
        if np.min(np.linalg.eigvalsh(self.matrix)) < -PSD_TOL:
            raise DomainError("D -/+ cc' has a negative eigenvalue")

    @property
    def n(self):
        return len(self.d)

    @property
    def eps(self):
        return 1.0 if self.sign == "minus" else -1.0

    @property
    def lam(self):
        return 1.0 - self.eps * sum(cj * cj / dj for cj, dj in zip(self.c, self.d))

    @property
    def matrix(self):
        c = np.array(self.c)
        return np.diag(self.d) - self.eps * np.outer(c, c)

    def value(self, x):
        """Q at points x (shape (..., n))."""
        x = np.asarray(x, dtype=float)
        return (x * x) @ np.array(self.d) - self.eps * (x @ np.array(self.c)) ** 2

    def mean(self):
        """E Q from the first two moments of each coordinate."""
        pairs = list(zip(self.supports, self.densities))
        m1 = np.array([a + (b - a) * f.moment(1) for (a, b), f in pairs])
        m2 = np.array([a * a + 2 * a * (b - a) * f.moment(1) + (b - a) ** 2 * f.moment(2)
                       for (a, b), f in pairs])
        M = self.matrix
        return float(m1 @ M @ m1 + np.sum(np.diag(M) * (m2 - m1 * m1)))

    @classmethod
    def sample_variance(cls, n, density=None):
        density = density or uniform()
        return cls((1.0,) * n, (1.0 / math.sqrt(n),) * n, "minus",
                   tuple((0.0, 1.0) for _ in range(n)), tuple(density for _ in range(n)))

    @classmethod
    def from_json(cls, obj):
        dens = obj.get("densities")
        if dens is not None:
            dens = tuple(from_json(v)[0] for v in dens)
        sup = obj.get("supports")
        return cls(tuple(obj["d"]), tuple(obj["c"]), obj.get("sign", "minus"),
                   tuple(tuple(s) for s in sup) if sup else None, dens)

    def to_json(self):
        return {"version": 1, "d": list(self.d), "c": list(self.c), "sign": self.sign,
                "supports": [list(s) for s in self.supports],
                "densities": [f.to_json() for f in self.densities]}


def sup_q_form(spec):
    """Maximum of the convex form over the box, by vertex enumeration."""
    n = spec.n
    if n > VERTEX_CAP:
        raise SizeError("vertex enumeration is capped at n = %d" % VERTEX_CAP)
    lo = np.array([a for a, _ in spec.supports])
    hi = np.array([b for _, b in spec.supports])
    best = -math.inf
    chunk = 16
    head = max(0, n - chunk)
    for prefix in itertools.product((0, 1), repeat=head):
        bits = np.array(list(itertools.product((0, 1), repeat=n - head)), dtype=bool)
        pre = np.broadcast_to(np.array(prefix, dtype=bool), (bits.shape[0], head))
        mask = np.concatenate([pre, bits], axis=1)
        x = np.where(mask, hi, lo)
        best = max(best, float(np.max(spec.value(x))))
    return best


@lru_cache(maxsize=32)
def _contexts(spec):
    return tuple(PsiContext(f) for f in spec.densities)


def _core_radius(spec):
    reach = [dj * max(abs(a), abs(b)) / abs(cj)
             for dj, cj, (a, b) in zip(spec.d, spec.c, spec.supports) if cj != 0]
    U = max(reach)
    if spec.sign == "plus":
        U = max(U, sum(abs(cj) * max(abs(a), abs(b)) for cj, (a, b) in zip(spec.c, spec.supports)))
    return U + 0.25


def _integrand(spec, ctxs, t):
    eps = spec.eps

    def g(u):
        u = np.asarray(u, dtype=complex)
        out = np.exp(1j * eps * spec.lam * t * u * u)
        for ctx, dj, cj, (a, b) in zip(ctxs, spec.d, spec.c, spec.supports):
            L = b - a
            out = out * ctx.psi_star(t * dj * L * L, (a + eps * cj * u / dj) / L)
        return out

    return g


def _raw_integrand(spec, ctxs, t):
    # exp(i eps t u**2) prod_j E exp(i t (d_j X_j**2 + 2 eps c_j u X_j)); equal to
    # the completed-square integrand, but each factor stays bounded by
    # exp(2 t |Im u| |c_j| max|X_j|) off the real line
    eps = spec.eps

    def g(u):
        u = np.asarray(u, dtype=complex)
        out = np.exp(1j * eps * t * u * u)
        for ctx, dj, cj, (a, b) in zip(ctxs, spec.d, spec.c, spec.supports):
            L = b - a
            lin = t * (2 * dj * a * L + 2 * eps * cj * u * L)
            out = out * np.exp(1j * t * (dj * a * a + 2 * eps * cj * u * a)) \
                * ctx.quad_exp(t * dj * L * L, lin)
        return out

    return g


def cf_form_at(spec, t, tol=1e-12):
    """f_Q(t) for the quadratic form (real-line form with rotated tails)."""
    if t == 0:
        return 1.0 + 0j
    if (t * sup_q_form(spec)) ** 2 <= tol:
        # |f(t) - 1 - i t E Q| <= (t sup Q)**2 / 2
        return 1.0 + 1j * t * spec.mean()
    ctxs = _contexts(spec)
    g = _integrand(spec, ctxs, t)
    U = _core_radius(spec)
    # the integrand is E exp(i t (eps u**2 + 2 eps u c.X + X'DX)) averaged over X,
    # so its phase moves at most 2 t (|u| + max|c.X|) per unit u
    reach = sum(abs(cj) * max(abs(a), abs(b)) for cj, (a, b) in zip(spec.c, spec.supports))
    rate = 2.0 * t * (U + reach)
    h = min(0.25, 8.0 / rate)
    core = adaptive_gl(g, np.linspace(-U, U, int(math.ceil(2 * U / h)) + 1), tol)
    rot = np.exp(0.25j * math.pi * spec.eps)
    # plus: U exceeds max|c.X|, so the raw integrand is below exp(-t rho**2)
    rho_max = math.sqrt(60.0 / t) + (0.5 if spec.sign == "minus" else 0.0)
    edges = _graded(0.0, rho_max, rho_max / 512, rho_max / 16)
    tail = g if spec.sign == "minus" else _raw_integrand(spec, ctxs, t)
    right = adaptive_gl(lambda p: tail(U + p * rot), edges, tol)
    left = adaptive_gl(lambda p: tail(-U - p * rot), edges, tol)
    s = sqrt_mit(t) if spec.eps > 0 else np.conj(sqrt_mit(t))
    return complex(s / math.sqrt(math.pi) * (core + rot * (right + left)))


def cf_form_values(spec, ts, tol=1e-12):
    return np.array([cf_form_at(spec, float(t), tol) for t in ts])


def critical_points(spec):
    """(Q_c, orders) for the critical points of Q on the faces of the box.

    Each coordinate is fixed at an end or left free; the free block is
    minimised (the form is convex).  A fixed coordinate contributes its end
    exponent classes, halved where the gradient vanishes; each free
    non-degenerate direction contributes 1/2.
    """
    n = spec.n
    if n > FACE_CAP:
        raise SizeError("face enumeration is capped at n = %d" % FACE_CAP)
    M = spec.matrix
    lo = np.array([a for a, _ in spec.supports])
    hi = np.array([b for _, b in spec.supports])
    classes = [(_classes(f, 0), _classes(f, 1)) for f in spec.densities]
    out = []
    for assign in itertools.product((0, 1, 2), repeat=n):
        free = [j for j in range(n) if assign[j] == 2]
        fixed = [j for j in range(n) if assign[j] != 2]
        x = np.zeros(n)
        for j in fixed:
            x[j] = lo[j] if assign[j] == 0 else hi[j]
        nullity = 0
        if free:
            A = M[np.ix_(free, free)]
            rhs = -M[np.ix_(free, fixed)] @ x[fixed] if fixed else np.zeros(len(free))
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.max(np.abs(A @ sol - rhs)) > 1e-9:
                continue
            evals, evecs = np.linalg.eigh(A)
            null = evecs[:, evals < 1e-10]
            nullity = null.shape[1]
            if nullity:
                # singular block: the minimisers form an affine set; take the
                # point nearest the centre of the face so it can be interior
                mid = 0.5 * (lo[free] + hi[free])
                sol = sol + null @ (null.T @ (mid - sol))
            x[free] = sol
            if np.any(sol <= lo[free] + 1e-12) or np.any(sol >= hi[free] - 1e-12):
                continue
        grad = 2.0 * M @ x
        parts = []
        for j in fixed:
            cls = classes[j][0] if assign[j] == 0 else classes[j][1]
            w = 0.5 if abs(grad[j]) < 1e-12 else 1.0
            parts.append([w * c_ for c_ in cls])
        base = 0.5 * (len(free) - nullity)
        orders = {round(base + sum(combo), 10) for combo in itertools.product(*parts)} \
            if parts else {round(base, 10)}
        out.append((float(x @ M @ x), sorted(orders)))
    return out


def form_families(spec, q):
    points = critical_points(spec)

    def fams_fn(gamma_max, logs=()):
        seen = set()
        fams = []
        for qc, orders in points:
            omega = round((qc / q) % 2.0, 12)
            if abs(omega - 2.0) < 1e-9:
                omega = 0.0
            for g0 in orders:
                j = 0
                while g0 + j / 2.0 <= gamma_max + _EPS:
                    g = round(g0 + j / 2.0, 10)
                    j += 1
                    key = (g, omega)
                    if g <= 0 or key in seen:
                        continue
                    seen.add(key)
                    if omega == 0.0:
                        fams.append(Family(g, 0.0, "c"))
                    elif abs(omega - 1.0) < 1e-9:
                        fams.append(Family(g, 1.0, "c"))
                    else:
                        fams.append(Family(g, omega, "c"))
                        fams.append(Family(g, omega, "s"))
        return fams

    plain = sorted({g for qc, orders in points if abs((qc / q) % 2.0) < 1e-9 for g in orders})
    return fams_fn, (plain[0] if plain else 0.5)


@lru_cache(maxsize=16)
def coefficients_form(spec, tol=1e-8, k_cap=K_CAP, k_start=K_START):
    """Fourier coefficients of the form's distribution on t_k = k pi / sup Q."""
    q = sup_q_form(spec)
    fams_fn, g0 = form_families(spec, q)
    quad_tol = min(1e-11, tol / 10.0)
    exps = [w.alpha + 1 for f in spec.densities for w in f.components().weighted]
    exps += [w.beta + 1 for f in spec.densities for w in f.components().weighted]
    return grow_coefficients(lambda ts: cf_form_values(spec, ts, quad_tol), spec.n, q,
                             fams_fn, g0, (), tol, quad_tol, k_cap, k_start,
                             {"min_exponent": min([1.0] + exps), "form": spec.to_json()})


def cdf_form(spec, x, tol=1e-8):
    """P(Q <= x) for the quadratic form, x in [0, sup Q]."""
    return cdf_q(coefficients_form(spec, tol), x)
