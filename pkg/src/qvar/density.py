"""Parent densities on [0, 1].

Four variants are supported: polynomials, trigonometric polynomials, power
tail mixtures (a bounded part plus integrable endpoint singularities) and
beta densities.  Every variant is reduced to the same three building blocks
that the kernel knows how to integrate against exp(-(z + s x)**2):

* a polynomial in the power basis,
* weighted terms x**alpha (1 - x)**beta P(x) with non-integer exponents,
* complex exponentials amp * exp(i omega x).
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy import special as sp

from .errors import FitError, InvalidDensity
from .quadrature import gauss_legendre

NORM_TOL = 1e-8
NEG_TOL = 1e-9
GRID_SIZE = 10_000


def _reflect_poly(coeffs):
    """Power-basis coefficients of x -> p(1 - x)."""
    coeffs = np.asarray(coeffs, dtype=float)
    out = np.zeros_like(coeffs)
    base = np.array([1.0])
    one_minus = np.array([1.0, -1.0])
    for c in coeffs:
        out[: base.size] += c * base
        base = P.polymul(base, one_minus)
    return out


def _is_int(v):
    return float(v).is_integer()


@dataclass(frozen=True)
class WeightedTerm:
    """x**alpha (1 - x)**beta P(x) with P given in the power basis."""
    alpha: float
    beta: float
    coeffs: tuple

    def reflect(self):
        return WeightedTerm(self.beta, self.alpha, tuple(_reflect_poly(self.coeffs)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return x ** self.alpha * (1 - x) ** self.beta * P.polyval(x, self.coeffs)

    def moment(self, j):
        return sum(c * sp.beta(self.alpha + k + j + 1, self.beta + 1)
                   for k, c in enumerate(self.coeffs))


@dataclass(frozen=True)
class ExpTerm:
    """amp * exp(i omega x); densities carry these in conjugate pairs."""
    omega: float
    amp: complex

    def reflect(self):
        return ExpTerm(-self.omega, self.amp * np.exp(1j * self.omega))

    def __call__(self, x):
        return self.amp * np.exp(1j * self.omega * np.asarray(x, dtype=float))

    def moment(self, j):
        n = 24 + j + int(abs(self.omega))
        x, w = gauss_legendre(n)
        return complex(np.sum(w * x ** j * self(x)))


@dataclass(frozen=True)
class Components:
    """Kernel-ready split of a density."""
    poly: tuple = ()
    weighted: tuple = ()
    exps: tuple = ()

    def reflect(self):
        return Components(tuple(_reflect_poly(self.poly)) if self.poly else (),
                          tuple(w.reflect() for w in self.weighted),
                          tuple(e.reflect() for e in self.exps))


@dataclass(frozen=True)
class ValidationReport:
    defect: float
    min_value: float
    left_exponents: tuple = ()
    right_exponents: tuple = ()


class Density:
    """Common interface; subclasses are frozen dataclasses."""

    kind = "abstract"

    def components(self):
        raise NotImplementedError

    def reflect(self):
        """Density of 1 - X."""
        raise NotImplementedError

    @property
    def bounded(self):
        return True

    @property
    def symmetric(self):
        x = np.linspace(0.01, 0.49, 25)
        return bool(np.allclose(self.pdf(x), self.pdf(1 - x), rtol=1e-12, atol=1e-12))

    def pdf(self, x):
        c = self.components()
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if c.poly:
            out = out + P.polyval(x, c.poly)
        for w in c.weighted:
            out = out + w(x)
        for e in c.exps:
            out = out + e(x).real
        return out

    def moment(self, j):
        """E X**j, summed exactly over the components."""
        c = self.components()
        total = sum(a / (k + j + 1) for k, a in enumerate(c.poly))
        total += sum(w.moment(j) for w in c.weighted)
        total += sum(e.moment(j).real for e in c.exps)
        return float(total)

    def mean(self):
        return self.moment(1)

    def variance(self):
        m1 = self.moment(1)
        return self.moment(2) - m1 * m1

    def tail_exponents(self):
        """Exponents p of x**(p-1) at 0 and q of (1-x)**(q-1) at 1 below 1."""
        left = sorted({w.alpha + 1 for w in self.components().weighted if w.alpha < 0})
        right = sorted({w.beta + 1 for w in self.components().weighted if w.beta < 0})
        return tuple(left), tuple(right)

    def sample(self, rng_seed, count):
        return sample(self, rng_seed, count)

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Polynomial(Density):
    coeffs: tuple
    kind = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise InvalidDensity("empty coefficient list")

    def components(self):
        return Components(poly=self.coeffs)

    def reflect(self):
        return Polynomial(tuple(_reflect_poly(self.coeffs)))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def to_json(self):
        return {"type": "polynomial", "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class TrigPolynomial(Density):
    """const + sum a_m cos(m pi x) + sum b_m sin(m pi x)
    + sum (c_m exp(2 m pi i x) + conj(c_m) exp(-2 m pi i x))."""
    const: float = 1.0
    cos: tuple = ()
    sin: tuple = ()
    exp: tuple = ()
    kind = "trig"

    def __post_init__(self):
        object.__setattr__(self, "cos", tuple((int(m), float(a)) for m, a in self.cos))
        object.__setattr__(self, "sin", tuple((int(m), float(b)) for m, b in self.sin))
        object.__setattr__(self, "exp", tuple((int(m), complex(c)) for m, c in self.exp))
        if any(m <= 0 for m, _ in self.cos + self.sin + self.exp):
            raise InvalidDensity("trigonometric frequencies must be positive")

    def components(self):
        exps = []
        for m, a in self.cos:
            w = m * math.pi
            exps += [ExpTerm(w, a / 2), ExpTerm(-w, a / 2)]
        for m, b in self.sin:
            w = m * math.pi
            exps += [ExpTerm(w, b / 2j), ExpTerm(-w, -b / 2j)]
        for m, c in self.exp:
            w = 2 * m * math.pi
            exps += [ExpTerm(w, c), ExpTerm(-w, c.conjugate())]
        return Components(poly=(self.const,), exps=tuple(exps))

    def reflect(self):
        return TrigPolynomial(
            self.const,
            tuple((m, a * (-1) ** m) for m, a in self.cos),
            tuple((m, -b * (-1) ** m) for m, b in self.sin),
            tuple((m, c.conjugate()) for m, c in self.exp))

    def to_json(self):
        return {"type": "trig", "const": self.const,
                "cos": [list(t) for t in self.cos], "sin": [list(t) for t in self.sin],
                "exp": [[m, [c.real, c.imag]] for m, c in self.exp]}


@dataclass(frozen=True)
class PowerTailMix(Density):
    """sum a_i x**(p_i - 1) + sum b_j (1 - x)**(q_j - 1) + poly(x)."""
    left: tuple = ()
    right: tuple = ()
    poly: tuple = (0.0,)
    kind = "powertail"

    def __post_init__(self):
        object.__setattr__(self, "left", tuple((float(a), float(p)) for a, p in self.left))
        object.__setattr__(self, "right", tuple((float(b), float(q)) for b, q in self.right))
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly) or (0.0,))
        if any(p <= 0 for _, p in self.left + self.right):
            raise InvalidDensity("tail exponents must be positive")

    @property
    def bounded(self):
        return all(p >= 1 for _, p in self.left + self.right)

    def components(self):
        poly = np.array(self.poly, dtype=float)
        weighted = []
        # integer exponents fold into the polynomial; the rest are grouped
        # by their fractional class so each class costs one kernel term
        for pairs, side in ((self.left, 0), (self.right, 1)):
            groups = {}
            for a, p in pairs:
                e = p - 1.0
                if _is_int(e):
                    mono = np.zeros(int(e) + 1)
                    mono[-1] = a
                    if side:
                        mono = _reflect_poly(mono)
                    poly = P.polyadd(poly, mono)
                    continue
                key = round(e - math.floor(e), 12)
                groups.setdefault(key, []).append((a, e))
            for terms in groups.values():
                e0 = min(e for _, e in terms)
                coeffs = np.zeros(int(round(max(e for _, e in terms) - e0)) + 1)
                for a, e in terms:
                    coeffs[int(round(e - e0))] += a
                if side == 0:
                    weighted.append(WeightedTerm(e0, 0.0, tuple(coeffs)))
                else:
                    weighted.append(WeightedTerm(0.0, e0, tuple(_reflect_poly(coeffs))))
        return Components(poly=tuple(poly), weighted=tuple(weighted))

    def reflect(self):
        return PowerTailMix(self.right, self.left, tuple(_reflect_poly(self.poly)))

    def to_json(self):
        return {"type": "powertail", "left": [list(t) for t in self.left],
                "right": [list(t) for t in self.right], "poly": list(self.poly)}


@dataclass(frozen=True)
class Beta(Density):
    p: float
    q: float
    kind = "beta"

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise InvalidDensity("beta shapes must be positive")

    @property
    def bounded(self):
        return self.p >= 1 and self.q >= 1

    def components(self):
        a, b = self.p - 1.0, self.q - 1.0
        inv_b = 1.0 / sp.beta(self.p, self.q)
        if _is_int(a) and _is_int(b):
            mono = np.zeros(int(a) + 1)
            mono[-1] = 1.0
            poly = P.polymul(mono, P.polypow([1.0, -1.0], int(b))) * inv_b
            return Components(poly=tuple(poly))
        return Components(weighted=(WeightedTerm(a, b, (inv_b,)),))

    def reflect(self):
        return Beta(self.q, self.p)

    def moment(self, j):
        return float(np.exp(sp.betaln(self.p + j, self.q) - sp.betaln(self.p, self.q)))

    def to_json(self):
        return {"type": "beta", "p": self.p, "q": self.q}


def uniform():
    return Polynomial((1.0,))


def power_density(p):
    """f_p(x) = p x**(p - 1)."""
    return PowerTailMix(left=((p, p),))


def validate(d):
    """Check normalization and numerical nonnegativity.

    Raises InvalidDensity when the integral is off by more than 1e-8 or the
    density dips below -1e-9 on a 10**4-point interior grid.
    """
    defect = abs(d.moment(0) - 1.0)
    x = (np.arange(GRID_SIZE) + 0.5) / GRID_SIZE
    fmin = float(np.min(d.pdf(x)))
    if not np.isfinite(defect) or defect > NORM_TOL:
        raise InvalidDensity("density integrates to %.12g, not 1" % d.moment(0))
    if fmin < -NEG_TOL:
        raise InvalidDensity("density is negative somewhere (min %.3g)" % fmin)
    left, right = d.tail_exponents()
    return ValidationReport(defect, fmin, left, right)


def decompose_beta(p, q, degree_cap=60, tol=1e-9, terms=6):
    """Split a beta density into endpoint power terms and a polynomial.

    Each singular endpoint carries the first ``terms`` members of its
    binomial expansion, x**(p-1) sum_i C(q-1, i) (-x)**i / B, so the bounded
    remainder is smooth enough for a Chebyshev least-squares fit to reach
    ``tol``.  Integer shapes expand exactly.
    """
    if not (p > 0 and q > 0):
        raise InvalidDensity("beta shapes must be positive")
    comp = Beta(p, q).components()
    if not comp.weighted:
        return PowerTailMix(poly=comp.poly)
    inv_b = 1.0 / sp.beta(p, q)
    left, right = [], []
    if not _is_int(p):
        left = [(inv_b * sp.binom(q - 1, i) * (-1) ** i, p + i) for i in range(terms)]
    if not _is_int(q):
        right = [(inv_b * sp.binom(p - 1, i) * (-1) ** i, q + i) for i in range(terms)]
    tails = PowerTailMix(tuple(left), tuple(right))
    target = Beta(p, q)

    def residual(x):
        return target.pdf(x) - tails.pdf(x)

    xg = np.linspace(0.0, 1.0, 4001)[1:-1]
    for deg in range(4, degree_cap + 1, 4):
        nodes = 0.5 * (1 - np.cos(np.pi * (np.arange(4 * deg) + 0.5) / (4 * deg)))
        cheb = C.chebfit(2 * nodes - 1, residual(nodes), deg)
        err = np.max(np.abs(C.chebval(2 * xg - 1, cheb) - residual(xg)))
        if err <= tol:
            return PowerTailMix(tuple(left), tuple(right), tuple(_cheb_to_unit_power(cheb)))
    raise FitError("remainder fit did not reach %.1e with degree <= %d" % (tol, degree_cap))


def _cheb_to_unit_power(cheb):
    # compose Chebyshev series in y = 2x - 1 into power coefficients in x
    out = np.zeros(len(cheb))
    lin = np.array([-1.0, 2.0])
    t_prev, t_cur = np.array([1.0]), lin
    out[:1] += cheb[0]
    if len(cheb) > 1:
        out[:2] += cheb[1] * t_cur
    for k in range(2, len(cheb)):
        t_prev, t_cur = t_cur, P.polysub(2 * P.polymul(lin, t_cur), t_prev)
        out[: t_cur.size] += cheb[k] * t_cur
    return out


@dataclass(frozen=True)
class SupportMap:
    """Affine map between [a, b] and [0, 1]; Q scales by (b - a)**2."""
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidDensity("support needs a < b")

    @property
    def scale(self):
        return (self.b - self.a) ** 2

    def to_unit(self, y):
        return (np.asarray(y, dtype=float) - self.a) / (self.b - self.a)

    def from_unit(self, x):
        return self.a + (self.b - self.a) * np.asarray(x, dtype=float)


def standardize(a, b, density):
    """Map a polynomial density on [a, b] to [0, 1].

    Only polynomials are written in the original variable; the other
    variants are always stated on the unit interval, so for them the map
    only records the scale.
    """
    smap = SupportMap(float(a), float(b))
    if isinstance(density, Polynomial):
        h = smap.b - smap.a
        # f_X(x) = h f_Y(a + h x)
        out = np.zeros(len(density.coeffs))
        lin = np.array([smap.a, h])
        base = np.array([1.0])
        for c in density.coeffs:
            out[: base.size] += c * base
            base = P.polymul(base, lin)
        return Polynomial(tuple(h * out)), smap
    return density, smap


def from_json(obj):
    """Build a density from its JSON dictionary (see README for the schema)."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise InvalidDensity("density JSON needs a 'type' field")
    version = obj.get("version", 1)
    if version != 1:
        raise InvalidDensity("unsupported density schema version %r" % version)
    kind = obj["type"]
    try:
        if kind == "polynomial":
            d = Polynomial(tuple(obj["coeffs"]))
        elif kind == "trig":
            exp = [(m, complex(*c) if isinstance(c, (list, tuple)) else complex(c))
                   for m, c in obj.get("exp", [])]
            d = TrigPolynomial(float(obj.get("const", 1.0)), tuple(map(tuple, obj.get("cos", []))),
                               tuple(map(tuple, obj.get("sin", []))), tuple(exp))
        elif kind == "powertail":
            d = PowerTailMix(tuple(map(tuple, obj.get("left", []))),
                             tuple(map(tuple, obj.get("right", []))),
                             tuple(obj.get("poly", [0.0])))
        elif kind == "beta":
            d = Beta(float(obj["p"]), float(obj["q"]))
        else:
            raise InvalidDensity("unknown density type %r" % kind)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidDensity):
            raise
        raise InvalidDensity("malformed %s density: %s" % (kind, exc)) from exc
    smap = SupportMap()
    if "support" in obj:
        a, b = obj["support"]
        d, smap = standardize(a, b, d)
    return d, smap


def _envelope_max(f, lo=0.0, hi=1.0):
    x = np.linspace(lo, hi, 4097)
    return float(np.max(f(x))) * 1.02 + 1e-12


def sample(d, rng_seed, count):
    """Draw ``count`` i.i.d. values from d with numpy's PCG64 generator.

    Bounded variants use rejection from a uniform envelope.  Power tails use
    a mixture proposal whose singular parts are drawn by inverse transform
    x = U**(1/p), then thinned by f / envelope.
    """
    rng = np.random.default_rng(rng_seed)
    if isinstance(d, Beta):
        return rng.beta(d.p, d.q, size=count)
    if isinstance(d, PowerTailMix) and not d.bounded:
        return _sample_powertail(d, rng, count)
    fmax = _envelope_max(d.pdf)
    out = np.empty(count)
    filled = 0
    while filled < count:
        m = max(1024, int(1.3 * (count - filled) * fmax))
        x = rng.random(m)
        keep = x[rng.random(m) * fmax <= d.pdf(x)]
        take = min(keep.size, count - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def _sample_powertail(d, rng, count):
    tails = [(a / p, p, 0) for a, p in d.left] + [(b / q, q, 1) for b, q in d.right]
    if any(w <= 0 for w, _, _ in tails):
        raise InvalidDensity("sampling needs positive tail amplitudes")
    poly = np.asarray(d.poly)
    base = max(_envelope_max(lambda x: P.polyval(x, poly)), 0.0)
    weights = np.array([w for w, _, _ in tails] + [base])
    probs = weights / weights.sum()

    def envelope(x):
        e = np.full_like(x, base)
        for w, p, side in tails:
            y = x if side == 0 else 1 - x
            e += w * p * y ** (p - 1)
        return e

    out = np.empty(count)
    filled = 0
    while filled < count:
        m = max(1024, int(1.5 * (count - filled)))
        pick = rng.choice(len(weights), size=m, p=probs)
        u = rng.random(m)
        x = u.copy()
        for i, (_, p, side) in enumerate(tails):
            sel = pick == i
            x[sel] = u[sel] ** (1.0 / p)
            if side:
                x[sel] = 1 - x[sel]
        x = np.clip(x, 1e-300, 1 - 1e-16)
        keep = x[rng.random(m) * envelope(x) <= d.pdf(x)]
        take = min(keep.size, count - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out
