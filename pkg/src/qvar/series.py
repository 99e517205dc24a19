"""Asymptotic model of the Fourier coefficients and its analytic tail sums.

For large k, Im f_Q(t_k) is a finite sum of smooth power families
k**(-g) (log k)**L, some multiplied by a phase exp(i pi w k).  The
non-oscillating families come from the neighbourhood of Q = 0 (the thin
cylinder around the diagonal and the two singular corners).  Each
oscillating family comes from one critical value ab/(a+b) of Q: a
coordinates sit at 0, b sit at 1 and the rest sit at their mean.  The
coefficients are fitted on the window (K/2, K], and the series tails past K
are summed in closed form:

* Hurwitz zeta when there is no phase,
* a direct sum followed by Abel summation by parts otherwise,
* Lerch's transcendent for phases too close to 0 for that.
"""

import math
from functools import lru_cache
from dataclasses import dataclass
from itertools import combinations_with_replacement

import mpmath
import numpy as np
from scipy import special as sp

from .errors import FitError

DIRECT_CAP = 1_000_000
ABEL_TERMS = 14
ABEL_GAP = 40.0
_EPS = 1e-9


@dataclass(frozen=True)
class Family:
    gamma: float
    omega: float  # phase exp(i pi omega k); 0 for none
    kind: str  # "c" (cos or plain), "s" (sin)
    log: int = 0

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        v = k ** (-self.gamma)
        if self.log:
            v = v * np.log(k) ** self.log
        if self.omega == 0:
            return v
        ph = math.pi * self.omega * k
        return v * (np.cos(ph) if self.kind == "c" else np.sin(ph))

    def amplitude(self, c):
        """(theta, A) with c * family(k) = Re(A exp(i k theta)) * power(k)."""
        theta = math.pi * self.omega
        return theta, (c if self.kind == "c" else -1j * c)


def _classes(density, side):
    # local exponents e of x**(e-1) at one end (capped sets, integer steps
    # generate the rest of each class)
    comp = density.components() if hasattr(density, "components") else density
    out = set()
    regular = bool(np.any(np.asarray(comp.poly) != 0)) or bool(comp.exps)
    for w in comp.weighted:
        e = (w.alpha if side == 0 else w.beta) + 1.0
        out.add(round(e % 1.0 or 1.0, 12) if e >= 1 else round(e, 12))
        if e >= 1:
            regular = True
    if regular:
        out.add(1.0)
    return sorted(out)


def _sums(classes, count, cap):
    """All values sum of count entries from the classes plus integer steps."""
    out = set()
    for combo in combinations_with_replacement(classes, count):
        base = sum(combo)
        j = 0
        while base + j <= cap + _EPS:
            out.add(round(base + j, 10))
            j += 1
    return out


def families(density, n, gamma_max, logs=()):
    """Candidate families for the n-sample statistic up to order gamma_max.

    ``logs`` lists the orders that also get a k**(-g) log k column; see
    log_candidates.
    """
    from .cf import sup_q

    q = sup_q(n)
    c0, c1 = _classes(density, 0), _classes(density, 1)
    base = (n - 1) / 2.0
    lattice = {round(base + j / 2.0, 10) for j in range(int(2 * (gamma_max - base)) + 1)}
    corner = set()
    for cls in (c0, c1):
        corner |= {round(s / 2.0, 10) for s in _sums(cls, n, 2 * gamma_max)}
    plain = sorted(g for g in lattice | corner if g <= gamma_max + _EPS)
    out = [Family(g, 0.0, "c") for g in plain]
    out += [Family(g, 0.0, "c", 1) for g in logs if g <= gamma_max + _EPS]
    seen = set(plain)
    for a in range(1, n):
        for b in range(1, n - a + 1):
            m = n - a - b
            omega = round((a * b / (a + b) / q) % 2.0, 12)
            gammas = {round(s0 + s1 + m / 2.0 + j / 2.0, 10)
                      for s0 in _sums(c0, a, gamma_max) for s1 in _sums(c1, b, gamma_max)
                      for j in range(int(2 * gamma_max) + 1)}
            for g in sorted(gammas):
                if g > gamma_max + _EPS:
                    continue
                if omega in (0.0, 2.0):
                    if g not in seen:
                        seen.add(g)
                        out.append(Family(g, 0.0, "c"))
                    continue
                key = (g, omega)
                if key in seen:
                    continue
                seen.add(key)
                if abs(omega - 1.0) < _EPS:
                    out.append(Family(g, 1.0, "c"))
                else:
                    out.append(Family(g, omega, "c"))
                    out.append(Family(g, omega, "s"))
    return out


def log_candidates(density, n, span=2.0):
    """Orders where a singular corner family meets the diagonal lattice.

    Such coincidences can produce k**(-g) log k terms; whether they do
    depends on the density, so they are offered to the model selection
    rather than always included.
    """
    c0, c1 = _classes(density, 0), _classes(density, 1)
    if not any(c < 1 for c in c0 + c1):
        return []
    base = (n - 1) / 2.0
    lattice = {round(base + j / 2.0, 10) for j in range(int(2 * span) + 1)}
    cap = 2 * (base + span)
    hits = set()
    for cls in (c0, c1):
        for combo in combinations_with_replacement(cls, n):
            if any(c < 1 for c in combo):
                hits |= {round((sum(combo) + j) / 2.0, 10) for j in range(int(cap) + 1)}
    return sorted(g for g in hits if g in lattice)


@dataclass
class TailModel:
    K: int
    fams: list
    coef: np.ndarray
    resid: float

    def __call__(self, k):
        return sum(c * f(k) for c, f in zip(self.coef, self.fams))

    def groups(self):
        """Terms grouped as (theta, [(A, gamma, log), ...])."""
        out = {}
        for c, f in zip(self.coef, self.fams):
            theta, amp = f.amplitude(c)
            out.setdefault(round(theta, 14), []).append((amp, f.gamma, f.log))
        return out

    def cdf_tail(self, phi):
        """sum_{k>K} m(k)/k (1 - cos k phi), one value per phi."""
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        out = np.zeros(phi.size)
        for theta, terms in self.groups().items():
            terms1 = [(a, g + 1.0, L) for a, g, L in terms]
            base = phase_power_sum(terms1, theta, self.K).real
            plus = phase_power_sums(terms1, theta + phi, self.K)
            minus = phase_power_sums(terms1, theta - phi, self.K)
            out += base - 0.5 * (plus.real + minus.real)
        return out

    def sin_tail(self, phi):
        """sum_{k>K} m(k) sin(k phi), one value per phi."""
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        out = np.zeros(phi.size)
        for theta, terms in self.groups().items():
            conj = [(np.conj(a), g, L) for a, g, L in terms]
            out += 0.5 * (phase_power_sums(terms, theta + phi, self.K).imag
                          + phase_power_sums(conj, phi - theta, self.K).imag)
        return out

    def const_tail(self):
        """sum_{k>K} m(k)/k."""
        total = 0.0
        for theta, terms in self.groups().items():
            total += phase_power_sum([(a, g + 1.0, L) for a, g, L in terms],
                                     theta, self.K).real
        return total


def fit_tail(values, fams, K=None):
    """Least-squares fit of the families to values[k-1] on (K/2, K]."""
    values = np.asarray(values, dtype=float)
    K = len(values) if K is None else K
    k = np.arange(K // 2 + 1, K + 1, dtype=float)
    if len(fams) >= k.size // 2:
        raise FitError("too many tail families (%d) for a window of %d" % (len(fams), k.size))
    scale = np.array([(K ** f.gamma) for f in fams])
    A = np.column_stack([f(k) * sc for f, sc in zip(fams, scale)])
    y = values[k.astype(int) - 1]
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ sol - y))) if k.size else 0.0
    return TailModel(K, list(fams), sol * scale, resid)


def _power_tails(fam, K):
    """Z(K') = sum_{k>K'} k**(-g-1) (log k)**L for K' = 0..K."""
    k = np.arange(1, K + 1, dtype=float)
    terms = k ** (-fam.gamma - 1.0) * np.log(k) ** fam.log
    beyond = _zeta_log(fam.gamma + 1.0, K + 1, fam.log)
    return beyond + np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])


def fit_partial(values, fams, K=None):
    """Fit the non-oscillating families to the partial sums of values/k.

    S_K' = S - sum_f c_f Z_f(K') on K' in (K/2, K], with S free.  Phases
    in the coefficients enter the partial sums one power of K weaker, so
    the oscillating families can be left out of this fit.
    """
    values = np.asarray(values, dtype=float)
    K = len(values) if K is None else K
    fams = [f for f in fams if f.omega == 0]
    Ks = np.arange(K // 2 + 1, K + 1)
    if len(fams) + 1 >= Ks.size // 3:
        raise FitError("too many tail families (%d) for a window of %d" % (len(fams), Ks.size))
    part = np.cumsum(values[:K] / np.arange(1, K + 1))[Ks - 1]
    scale = np.array([K ** f.gamma for f in fams])
    Z = np.column_stack([_power_tails(f, K)[Ks] * sc for f, sc in zip(fams, scale)])
    A = np.column_stack([np.ones(Ks.size), -Z])
    sol, *_ = np.linalg.lstsq(A, part, rcond=None)
    resid = float(np.max(np.abs(A @ sol - part)))
    return TailModel(K, list(fams), sol[1:] * scale, resid)


def refine_oscillating(model, values, fams):
    """Add the oscillating families, fitted to what the model leaves over."""
    osc = [f for f in fams if f.omega != 0]
    if not osc:
        return model
    K = model.K
    k = np.arange(K // 2 + 1, K + 1)
    if len(osc) >= k.size // 3:
        return model
    rest = np.asarray(values, dtype=float)[:K] - model(np.arange(1, K + 1))
    extra = fit_tail(rest, osc, K)
    return TailModel(K, model.fams + extra.fams,
                     np.concatenate([model.coef, extra.coef]), extra.resid)


@dataclass
class TailChoice:
    """Selected model at the full cut and at the 0.8 K cut."""

    model: TailModel
    alt: TailModel
    spread: float
    method: str
    order: float
    logs: tuple


def _partial_sum(values, model):
    K = model.K
    return math.fsum(np.asarray(values[:K]) / np.arange(1, K + 1)) + model.const_tail()


def select_tail(values, fams_fn, g0, logs=(),
                orders=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0), cuts=(0.6, 0.8, 1.0)):
    """Pick the tail model whose summed series is most stable under the cut.

    ``fams_fn(gamma_max, logs)`` lists the candidate families, ``g0`` is the
    base order the spans in ``orders`` are counted from, and ``logs`` are
    the orders that may carry log columns.  Each candidate (fit method,
    order span, set of log columns) is fitted with the series cut at several
    K' <= K; the spread of sum_{k<=K'} Im f/k + tail(K') over the cuts is
    its error estimate.  The models at the last two cuts are returned as
    ``model`` and ``alt``.
    """
    values = np.asarray(values, dtype=float)
    K = values.size
    logs = list(logs)
    logsets = [()]
    if logs:
        logsets += [tuple(logs[:1]), (logs[0], logs[0] + 1.0), tuple(logs[:2]), tuple(logs[:3])]
    logsets = list(dict.fromkeys(logsets))
    best = None
    for ls in logsets:
        for dg in orders:
            fams = fams_fn(g0 + dg, ls)
            if not fams:
                continue
            lowest = min(f.gamma for f in fams)
            fams = [f for f in fams if f.gamma <= max(lowest, g0) + dg + _EPS]
            for method in ("direct", "partial"):
                try:
                    models = [_fit(method, values[:int(round(c * K))], fams) for c in cuts]
                except FitError:
                    continue
                sums = [_partial_sum(values, m) for m in models]
                spread = max(sums) - min(sums)
                if best is None or spread < best[0]:
                    best = (spread, method, dg, ls, fams, models)
    if best is None:
        raise FitError("no tail model fits %d coefficients" % K)
    spread, method, dg, ls, fams, models = best
    full, alt = models[-1], models[-2]
    if method == "partial":
        full = refine_oscillating(full, values, fams)
        alt = refine_oscillating(alt, values, fams)
    return TailChoice(full, alt, spread, method, dg, ls)


def _fit(method, values, fams):
    return fit_tail(values, fams) if method == "direct" else fit_partial(values, fams)


def phase_power_sums(terms, thetas, K):
    """phase_power_sum over an array of phases.

    Phases far enough from 0 that the derivative expansion converges
    right at K + 1 are done together; the rest one at a time.
    """
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty(thetas.shape, dtype=complex)
    if not terms:
        out[...] = 0
        return out
    red = np.remainder(thetas + math.pi, 2 * math.pi) - math.pi
    gap = np.abs(2 * np.sin(0.5 * red))
    fast = gap * (K + 1) >= ABEL_GAP
    if np.any(fast):
        z = red[fast]
        out[fast] = np.exp(1j * z * (K + 1)) * _euler_tail(terms, z, K + 1)
    span = np.full(red.shape, np.inf)
    ok = ~fast & (gap >= 1e-13)
    span[ok] = np.ceil(ABEL_GAP / gap[ok]) + 50
    direct = ok & (span <= DIRECT_CAP)
    if np.any(direct):
        # direct sums share one amplitude vector; lengths rounded up to powers
        # of two so each bucket is a single matrix product
        bucket = np.ceil(np.log2(span[direct])).astype(int)
        idx = np.flatnonzero(direct)
        amp = _amplitudes(terms, K + 1, K + 1 + 2 ** int(bucket.max()))
        for b in np.unique(bucket):
            sel = idx[bucket == b]
            length = 2 ** int(b)
            k = np.arange(K + 1, K + 1 + length, dtype=float)
            step = max(1, int(4e6 // length))
            for lo in range(0, sel.size, step):
                part = sel[lo:lo + step]
                th = red[part]
                head = np.exp(1j * np.outer(th, k)) @ amp[:length]
                m = K + 1 + length
                out[part] = head + np.exp(1j * th * m) * _euler_tail(terms, th, m)
    for i in np.flatnonzero(~fast & ~direct):
        out[i] = phase_power_sum(terms, float(red[i]), K)
    return out


def _amplitudes(terms, lo, hi):
    k = np.arange(lo, hi, dtype=float)
    lk = np.log(k)
    return sum(a * k ** (-s) * lk ** L for a, s, L in terms)


def phase_power_sum(terms, theta, K):
    """sum_{k>K} a(k) exp(i k theta) with a(k) = sum A k**(-s) (log k)**L."""
    if not terms:
        return 0j
    theta = math.remainder(theta, 2 * math.pi)
    gap = abs(2 * math.sin(0.5 * theta))
    if gap < 1e-13:
        return complex(sum(a * _zeta_log(s, K + 1, L) for a, s, L in terms))
    K2 = K + int(math.ceil(ABEL_GAP / gap)) + 50
    if K2 - K > DIRECT_CAP:
        return complex(sum(a * _lerch_log(theta, s, K + 1, L) for a, s, L in terms))

    def amp(k):
        k = np.asarray(k, dtype=float)
        lk = np.log(k)
        return sum(a * k ** (-s) * lk ** L for a, s, L in terms)

    total = 0j
    for lo in range(K + 1, K2, 200_000):
        hi = min(K2, lo + 200_000)
        k = np.arange(lo, hi, dtype=float)
        total += np.sum(amp(k) * np.exp(1j * theta * k))
    return complex(total + np.exp(1j * theta * K2) * _euler_tail(terms, theta, K2))


def _euler_tail(terms, theta, m):
    # sum_{k>=0} a(m+k) z**k = sum_j a^(j)(m)/j! * sum_k k**j z**k; the inner
    # sums are polylogarithms of negative order, and the terms shrink like
    # (s)_j / (m |1-z|)**j
    z = np.exp(1j * np.asarray(theta, dtype=float))
    w = z / (1 - z)
    total = 0j
    lm = math.log(m)
    for j in range(ABEL_TERMS + 1):
        if j == 0:
            li = 1.0 / (1 - z)
        else:
            li = sum(c * w ** (i + 1) for i, c in enumerate(_polylog_coeffs(j)))
        deriv = 0.0
        for a, s, L in terms:
            poch = math.gamma(s + j) / math.gamma(s)
            base = (-1) ** j * poch * m ** (-s - j)
            if L:
                base *= lm - sum(1.0 / (s + i) for i in range(j))
            deriv += a * base
        inc = deriv / math.factorial(j) * li
        total += inc
        if j > 2 and np.all(np.abs(inc) <= 1e-17 * np.abs(total)):
            break
    return total


@lru_cache(maxsize=None)
def _polylog_coeffs(j):
    # Li_{-j}(z) = sum_i i! S(j+1, i+1) w**(i+1), w = z / (1 - z)
    return tuple(float(math.factorial(i) * _stirling2(j + 1, i + 1)) for i in range(j + 1))


def _stirling2(n, k):
    return int(round(sum((-1) ** i * math.comb(k, i) * (k - i) ** n
                         for i in range(k + 1)) / math.factorial(k)))


def _zeta_log(s, a, L):
    if L == 0:
        return float(sp.zeta(s, a))
    return float(-mpmath.zeta(s, a, 1))


def _lerch_log(theta, s, a, L):
    z = mpmath.expj(theta)
    if L == 0:
        val = z ** a * mpmath.lerchphi(z, s, a)
    else:
        val = -z ** a * mpmath.diff(lambda ss: mpmath.lerchphi(z, ss, a), s)
    return complex(val)


def decay_slope(values, window=32):
    """Log-log slope of |values| over the final window, zeros skipped."""
    values = np.abs(np.asarray(values))
    k = np.arange(1, values.size + 1, dtype=float)[-window:]
    v = values[-window:]
    ok = v > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(k[ok]), np.log(v[ok]), 1)[0])
