"""Characteristic function of Q on the Fourier grid t_k = k pi / q.

    f_Q(t) = sqrt(n/pi) [ s int_0^1 psi_star(t, -u)**n du
                          + int_0^y0 (psi(t, y)**n + psi(t, -y - s)**n) dy ]

is the path form (two rays and the bridge).  The real-line form

    f_Q(t) = sqrt(n/pi) s int psi_star(t, u)**n du

serves as an independent cross-check for bounded densities; its tails are
rotated by exp(i pi/4) about u = 1 and u = -2, where the integrand decays
exponentially.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, FitError, TruncationError
from .kernel import PsiContext, sqrt_mit
from .series import TailModel, decay_slope, families, log_candidates, select_tail
from .quadrature import gauss_legendre

GL_ORDER = 16
MAX_PANELS = 400_000
ALT_U = 1.0


def sup_q(n):
    """sup Q = n/4 (n even) or (n**2 - 1)/(4n) (n odd)."""
    n = int(n)
    if n < 2:
        raise ValueError("n must be at least 2")
    return n / 4.0 if n % 2 == 0 else (n * n - 1) / (4.0 * n)


def t_grid(q, K):
    if q <= 0 or K < 1:
        raise ValueError("need q > 0 and K >= 1")
    return np.arange(1, K + 1) * math.pi / q


def ray_cutoff(n, tol):
    """y0 = 1 + sqrt(ln(1/tol)/n), beyond which psi**n < exp(-n y**2)."""
    return 1.0 + math.sqrt(math.log(1.0 / tol) / n)


def adaptive_gl(f, edges, tol, max_panels=MAX_PANELS):
    """Integrate f over the union of panels, bisecting until the 16-point
    rule and its two-halves refinement agree to tol * h / length.

    ``f`` takes a 1-D array of nodes and returns values at them.  Panels are
    refined in batches, and the accepted contributions are summed in panel
    order so the result does not depend on evaluation scheduling.
    """
    x, w = gauss_legendre(GL_ORDER)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    length = edges[-1] - edges[0]
    pieces = []
    count = 0
    while a.size:
        count += a.size
        if count > max_panels:
            raise ConvergenceError("panel refinement stalled")
        h = b - a
        m = 0.5 * (a + b)
        nodes = np.concatenate([(a[:, None] + h[:, None] * x).ravel(),
                                (a[:, None] + 0.5 * h[:, None] * x).ravel(),
                                (m[:, None] + 0.5 * h[:, None] * x).ravel()])
        vals = f(nodes).reshape(3, a.size, GL_ORDER)
        coarse = h * (vals[0] @ w)
        fine = 0.5 * h * (vals[1] @ w + vals[2] @ w)
        ok = np.abs(coarse - fine) <= tol * np.maximum(h / length, 1e-3)
        pieces.append((a[ok], fine[ok]))
        a, b = np.concatenate([a[~ok], m[~ok]]), np.concatenate([m[~ok], b[~ok]])
    starts = np.concatenate([p[0] for p in pieces])
    vals = np.concatenate([p[1] for p in pieces])
    return complex(np.sum(vals[np.argsort(starts, kind="stable")]))


def _graded(lo, hi, h0, hmax):
    """Edges from lo to hi starting at width h0, doubling up to hmax."""
    edges = [lo]
    h = h0
    while edges[-1] < hi:
        edges.append(min(hi, edges[-1] + h))
        h = min(2 * h, hmax)
    return np.array(edges)


def _bridge_edges(t):
    # oscillation from the endpoints runs at about 2 t u and 2 t (1 - u);
    # panels keep that phase change near 8 radians, and stay graded at the
    # 1/sqrt(t) scale next to u = 0 and u = 1
    h = min(0.25, 8.0 / (2.0 * t))
    fine = min(0.25, 0.25 / math.sqrt(t))
    left = _graded(0.0, 0.5, min(fine, h), h)
    right = 1.0 - _graded(0.0, 0.5, min(fine, h), h)[::-1]
    return np.unique(np.concatenate([left, right]))


def _ray_edges(t, y0):
    r = math.sqrt(0.5 * t)
    return _graded(0.0, y0, min(0.25, 0.125 / max(r, 1e-3)), 0.25)


def cf_at(ctx, n, t, tol=1e-13):
    """f_Q(t) from the path form (rays plus bridge)."""
    if t == 0:
        return 1.0 + 0j
    if not isinstance(ctx, PsiContext):
        ctx = PsiContext(ctx)
    if ctx.density is not None and (t * sup_q(n)) ** 2 <= tol:
        # |f(t) - 1 - i t E Q| <= (t sup Q)**2 / 2, E Q = (n - 1) Var X
        return 1.0 + 1j * t * (n - 1) * ctx.density.variance()
    s = sqrt_mit(t)
    y0 = ray_cutoff(n, tol)
    bridge = adaptive_gl(lambda u: ctx.psi_bridge(t, u) ** n, _bridge_edges(t), tol)
    edges = _ray_edges(t, y0)
    rays = adaptive_gl(lambda y: ctx.psi_ray(t, y) ** n
                       + ctx.psi_ray(t, y, reflected=True) ** n, edges, tol)
    return math.sqrt(n / math.pi) * (s * bridge + rays)


def cf_at_alt(ctx, n, t, tol=1e-13):
    """f_Q(t) from the real-line form (bounded densities only)."""
    if t == 0:
        return 1.0 + 0j
    if not isinstance(ctx, PsiContext):
        ctx = PsiContext(ctx)
    if ctx.density is not None and not ctx.density.bounded:
        raise ValueError("the real-line form needs a bounded density")
    s = sqrt_mit(t)
    U = ALT_U
    rot = np.exp(0.25j * math.pi)
    symmetric = ctx.density is not None and ctx.density.symmetric

    def line(u):
        return ctx.psi_star(t, u) ** n

    h = min(0.25, 8.0 / (2.0 * n * t * (1 + U)))
    lo = -0.5 if symmetric else -1.0 - U
    core = adaptive_gl(line, np.linspace(lo, U, int(math.ceil((U - lo) / h)) + 1), tol)
    # tails: |integrand| ~ exp(-n t (sqrt2 U rho + rho**2)) along the rotated rays
    rate = n * t * math.sqrt(2.0) * U
    rho_max = (-rate + math.sqrt(rate * rate + 4 * n * t * 50.0)) / (2 * n * t)
    tail_edges = _graded(0.0, rho_max, rho_max / 512, rho_max / 16)
    right = adaptive_gl(lambda p: line(U + p * rot), tail_edges, tol)
    total = core + rot * right
    if symmetric:
        total *= 2.0
    else:
        left = adaptive_gl(lambda p: line(-1.0 - U - p * rot), tail_edges, tol)
        total += rot * left
    return math.sqrt(n / math.pi) * s * total


def _threads():
    try:
        return max(1, int(os.environ.get("QVAR_THREADS", "0")) or os.cpu_count() or 1)
    except ValueError:
        return 1


def cf_values(ctx, n, ts, tol=1e-13, alt=False):
    """Map cf_at (or cf_at_alt) over frequencies, order preserved."""
    if not isinstance(ctx, PsiContext):
        ctx = PsiContext(ctx)
    fn = cf_at_alt if alt else cf_at
    ts = list(ts)
    workers = min(_threads(), max(1, len(ts)))
    if workers == 1:
        return np.array([fn(ctx, n, t, tol) for t in ts])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(lambda t: fn(ctx, n, t, tol), ts)))


@dataclass
class FourierCoefficients:
    """f_Q(t_k) for k = 1..K with the fitted model of the omitted tail.

    ``tail_bound`` estimates the error of the model-summed tail of the
    (2/pi) sum (1 - cos)/k series: the spread of the summed series under
    moving the cut, plus the per-coefficient quadrature budget.
    """

    n: int
    q: float
    K: int
    values: np.ndarray
    tail_bound: float
    decay_exponent_estimate: float
    model: TailModel = field(repr=False, default=None)
    alt_model: TailModel = field(repr=False, default=None)
    meta: dict = field(default_factory=dict)

    @property
    def t(self):
        return t_grid(self.q, self.K)

    @property
    def im(self):
        return self.values.imag

    def constant_sum(self):
        """(2/pi) sum_k Im f_Q(t_k)/k, which equals 1 - E(Q)/q."""
        k = np.arange(1, self.K + 1)
        tail = self.model.const_tail() if self.model is not None else 0.0
        return 2.0 / math.pi * (math.fsum(self.im / k) + tail)


K_START = 64
K_CAP = 20000


def _k_schedule(start, cap):
    k = start
    while k < cap:
        yield k
        k = int(k * 1.5) // 8 * 8
    yield cap


def coefficients(ctx, n, tol=1e-8, k_cap=K_CAP, k_start=K_START):
    """f_Q(t_k) for k = 1.. until the modelled tail is known to within tol.

    The tail past K is not dropped: Im f_Q(t_k) is fitted by its asymptotic
    power families and their contribution summed analytically (see
    series.select_tail).  K grows by half until the tail estimate, as
    stable as it is under moving the cut, is within tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not isinstance(ctx, PsiContext):
        ctx = PsiContext(ctx)
    source = ctx.density if ctx.density is not None else ctx.components
    comp = ctx.components
    exps = [w.alpha + 1 for w in comp.weighted] + [w.beta + 1 for w in comp.weighted]
    quad_tol = min(1e-11, tol / 10.0)
    return grow_coefficients(
        lambda ts: cf_values(ctx, n, ts, quad_tol), n, sup_q(n),
        lambda gm, ls: families(source, n, gm, ls), (n - 1) / 2.0,
        log_candidates(source, n), tol, quad_tol, k_cap, k_start,
        {"min_exponent": min([1.0] + exps)})


def grow_coefficients(evaluate, n, q, fams_fn, g0, logs, tol, quad_tol,
                      k_cap=K_CAP, k_start=K_START, meta=None):
    """Shared driver: extend k = 1..K until the tail estimate is within tol.

    ``evaluate(ts)`` returns f_Q at the given frequencies.
    """
    values = np.zeros(0, dtype=complex)
    last = None
    for K in _k_schedule(min(k_start, k_cap), k_cap):
        ts = t_grid(q, K)[values.size:]
        values = np.concatenate([values, evaluate(ts)])
        try:
            choice = select_tail(values.imag, fams_fn, g0, logs)
        except FitError:
            continue
        # per-coefficient quadrature error enters with weight 1/k
        bound = 2.0 / math.pi * (choice.spread + quad_tol * (1.0 + math.log(K)))
        info = {"tol": tol, "tail_method": choice.method, "tail_order": choice.order,
                "tail_logs": list(choice.logs)}
        info.update(meta or {})
        last = FourierCoefficients(n, q, K, values, bound, decay_slope(values.imag),
                                   choice.model, choice.alt, info)
        if bound <= tol:
            return last
    if last is None:
        raise TruncationError("no tail model could be fitted up to K = %d" % k_cap)
    raise TruncationError(
        "tail estimate %.3g still above tol %.3g at K = %d" % (last.tail_bound, tol, last.K))
