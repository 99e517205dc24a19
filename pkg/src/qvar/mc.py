"""Monte Carlo and closed-form oracles for the sample-variance distribution.

Sampling uses numpy's PCG64 generator.  The root SeedSequence(seed) is split
into one child stream per block of BLOCK draws of Q, so results depend only
on (seed, N, BLOCK) and not on how blocks are scheduled over threads.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cf import _threads, sup_q
from .errors import DomainError, MismatchError, RangeError

BLOCK = 1 << 16
INTERP_TOL = 1e-4


@dataclass
class McResult:
    n: int
    N: int
    seed: int
    samples: np.ndarray
    density: dict = None
    layout: dict = field(default_factory=dict)
    ks_vs_exact: float = None

    def mean(self):
        return float(np.mean(self.samples))

    def ecdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.N

    def to_csv(self, path):
        np.savetxt(path, self.samples, fmt="%.12g", header="Q", comments="")


def _block(density, n, seq, m):
    x = density.sample(seq, m * n).reshape(m, n)
    return np.sum((x - x.mean(axis=1, keepdims=True)) ** 2, axis=1)


def sample_q(density, n, N, seed, block=BLOCK, workers=None):
    """N i.i.d. draws of Q = sum (X_i - mean)**2, sorted."""
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    if N < 1:
        raise DomainError("N must be positive")
    sizes = [block] * (N // block) + ([N % block] if N % block else [])
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = workers or _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _block(density, n, *a), zip(seqs, sizes)))
    else:
        parts = [_block(density, n, s, m) for s, m in zip(seqs, sizes)]
    q = np.sort(np.concatenate(parts))
    layout = {"generator": "PCG64", "seed_sequence": int(seed), "block": block,
              "blocks": len(sizes)}
    return McResult(n, N, seed, q, density.to_json(), layout)


def closed_form_n2_uniform(x):
    """F_Q(x) = 2 sqrt(2x) - 2x for n = 2 and the uniform parent."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 0.5):
        raise RangeError("x must lie in [0, 1/2]")
    return 2.0 * np.sqrt(2.0 * x) - 2.0 * x


def interpolation_error(table):
    """Estimate of the linear-interpolation error of the table's CDF."""
    F = np.asarray(table.F)
    if F.size < 3:
        return np.inf
    return float(np.max(np.abs(F[2:] - 2 * F[1:-1] + F[:-2]))) / 8.0


def ks_distance(table, mc):
    """sup |F_exact - F_empirical| over the sample points.

    F_exact is the table interpolated linearly; the grid must be fine enough
    that the interpolation error stays below 1e-4.
    """
    if table.n != mc.n:
        raise MismatchError("table is for n = %d, samples for n = %d" % (table.n, mc.n))
    dens = table.meta.get("density")
    if dens is not None and mc.density is not None and dens != mc.density:
        raise MismatchError("table and samples use different densities")
    if abs(table.q - sup_q(mc.n)) > 1e-12:
        raise MismatchError("table support does not match n")
    if interpolation_error(table) > INTERP_TOL:
        raise DomainError("table grid too coarse for KS interpolation")
    F = np.interp(mc.samples, table.grid, table.F)
    i = np.arange(1, mc.N + 1)
    d = max(np.max(i / mc.N - F), np.max(F - (i - 1) / mc.N))
    mc.ks_vs_exact = float(d)
    return float(d)
