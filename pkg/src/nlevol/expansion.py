"""Series evaluation for the evolution problem closed by a time average.

The target is the solution of dv/dt = A v on (0, 2 pi) subject to
(1/(2 pi)) int_0^{2 pi} v dt = f. It is approximated by

    v_{n,l}(t) = p_n(t) + (-1)^n 2 sum_{k=1}^{l} k^{-2n}
                 [ cos(kt) a_k + sin(kt) b_k ]

where p_n is a Bernoulli polynomial sum of degree 2n+1 in t and the tail
coefficients solve the shifted systems

    a_k = (A^2 + k^2 I)^{-1} A^{2n+2} f,
    b_k = (1/k) (A^2 + k^2 I)^{-1} A^{2n+3} f.

The truncation index is chosen per time point: the tail is extended until
the latest term is small relative to the running partial sum, and the
largest index over the coarse grid wins.
"""

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import TermBudgetError
from .special import DEFAULT_MAX_DEGREE, BernoulliTable

TWO_PI = 2.0 * np.pi
DEFAULT_MAX_TERMS = 50000
BLOCK = 64
# tail coefficients are kept for reuse up to this index; beyond it the
# final evaluation recomputes them streaming, trading time for memory
CACHE_CAP = 4096
TINY = 1e-300


def derivative_chain(op, f, n: int):
    """Powers A^j f for j = 0 .. 2n+3, computed by repeated application."""
    g = [np.asarray(f)]
    for _ in range(2 * n + 3):
        g.append(op.apply(g[-1]))
    return g


def polynomial_part(chain, n: int, times, bern=None):
    """p_n(t) = sum_{k=0}^{2n+1} (2 pi)^k / k! B_k(t / 2 pi) A^k f."""
    if bern is None:
        bern = BernoulliTable(max(DEFAULT_MAX_DEGREE, 2 * n + 1))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    s = times / TWO_PI
    dtype = np.result_type(*[g.dtype for g in chain[: 2 * n + 2]])
    out = np.zeros((times.size, chain[0].size), dtype=dtype)
    factor = 1.0
    for k in range(2 * n + 2):
        if k > 0:
            factor *= TWO_PI / k
        out += factor * np.outer(bern.eval(k, s), chain[k])
    return out


def _block_ranges(max_terms, block):
    k0 = 1
    while k0 <= max_terms:
        k1 = min(k0 + block - 1, max_terms)
        yield np.arange(k0, k1 + 1)
        k0 = k1 + 1


def _coeff_blocks(op, rhs, max_terms, workers, block):
    """Yield (ks, V_k products) in index order.

    With workers > 1 a few blocks are computed speculatively ahead on a
    thread pool; consumption order, and therefore every floating point
    result, is identical to the serial path.
    """
    ranges = _block_ranges(max_terms, block)
    if not workers or workers <= 1:
        for ks in ranges:
            yield ks, op.vk_apply(ks, rhs)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        pending = deque()
        for ks in ranges:
            pending.append((ks, ex.submit(op.vk_apply, ks, rhs)))
            while len(pending) > workers:
                ks0, fut = pending.popleft()
                yield ks0, fut.result()
        while pending:
            ks0, fut = pending.popleft()
            yield ks0, fut.result()


def _row_inf(x):
    return np.max(np.abs(x), axis=-1)


@dataclass
class AdaptiveResult:
    """Truncation decision plus enough state to evaluate the series."""

    ell_hat: int
    ell_per_point: np.ndarray
    coarse_times: np.ndarray
    n: int
    tol: float
    op: object = field(repr=False)
    f: np.ndarray = field(repr=False)
    chain: list = field(repr=False)
    cache: np.ndarray = field(repr=False)  # (k_cached, 2, N) tail coefficients
    workers: int = field(default=0, repr=False)
    block: int = field(default=BLOCK, repr=False)

    def evaluate(self, times):
        return evaluate_series(
            self.op, self.f, self.n, self.ell_hat, times,
            chain=self.chain, cache=self.cache,
            workers=self.workers, block=self.block,
        )


def adaptive_solve(op, f, n: int, tol: float = 1e-12, m: int = 10,
                   max_terms: int = DEFAULT_MAX_TERMS, workers=None,
                   block: int = BLOCK, cache_cap: int = CACHE_CAP):
    """Choose the truncation index on a uniform coarse grid of m points.

    At each grid point the tail is extended until the newest term drops
    below tol relative to the sup norm of the running partial sum there.
    Raises TermBudgetError when any point is still undecided after
    max_terms terms.
    """
    if m < 2:
        raise ValueError("need at least two coarse grid points")
    f = np.asarray(f)
    chain = derivative_chain(op, f, n)
    tc = np.linspace(0.0, TWO_PI, m)
    part = polynomial_part(chain, n, tc)
    rhs = np.stack([chain[2 * n + 2], chain[2 * n + 3]])
    sign = -1.0 if n % 2 else 1.0
    ell = np.zeros(m, dtype=int)
    active = np.ones(m, dtype=bool)
    cache_parts = []
    cached = 0
    partial = part.astype(np.result_type(part, rhs), copy=True)

    for ks, out in _coeff_blocks(op, rhs, max_terms, workers, block):
        if cached < cache_cap:
            take = min(len(ks), cache_cap - cached)
            cache_parts.append(out[:take])
            cached += take
        for j, k in enumerate(ks):
            kf = float(k)
            ck = sign * 2.0 * kf ** (-2 * n)
            a, b = out[j, 0], out[j, 1] / kf
            term = ck * (
                np.cos(kf * tc)[:, None] * a[None, :]
                + np.sin(kf * tc)[:, None] * b[None, :]
            )
            partial += term
            ratio = _row_inf(term) / np.maximum(_row_inf(partial), TINY)
            hit = active & (ratio <= tol)
            ell[hit] = k
            active[hit] = False
        if not active.any():
            break
    if active.any():
        marked = np.where(active, -1, ell)
        raise TermBudgetError(
            f"truncation rule not satisfied within {max_terms} terms "
            f"at {int(active.sum())} of {m} grid points",
            ell_per_point=marked,
        )
    cache = np.concatenate(cache_parts, axis=0) if cache_parts else None
    return AdaptiveResult(
        ell_hat=int(ell.max()), ell_per_point=ell, coarse_times=tc,
        n=n, tol=tol, op=op, f=f, chain=chain, cache=cache,
        workers=0 if workers is None else int(workers), block=block,
    )


def evaluate_series(op, f, n: int, ell: int, times, chain=None, cache=None,
                    workers=None, block: int = BLOCK):
    """Evaluate v_{n,ell} on an arbitrary time grid, shape (len(times), N)."""
    f = np.asarray(f)
    if chain is None:
        chain = derivative_chain(op, f, n)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = polynomial_part(chain, n, times)
    rhs = np.stack([chain[2 * n + 2], chain[2 * n + 3]])
    out = out.astype(np.result_type(out, rhs), copy=True)
    sign = -1.0 if n % 2 else 1.0

    start = 1
    if cache is not None and len(cache) and ell >= 1:
        kc = min(len(cache), ell)
        kk = np.arange(1, kc + 1, dtype=float)
        ck = sign * 2.0 * kk ** (-2 * n)
        ang = np.outer(times, kk)
        a = cache[:kc, 0]
        b = cache[:kc, 1] / kk[:, None]
        out += (np.cos(ang) * ck) @ a + (np.sin(ang) * ck) @ b
        start = kc + 1

    if start <= ell:
        def remaining():
            k0 = start
            while k0 <= ell:
                k1 = min(k0 + block - 1, ell)
                yield np.arange(k0, k1 + 1)
                k0 = k1 + 1

        ranges = remaining()
        for ks in ranges:
            blk = op.vk_apply(ks, rhs)
            for j, k in enumerate(ks):
                kf = float(k)
                ck = sign * 2.0 * kf ** (-2 * n)
                a, b = blk[j, 0], blk[j, 1] / kf
                out += ck * (
                    np.cos(kf * times)[:, None] * a[None, :]
                    + np.sin(kf * times)[:, None] * b[None, :]
                )
    return out


def fine_grid(m: int, refine: int = 4):
    """Uniform evaluation grid with refine*(m-1)+1 points on [0, 2 pi]."""
    return np.linspace(0.0, TWO_PI, refine * (m - 1) + 1)


def error_measure(v_ref, v):
    """max_i ||v_ref(t_i) - v(t_i)||_inf / ||v_ref(t_i)||_inf."""
    num = _row_inf(np.asarray(v_ref) - np.asarray(v))
    den = np.maximum(_row_inf(np.asarray(v_ref)), TINY)
    return float(np.max(num / den))
