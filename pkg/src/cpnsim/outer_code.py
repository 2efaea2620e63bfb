"""Reed-Solomon errors-and-erasures block error and block-length planning.

Codes are treated as MDS, ``d = n - k + 1``, at any length. A block fails when
``2t + e >= d`` for ``t`` symbol errors and ``e`` erasures; miscorrections
count as failures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gammaln, logsumexp, xlog1py, xlogy

MAX_BLOCK_LENGTH = 10_000_000


@dataclass(frozen=True)
class RsCode:
    n: int
    k: int

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")

    @property
    def d(self) -> int:
        return self.n - self.k + 1

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def for_rate(cls, n: int, rate: float) -> "RsCode":
        """Code of length ``n`` with ``k = round(rate * n)`` (half rounds up), kept in [1, n-1]."""
        if n < 2:
            raise ValueError("n must be >= 2")
        k = math.floor(rate * n + 0.5)
        return cls(n, min(max(k, 1), n - 1))


@dataclass(frozen=True)
class ChannelStats:
    """Per-symbol hard-error and erasure probabilities of an M-ary inner channel."""

    m: int
    p_err: float
    p_eras: float

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if self.p_err < 0 or self.p_eras < 0 or self.p_err + self.p_eras > 1.0 + 1e-15:
            raise ValueError(f"invalid symbol statistics p_err={self.p_err}, p_eras={self.p_eras}")

    @property
    def p_ok(self) -> float:
        return max(0.0, 1.0 - self.p_err - self.p_eras)


def _log_binom_tail(n: np.ndarray, m: np.ndarray, q: float) -> np.ndarray:
    """log P(Binomial(n, q) >= m), elementwise."""
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    out = np.full(np.broadcast(n, m).shape, -np.inf)
    out[m <= 0] = 0.0
    live = (m > 0) & (m <= n)
    if not np.any(live) or q <= 0.0:
        return out
    if q >= 1.0:
        out[live] = 0.0
        return out
    nl, ml = np.broadcast_to(n, out.shape)[live], np.broadcast_to(m, out.shape)[live]
    tail = betainc(ml, nl - ml + 1.0, q)
    with np.errstate(divide="ignore"):
        vals = np.log(tail)
    # regularized beta underflowed: sum the tail terms explicitly in log space
    for idx in np.flatnonzero(~np.isfinite(vals)):
        nn, mm = nl[idx], ml[idx]
        e = np.arange(mm, nn + 1.0)
        terms = gammaln(nn + 1) - gammaln(e + 1) - gammaln(nn - e + 1) + xlogy(e, q) + xlog1py(nn - e, -q)
        vals[idx] = logsumexp(terms)
    out[live] = vals
    return out


def rs_log_block_error(code: RsCode, stats: ChannelStats) -> float:
    """Natural log of the decoding failure probability.

    Conditions on the number of errors ``t``; given ``t``, erasures among the
    remaining symbols are binomial, so each term is a binomial pmf times a
    binomial tail, both evaluated in log space.
    """
    n, d = code.n, code.d
    pe, pr = stats.p_err, stats.p_eras
    if pe == 0.0 and pr == 0.0:
        return -math.inf
    t = np.arange(n + 1, dtype=float)
    if pe == 0.0:
        log_pmf_t = np.where(t == 0, 0.0, -np.inf)
    elif pe >= 1.0:
        log_pmf_t = np.where(t == n, 0.0, -np.inf)
    else:
        log_pmf_t = gammaln(n + 1) - gammaln(t + 1) - gammaln(n - t + 1) + xlogy(t, pe) + xlog1py(n - t, -pe)
    q_eras = pr / (1.0 - pe) if pe < 1.0 else 0.0
    log_tail = _log_binom_tail(n - t, d - 2 * t, min(q_eras, 1.0))
    return float(logsumexp(log_pmf_t + log_tail))


def rs_block_error(code: RsCode, stats: ChannelStats) -> float:
    """Probability that bounded-distance errors-and-erasures decoding fails."""
    return math.exp(rs_log_block_error(code, stats))


def shannon_rate(stats: ChannelStats) -> float:
    """Mutual information per PPM symbol divided by log2 M, uniform inputs.

    Wrong decisions are spread evenly over the M - 1 other symbols, which makes
    the channel symmetric, so uniform inputs achieve capacity.
    """
    m, pe, pr, pc = stats.m, stats.p_err, stats.p_eras, stats.p_ok
    if pe == 0.0:
        return 1.0 - pr  # erasure channel capacity, without summation rounding

    def plogp(p: float) -> float:
        return p * math.log2(p) if p > 0 else 0.0

    # H(Y) - H(Y|X); outputs: M symbols each with mass (1 - pr)/M, plus erasure
    h_y = -m * plogp((1.0 - pr) / m) - plogp(pr)
    h_y_x = -plogp(pc) - (m - 1) * plogp(pe / (m - 1)) - plogp(pr)
    return max(0.0, (h_y - h_y_x) / math.log2(m))


@dataclass(frozen=True)
class BlockLengthSearch:
    """Outcome of :func:`min_block_length`; ``n_min`` is None when infeasible."""

    rate: float
    n_min: int | None
    n_max_tried: int
    reason: str = ""

    @property
    def feasible(self) -> bool:
        return self.n_min is not None


def min_block_length(
    rate: float,
    stats: ChannelStats,
    target: float = 1e-10,
    n_cap: int = MAX_BLOCK_LENGTH,
    ripple: int = 8,
) -> BlockLengthSearch:
    """Shortest code length reaching ``target`` block error at the given rate.

    Doubling brackets the answer, bisection narrows it, and a scan of
    ``ripple`` neighbours absorbs non-monotonicity from rounding ``k``.
    """
    if not 0.0 < rate < 1.0:
        raise ValueError("rate must lie strictly inside (0, 1)")
    log_target = math.log(target)

    def ok(n: int) -> bool:
        return rs_log_block_error(RsCode.for_rate(n, rate), stats) <= log_target

    if rate >= shannon_rate(stats):
        return BlockLengthSearch(rate, None, 0, "rate at or above Shannon rate")
    hi = 2
    while not ok(hi):
        if hi >= n_cap:
            return BlockLengthSearch(rate, None, hi, f"no n <= {n_cap} reaches target")
        hi = min(2 * hi, n_cap)
    lo = max(1, hi // 2)
    # invariant: ok(hi); lo is the last length known (or assumed) to fail
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    best = hi
    for n in range(max(2, hi - ripple), hi):
        if ok(n):
            best = n
            break
    return BlockLengthSearch(rate, best, hi)
