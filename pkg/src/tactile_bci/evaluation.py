"""Decoding performance: accuracy against chance, confusion, significance, ITR."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from .paradigm import N_COMMANDS, online_plan, session_duration

CHANCE = 1.0 / N_COMMANDS


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    n_selections: int
    n_correct: int
    binomial_p_vs_chance: float
    itr_bits_per_selection: float
    itr_bits_per_minute: float
    seconds_per_selection: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_known(results: Sequence) -> None:
    for i, r in enumerate(results):
        if r.intended is None:
            raise ValueError(f"selection {i} has no known intent")


def _log_pmf(i: np.ndarray, n: int, p: float) -> np.ndarray:
    # log C(n, i) through betaln keeps its precision for large n
    log_comb = -math.log(n + 1) - special.betaln(n - i + 1, i + 1)
    return log_comb + i * math.log(p) + (n - i) * math.log1p(-p)


def _check_binomial(n: int, p: float) -> None:
    if n < 0 or not 0 < p < 1:
        raise ValueError(f"need n >= 0 and 0 < p < 1, got n={n}, p={p}")


def _split(k: int, n: int, p: float) -> tuple:
    """``(P(X <= k-1), P(X >= k))`` for ``1 <= k <= n``.

    The smaller side is summed directly and the other is its complement, so
    the two always add to one.
    """
    if k - 1 < n * p:
        lower = float(np.exp(special.logsumexp(_log_pmf(np.arange(0, k), n, p))))
        lower = min(1.0, lower)
        return lower, 1.0 - lower
    upper = float(np.exp(special.logsumexp(_log_pmf(np.arange(k, n + 1), n, p))))
    upper = min(1.0, upper)
    return 1.0 - upper, upper


def binomial_tail(k: int, n: int, p: float) -> float:
    """Exact ``P(X >= k)`` for ``X ~ Binomial(n, p)``, summed in log space."""
    _check_binomial(n, p)
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k == 0:
        return 1.0
    return _split(k, n, p)[1]


def binomial_cdf(k: int, n: int, p: float) -> float:
    """Exact ``P(X <= k)``."""
    _check_binomial(n, p)
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    return _split(k + 1, n, p)[0]


def chance_interval(n: int, p: float = CHANCE, level: float = 0.99) -> tuple:
    """Central ``level`` acceptance region for the accuracy of a chance decoder.

    Returns ``(lo, hi)`` as fractions: the alpha/2 and 1 - alpha/2 binomial
    quantiles divided by ``n``. For n=600 at the 99% level this is
    [0.1283, 0.2067].
    """
    _check_binomial(n, p)
    alpha = 1.0 - level
    cdf = np.cumsum(np.exp(_log_pmf(np.arange(n + 1), n, p)))
    lo = int(np.searchsorted(cdf, alpha / 2))
    hi = int(np.searchsorted(cdf, 1 - alpha / 2))
    return lo / n, hi / n


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple:
    """Exact confidence interval for a binomial proportion."""
    if n <= 0 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n and n > 0, got k={k}, n={n}")
    alpha = 1.0 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(alpha / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - alpha / 2, k + 1, n - k))
    return lo, hi


def itr_bits(accuracy: float, n_classes: int = N_COMMANDS) -> float:
    """Wolpaw information transfer rate in bits per selection.

    Zero at or below chance; ``log2(n_classes)`` for perfect accuracy.
    """
    P = float(accuracy)
    if not 0 <= P <= 1:
        raise ValueError(f"accuracy must be in [0, 1], got {accuracy}")
    N = n_classes
    if P <= 1.0 / N:
        return 0.0
    if P == 1.0:
        return math.log2(N)
    return math.log2(N) + P * math.log2(P) + (1 - P) * math.log2((1 - P) / (N - 1))


def default_seconds_per_selection() -> float:
    # one online selection: 18 stimuli plus the 800 ms tail, ~7.61 s
    return session_duration(online_plan(), 1)


def summarize(results: Sequence, seconds_per_selection: Optional[float] = None) -> Metrics:
    if seconds_per_selection is None:
        seconds_per_selection = default_seconds_per_selection()
    if not seconds_per_selection > 0:
        raise ValueError("seconds_per_selection must be positive")
    if not results:
        raise ValueError("no selections to summarize")
    _check_known(results)
    n = len(results)
    k = sum(int(r.chosen == r.intended) for r in results)
    acc = k / n
    bits = itr_bits(acc)
    return Metrics(acc, n, k, binomial_tail(k, n, CHANCE), bits,
                   60.0 * bits / seconds_per_selection, float(seconds_per_selection))


def confusion(results: Sequence) -> np.ndarray:
    """6 x 6 counts, rows = intended command, columns = chosen command."""
    _check_known(results)
    counts = np.zeros((N_COMMANDS, N_COMMANDS), dtype=int)
    for r in results:
        counts[r.intended, r.chosen] += 1
    return counts


def format_report(metrics: Metrics, matrix: Optional[np.ndarray] = None) -> str:
    lines = [
        f"selections: {metrics.n_selections}",
        f"accuracy: {metrics.accuracy:.1%} ({metrics.n_correct}/{metrics.n_selections}), "
        f"chance {CHANCE:.1%}",
        f"binomial p vs chance: {metrics.binomial_p_vs_chance:.3g}",
        f"ITR: {metrics.itr_bits_per_selection:.3f} bits/selection, "
        f"{metrics.itr_bits_per_minute:.2f} bits/min "
        f"({metrics.seconds_per_selection:.2f} s/selection)",
    ]
    if matrix is not None:
        lines.append("confusion (rows intended, cols chosen):")
        lines.append("      " + " ".join(f"{c:>4d}" for c in range(N_COMMANDS)))
        for i, row in enumerate(matrix):
            lines.append(f"  {i:>2d}: " + " ".join(f"{v:>4d}" for v in row))
    return "\n".join(lines)
