import math
import statistics as stats

from .contracts.results import LatencyStats, SignificanceResult

# t-critical values for 95% CI (two-tailed, alpha=0.05)
# df -> t_critical
_T_CRITICAL_95 = {
    1: 12.706,
    2: 4.303,
    3: 3.182,
    4: 2.776,
    5: 2.571,
    6: 2.447,
    7: 2.365,
    8: 2.306,
    9: 2.262,
    10: 2.228,
    15: 2.131,
    20: 2.086,
    30: 2.042,
    50: 2.009,
    100: 1.984,
}

# p-value thresholds for t-distribution (approximate, two-tailed)
# Format: {df: [(t_value, p_value), ...]}
_P_VALUE_TABLE = {
    2: [(6.965, 0.01), (4.303, 0.05)],
    3: [(4.541, 0.01), (3.182, 0.05)],
    4: [(3.747, 0.01), (2.776, 0.05)],
    5: [(3.365, 0.01), (2.571, 0.05)],
    6: [(3.143, 0.01), (2.447, 0.05)],
    7: [(2.998, 0.01), (2.365, 0.05)],
    8: [(2.896, 0.01), (2.306, 0.05)],
    9: [(2.821, 0.01), (2.262, 0.05)],
    10: [(2.764, 0.01), (2.228, 0.05)],
    15: [(2.602, 0.01), (2.131, 0.05)],
    20: [(2.528, 0.01), (2.086, 0.05)],
    30: [(2.457, 0.01), (2.042, 0.05)],
    50: [(2.403, 0.01), (2.009, 0.05)],
    100: [(2.364, 0.01), (1.984, 0.05)],
}

_DIGITS = 4


def _get_t_critical(df: int) -> float:
    if df in _T_CRITICAL_95:
        return _T_CRITICAL_95[df]
    for threshold in sorted(_T_CRITICAL_95.keys(), reverse=True):
        if df >= threshold:
            return _T_CRITICAL_95[threshold]
    return 1.96  # Fallback to z-value for large samples


def _get_p_value_approx(t_stat: float, df: int) -> float:
    t_abs = abs(t_stat)
    closest_df = min(_P_VALUE_TABLE.keys(), key=lambda x: abs(x - df))
    thresholds = _P_VALUE_TABLE[closest_df]

    for t_thresh, p_val in thresholds:
        if t_abs >= t_thresh:
            return p_val

    return 1.0  # Not significant


def calculate_confidence_interval(
    mean: float, stddev: float, n: int
) -> tuple[float, float]:
    if n < 2:
        return mean, mean

    df = n - 1
    t_crit = _get_t_critical(df)
    margin = t_crit * (stddev / math.sqrt(n))

    return round(mean - margin, _DIGITS), round(mean + margin, _DIGITS)


def welch_t_test(samples1: list[float], samples2: list[float]) -> tuple[float, float]:
    n1, n2 = len(samples1), len(samples2)

    if n1 < 2 or n2 < 2:
        return 0.0, 1.0

    mean1 = stats.mean(samples1)
    mean2 = stats.mean(samples2)
    var1 = stats.variance(samples1)
    var2 = stats.variance(samples2)

    se = math.sqrt(var1 / n1 + var2 / n2)
    if se == 0:
        if mean1 != mean2:
            return float("inf") if mean1 > mean2 else float("-inf"), 0.01
        return 0.0, 1.0

    t_stat = (mean1 - mean2) / se

    # Welch-Satterthwaite degrees of freedom
    num = (var1 / n1 + var2 / n2) ** 2
    denom = (var1 / n1) ** 2 / (n1 - 1) + (var2 / n2) ** 2 / (n2 - 1)
    if denom == 0:
        df = float(n1 + n2 - 2)
    else:
        df = num / denom

    p_value = _get_p_value_approx(t_stat, int(df))

    return round(t_stat, 3), p_value


def summarize_latencies(label: str, samples_ms: list[float]) -> LatencyStats:
    n = len(samples_ms)
    if n == 0:
        return LatencyStats(label, 0, 0.0, 0.0, 0.0, 0.0)
    mean = stats.mean(samples_ms)
    stddev = stats.stdev(samples_ms) if n > 1 else 0.0
    ci_lower, ci_upper = calculate_confidence_interval(mean, stddev, n)
    return LatencyStats(
        label=label,
        n=n,
        mean_ms=round(mean, _DIGITS),
        stddev_ms=round(stddev, _DIGITS),
        ci_lower=ci_lower,
        ci_upper=ci_upper,
    )


def compare_strategies_significance(
    label: str, samples: list[tuple[str, list[float]]]
) -> list[SignificanceResult]:
    """Pairwise Welch tests on latency samples; the lower mean is faster."""
    results = []

    for i, (name1, samples1) in enumerate(samples):
        for name2, samples2 in samples[i + 1 :]:
            if not samples1 or not samples2:
                continue

            mean1 = stats.mean(samples1)
            mean2 = stats.mean(samples2)

            t_stat, p_value = welch_t_test(samples1, samples2)
            significant = p_value <= 0.05

            faster = None
            if significant:
                faster = name1 if mean1 < mean2 else name2

            results.append(
                SignificanceResult(
                    label=label,
                    strategy1=name1,
                    strategy2=name2,
                    mean1=round(mean1, _DIGITS),
                    mean2=round(mean2, _DIGITS),
                    t_statistic=t_stat,
                    p_value=p_value,
                    significant=significant,
                    faster=faster,
                )
            )

    return results
