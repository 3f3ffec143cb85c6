"""
Paired Statistics for BoundZNE
Error metrics, paired improvement, Wilcoxon signed-rank test, Holm
adjustment, paired Cohen's d, winsorized ECDF and coverage accounting
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import norm, rankdata
from statsmodels.stats.multitest import multipletests

from .exceptions import DegenerateSampleError, InsufficientSampleError, SummaryInvariantError

# Largest sample handled by full enumeration of the null distribution
EXACT_WILCOXON_MAX_N = 25

WILCOXON_POLICY = {
    'zeros': 'discarded',
    'ties': 'mid-ranks',
    'exact_max_n': EXACT_WILCOXON_MAX_N,
    'approximation': 'normal, tie-corrected variance, continuity 0.5',
}


@dataclass(frozen=True)
class MeanSd:
    mean: float
    sd: float = None


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n: int
    zeros_discarded: int
    method: str


class EffectCategory(str, Enum):
    NEGLIGIBLE = 'negligible'
    SMALL = 'small'
    MEDIUM = 'medium'
    LARGE = 'large'


@dataclass(frozen=True)
class EffectSize:
    d: float = None
    category: EffectCategory = None

    @property
    def defined(self):
        return self.d is not None


@dataclass(frozen=True)
class EcdfCurve:
    points: tuple
    fraction_positive: float
    n: int


@dataclass(frozen=True)
class CoverageSummary:
    max_count: int
    finite_bounded: int
    finite_unbounded: int
    matched_ids: tuple

    @property
    def k(self):
        return len(self.matched_ids)

    @property
    def coverage_bounded(self):
        return self.finite_bounded / self.max_count

    @property
    def coverage_unbounded(self):
        return self.finite_unbounded / self.max_count

    @property
    def coverage_matched(self):
        return self.k / self.max_count


@dataclass(frozen=True)
class PairedSummary:
    group_key: tuple
    coverage: CoverageSummary
    mae_bounded: MeanSd = None
    mae_unbounded: MeanSd = None
    mse_bounded: MeanSd = None
    mse_unbounded: MeanSd = None
    delta: tuple = ()
    wilcoxon: WilcoxonResult = None
    holm_adjusted_p: float = None
    effect: EffectSize = EffectSize()
    fraction_positive: float = None

    @property
    def k(self):
        return self.coverage.k

    @property
    def wilcoxon_p(self):
        return None if self.wilcoxon is None else self.wilcoxon.p_value

    @property
    def excluded_bounded(self):
        return self.coverage.max_count - self.coverage.finite_bounded

    @property
    def excluded_unbounded(self):
        return self.coverage.max_count - self.coverage.finite_unbounded


def _paired_arrays(estimates, ideals):
    estimates = np.asarray(estimates, dtype=float)
    ideals = np.asarray(ideals, dtype=float)
    if estimates.shape != ideals.shape or estimates.ndim != 1:
        raise ValueError('estimates and ideals must be 1-d arrays of equal length')
    if estimates.size == 0:
        raise InsufficientSampleError('error metrics need at least one estimate')
    if not np.all(np.isfinite(estimates)) or not np.all(np.isfinite(ideals)):
        raise ValueError('error metrics need finite inputs')
    return estimates, ideals


def _mean_sd(values):
    sd = float(np.std(values, ddof=1)) if values.size > 1 else None
    return MeanSd(float(np.mean(values)), sd)


def mae(estimates, ideals):
    """Mean absolute error with its sample standard deviation"""
    estimates, ideals = _paired_arrays(estimates, ideals)
    return _mean_sd(np.abs(estimates - ideals))


def mse(estimates, ideals):
    """Mean squared error with its sample standard deviation"""
    estimates, ideals = _paired_arrays(estimates, ideals)
    return _mean_sd((estimates - ideals) ** 2)


def improvement(unbounded_estimate, bounded_estimate, ideal):
    """Positive when the bounded estimate is closer to the ideal value; works elementwise on arrays"""
    return abs(unbounded_estimate - ideal) - abs(bounded_estimate - ideal)


def doubled_signed_ranks(delta):
    """
    Non-zero differences, their doubled mid-ranks (integers) and the
    number of zeros dropped
    """
    delta = np.asarray(delta, dtype=float)
    nonzero = delta[delta != 0]
    ranks = rankdata(np.abs(nonzero), method='average')
    return nonzero, np.rint(2.0 * ranks).astype(np.int64), int(delta.size - nonzero.size)


def exact_null_counts(doubled_ranks):
    """
    Number of sign patterns giving each value of 2*W+ (index = 2*W+)

    Convolves one rank at a time; exact integer arithmetic.
    """
    total = int(np.sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for rank in doubled_ranks:
        rank = int(rank)
        shifted = np.zeros_like(counts)
        shifted[rank:] = counts[:total + 1 - rank]
        counts = counts + shifted
    return counts


def _clamp_p(p):
    return min(1.0, max(float(p), np.finfo(float).tiny))


def wilcoxon_signed_rank(delta):
    """
    Two-sided Wilcoxon signed-rank test of paired differences

    Args:
        delta: paired differences; zeros are discarded

    Returns:
        WilcoxonResult with statistic min(W+, W-); exact p-value by full
        enumeration for n <= 25, normal approximation otherwise
    """
    nonzero, ranks2, zeros = doubled_signed_ranks(delta)
    n = int(nonzero.size)
    if n == 0:
        raise DegenerateSampleError('all paired differences are zero')

    w_plus2 = int(ranks2[nonzero > 0].sum())
    w_minus2 = int(ranks2.sum()) - w_plus2
    statistic = min(w_plus2, w_minus2) / 2.0

    if n <= EXACT_WILCOXON_MAX_N:
        counts = exact_null_counts(ranks2)
        lower = int(counts[:w_plus2 + 1].sum())
        upper = int(counts[w_plus2:].sum())
        p = 2.0 * min(lower, upper) / float(2 ** n)
        return WilcoxonResult(statistic, _clamp_p(p), n, zeros, 'exact')

    ranks = ranks2 / 2.0
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_sizes ** 3 - tie_sizes)) / 48.0
    z = (abs(w_plus2 / 2.0 - mean) - 0.5) / math.sqrt(variance)
    p = 2.0 * norm.sf(z)
    return WilcoxonResult(statistic, _clamp_p(p), n, zeros, 'normal')


def holm_adjust(p_values):
    """Holm step-down adjusted p-values, in the input order"""
    p_values = np.asarray(p_values, dtype=float)
    if p_values.size == 0:
        return p_values
    if np.any((p_values < 0) | (p_values > 1)) or not np.all(np.isfinite(p_values)):
        raise ValueError('p-values must lie in [0, 1]')
    return multipletests(p_values, method='holm')[1]


def effect_category(d):
    magnitude = abs(d)
    if magnitude < 0.2:
        return EffectCategory.NEGLIGIBLE
    if magnitude < 0.5:
        return EffectCategory.SMALL
    if magnitude < 0.8:
        return EffectCategory.MEDIUM
    return EffectCategory.LARGE


def cohens_d_paired(delta):
    """Mean over sample sd of the paired differences; undefined when sd is zero"""
    delta = np.asarray(delta, dtype=float)
    if delta.size < 2:
        raise InsufficientSampleError("Cohen's d needs at least two paired differences")
    sd = float(np.std(delta, ddof=1))
    if sd == 0.0 or np.all(delta == delta[0]):
        return EffectSize()
    d = float(np.mean(delta)) / sd
    return EffectSize(d, effect_category(d))


def ecdf_winsorized(delta, cap):
    """
    Step points of the empirical CDF after clamping to [-cap, cap]

    fraction_positive is the share of strictly positive differences.
    """
    delta = np.asarray(delta, dtype=float)
    if delta.size == 0:
        raise InsufficientSampleError('ECDF needs at least one value')
    if not cap > 0:
        raise ValueError(f'cap must be positive, got {cap}')
    clamped = np.clip(delta, -cap, cap)
    xs, counts = np.unique(clamped, return_counts=True)
    heights = np.cumsum(counts) / delta.size
    points = tuple((float(x), float(f)) for x, f in zip(xs, heights))
    return EcdfCurve(points, float(np.mean(delta > 0)), int(delta.size))


def _is_finite(value):
    return value is not None and math.isfinite(value)


def coverage_summary(bounded_results, unbounded_results, max_count):
    """
    Finite-prediction counts per arm and the ids finite in both

    Args:
        bounded_results: mapping record id -> estimate or None
        unbounded_results: mapping record id -> estimate or None
        max_count: number of instances that could have produced a prediction
    """
    if max_count < 1:
        raise ValueError(f'max_count must be positive, got {max_count}')
    finite_bounded = {rid for rid, value in bounded_results.items() if _is_finite(value)}
    finite_unbounded = {rid for rid, value in unbounded_results.items() if _is_finite(value)}
    matched = tuple(sorted(finite_bounded & finite_unbounded))
    return CoverageSummary(max_count, len(finite_bounded), len(finite_unbounded), matched)


def summarize_pairs(group_key, bounded_results, unbounded_results, ideals, max_count):
    """
    Full paired comparison of one group (Holm adjustment is applied later,
    across groups)

    Args:
        group_key: tuple identifying the group
        bounded_results, unbounded_results: record id -> estimate or None
        ideals: record id -> ideal value
        max_count: estimated maximum number of instances in the group
    """
    coverage = coverage_summary(bounded_results, unbounded_results, max_count)
    if coverage.k == 0:
        return PairedSummary(group_key, coverage)

    ids = coverage.matched_ids
    bounded = np.array([bounded_results[rid] for rid in ids], dtype=float)
    unbounded = np.array([unbounded_results[rid] for rid in ids], dtype=float)
    ideal = np.array([ideals[rid] for rid in ids], dtype=float)
    delta = improvement(unbounded, bounded, ideal)

    try:
        wilcoxon = wilcoxon_signed_rank(delta)
    except DegenerateSampleError:
        wilcoxon = None
    try:
        effect = cohens_d_paired(delta)
    except InsufficientSampleError:
        effect = EffectSize()

    summary = PairedSummary(
        group_key=group_key,
        coverage=coverage,
        mae_bounded=mae(bounded, ideal),
        mae_unbounded=mae(unbounded, ideal),
        mse_bounded=mse(bounded, ideal),
        mse_unbounded=mse(unbounded, ideal),
        delta=tuple(float(v) for v in delta),
        wilcoxon=wilcoxon,
        effect=effect,
        fraction_positive=float(np.mean(delta > 0)),
    )
    check_summary(summary)
    return summary


def check_summary(summary):
    """Raise SummaryInvariantError if the summary breaks a structural invariant"""
    coverage = summary.coverage
    if coverage.k > min(coverage.finite_bounded, coverage.finite_unbounded):
        raise SummaryInvariantError(f'{summary.group_key}: more matched pairs than finite predictions')
    if coverage.coverage_matched > min(coverage.coverage_bounded, coverage.coverage_unbounded):
        raise SummaryInvariantError(f'{summary.group_key}: matched coverage exceeds an arm coverage')
    for arm_mae, arm_mse in ((summary.mae_bounded, summary.mse_bounded),
                             (summary.mae_unbounded, summary.mse_unbounded)):
        if arm_mae is None:
            continue
        # Jensen: the mean absolute error never exceeds the root mean square
        if arm_mae.mean > math.sqrt(arm_mse.mean) * (1 + 1e-12) + 1e-15:
            raise SummaryInvariantError(f'{summary.group_key}: MAE {arm_mae.mean} exceeds sqrt(MSE)')
