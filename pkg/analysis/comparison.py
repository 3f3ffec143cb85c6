"""
Bounded vs Unbounded Comparison for BoundZNE
Groups fit results, pairs each bounded model with its unbounded analogue
and applies Holm correction across all groups
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, replace

from extrapolation.engine import FitStatus

from .paired_stats import WILCOXON_POLICY, holm_adjust, summarize_pairs

logger = logging.getLogger(__name__)

GROUP_FIELDS = ('lambda_set', 'backend', 'width')


@dataclass(frozen=True)
class ResultRow:
    """One fit result with the record context needed for pairing"""

    record_id: str
    curve_id: str
    backend: str
    lambda_set: str
    width: str
    ideal: float
    result: object

    @property
    def spec(self):
        return self.result.spec

    @property
    def estimate(self):
        """Zero-noise estimate, or None when the fit is filtered out"""
        return self.result.zne_estimate if self.result.converged else None


@dataclass(frozen=True)
class ComparisonReport:
    summaries: tuple
    group_by: tuple
    alpha: float
    solvers: tuple

    def metadata(self):
        return {
            'group_by': list(self.group_by),
            'alpha': self.alpha,
            'solvers': list(self.solvers),
            'wilcoxon': dict(WILCOXON_POLICY),
            'holm_family_size': sum(1 for s in self.summaries if s.wilcoxon is not None),
        }


def parse_group_by(text):
    fields = tuple(part.strip() for part in str(text).split(',') if part.strip())
    unknown = [name for name in fields if name not in GROUP_FIELDS]
    if unknown:
        raise ValueError(f'unknown group-by field(s) {unknown}; choose from {list(GROUP_FIELDS)}')
    return fields


def compare_results(rows, group_by=GROUP_FIELDS, alpha=0.05):
    """
    Paired summaries for every (model family, group) combination

    Args:
        rows: iterable of ResultRow
        group_by: subset of GROUP_FIELDS
        alpha: significance level reported with the Holm-adjusted p-values

    Returns:
        ComparisonReport with summaries sorted by group key
    """
    if not 0 < alpha < 1:
        raise ValueError(f'alpha must lie in (0, 1), got {alpha}')

    groups = defaultdict(lambda: {'bounded': {}, 'unbounded': {}, 'ideals': {}})
    solvers = set()
    for row in rows:
        # a model that cannot be fitted from this many points has no instances to count
        if row.result.status is FitStatus.INFEASIBLE:
            continue
        key = (row.spec.family_id,) + tuple(getattr(row, name) for name in group_by)
        arm = 'bounded' if row.spec.bounded else 'unbounded'
        group = groups[key]
        group[arm][row.record_id] = row.estimate
        group['ideals'][row.record_id] = row.ideal
        solver = row.result.solver_metadata.get('solver')
        if solver:
            solvers.add(solver)

    summaries = []
    for key in sorted(groups):
        group = groups[key]
        if not group['bounded'] or not group['unbounded']:
            logger.warning('Group %s has only one arm; skipping', key)
            continue
        max_count = len(group['ideals'])
        summaries.append(summarize_pairs(key, group['bounded'], group['unbounded'], group['ideals'], max_count))

    tested = [i for i, summary in enumerate(summaries) if summary.wilcoxon is not None]
    adjusted = holm_adjust([summaries[i].wilcoxon.p_value for i in tested])
    for i, p in zip(tested, adjusted):
        summaries[i] = replace(summaries[i], holm_adjusted_p=float(p))

    logger.info('Compared %d groups (%d with a Wilcoxon test)', len(summaries), len(tested))
    return ComparisonReport(tuple(summaries), tuple(group_by), float(alpha), tuple(sorted(solvers)))
