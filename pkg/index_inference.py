#!/usr/bin/env python3
"""
Standard errors and confidence intervals for a single index value.

By default the baseline predictor, its calibration constant c0 and the weights
are treated as fixed; uncertainty comes only from sampling within each group of
the scored snapshot. The interval then targets the index the frozen predictor
would report on the whole market.

Passing the baseline snapshot's group statistics (or ratios) adds the sampling
error of c0 itself, which is what an interval needs to cover the market's true
index level.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import norm

from diamond_data import DataError
from hedonic_index import CARAT_CLASSES, GroupStats

logger = logging.getLogger(__name__)

DEFAULT_REPLICATES = 1000
MIN_REPLICATES = 200
REPLICATE_BATCH = 50

Groups = List[np.ndarray]


@dataclass(frozen=True)
class VarianceEstimate:
    """Variance of the headline, each group's share of it and the calibration share."""
    total: float
    contributions: Tuple[float, ...]
    excluded: Tuple[int, ...] = ()
    baseline: float = 0.0

    @property
    def se(self) -> float:
        return math.sqrt(self.total)


@dataclass(frozen=True)
class ConfidenceInterval:
    method: str
    level: float
    lower: float
    upper: float
    se: Optional[float] = None
    replicates: Optional[int] = None
    seed: Optional[int] = None
    includes_baseline: bool = False

    def to_dict(self) -> dict:
        return {"method": self.method, "level": self.level, "lower": self.lower, "upper": self.upper,
                "se": self.se, "B": self.replicates, "seed": self.seed,
                "includes_baseline": self.includes_baseline}


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise DataError(f"confidence level {level} outside (0, 1)")


def z_value(level: float) -> float:
    """Two-sided standard normal quantile, e.g. 1.2816 at 0.80."""
    _check_level(level)
    return float(norm.ppf((1.0 + level) / 2.0))


def _usable_weights(weights: Sequence[float], usable: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    usable = usable & (w > 0)
    if not usable.any():
        raise DataError("no group has enough records to estimate a variance")
    kept = math.fsum(w[usable])
    return np.where(usable, w / kept, 0.0)


def _sampling_terms(stats: GroupStats, weights: Sequence[float]) -> Tuple[np.ndarray, Tuple[float, ...],
                                                                           Tuple[int, ...]]:
    usable = stats.count >= 2
    w = np.asarray(weights, dtype=float)
    excluded = tuple(int(g) + 1 for g in np.flatnonzero(~usable & (w > 0)))
    w = _usable_weights(w, usable)
    terms = tuple(float(w[g] ** 2 * stats.variance[g] / stats.count[g]) if w[g] > 0 else 0.0
                  for g in range(len(w)))
    return w, terms, excluded


def hci_variance(stats: GroupStats, weights: Sequence[float], scale: float,
                 baseline: Optional[GroupStats] = None,
                 baseline_weights: Optional[Sequence[float]] = None) -> VarianceEstimate:
    """
    Variance of the headline: scale^2 * sum_g w_g^2 * s_g^2 / n_g.

    Groups with fewer than two records are excluded and the remaining weights
    renormalised. With ``baseline`` the calibration constant c0 = sum_g w0_g * stat0_g
    is treated as an independent estimate too, and the delta-method term
    scale^2 * S^2 * Var(c0) / c0^2 is added, S being the weighted statistic.

    Args:
        stats (GroupStats): group statistics with sample variances and counts
        weights: group weights
        scale (float): the headline's scale factor, 1000 / c0
        baseline (GroupStats): group statistics of the baseline snapshot
        baseline_weights: weights c0 was computed with (``weights`` when omitted)

    Returns:
        VarianceEstimate
    """
    w, terms, excluded = _sampling_terms(stats, weights)
    if excluded:
        logger.warning("group(s) %s have fewer than 2 records: excluded from the variance",
                       ", ".join(map(str, excluded)))
    contributions = tuple(scale ** 2 * t for t in terms)
    baseline_term = 0.0
    if baseline is not None:
        w0, terms0, excluded0 = _sampling_terms(baseline, weights if baseline_weights is None else baseline_weights)
        if excluded0:
            logger.warning("baseline group(s) %s have fewer than 2 records: excluded from the variance",
                           ", ".join(map(str, excluded0)))
        level = math.fsum(w[g] * stats.stat[g] for g in range(len(w)) if w[g] > 0)
        c0 = math.fsum(w0[g] * baseline.stat[g] for g in range(len(w0)) if w0[g] > 0)
        baseline_term = scale ** 2 * (level / c0) ** 2 * math.fsum(terms0)
    total = math.fsum(contributions) + baseline_term
    return VarianceEstimate(total=total, contributions=contributions, excluded=excluded, baseline=baseline_term)


def normal_ci(headline: float, variance: VarianceEstimate, level: float = 0.95) -> ConfidenceInterval:
    """headline +/- z * sqrt(variance)."""
    if variance.total < 0:
        raise DataError("negative variance")
    half = z_value(level) * variance.se
    return ConfidenceInterval(method="Normal", level=level, lower=headline - half,
                              upper=headline + half, se=variance.se,
                              includes_baseline=variance.baseline > 0)


# ===== Bootstrap =====

def _group_statistic(x: np.ndarray, statistic: str) -> float:
    return math.fsum(x) / len(x) if statistic == "mean" else float(np.median(x))


def _weighted_statistic(groups: Groups, w: np.ndarray, statistic: str) -> float:
    return math.fsum(w[g] * _group_statistic(x, statistic) for g, x in enumerate(groups) if w[g] > 0)


def _variance_of_mean(groups: Groups, w: np.ndarray) -> float:
    return math.fsum(w[g] ** 2 * float(np.var(x, ddof=1)) / len(x)
                     for g, x in enumerate(groups) if w[g] > 0 and len(x) >= 2)


@dataclass(frozen=True)
class _Baseline:
    groups: Groups
    w: np.ndarray
    c0: float


def _headline_and_se(groups: Groups, w: np.ndarray, scale: float, statistic: str,
                     baseline: Optional[_Baseline] = None, reference_c0: Optional[float] = None
                     ) -> Tuple[float, float]:
    level = _weighted_statistic(groups, w, statistic)
    variance = _variance_of_mean(groups, w)
    if baseline is None:
        return scale * level, scale * math.sqrt(variance)
    # the scale moves with the resampled c0: 1000 / c0* = scale * c0 / c0*
    scale = scale * reference_c0 / baseline.c0
    variance += (level / baseline.c0) ** 2 * _variance_of_mean(baseline.groups, baseline.w)
    return scale * level, scale * math.sqrt(variance)


def _resample(groups: Groups, w: np.ndarray, rng: np.random.Generator) -> Groups:
    return [x[rng.integers(0, len(x), size=len(x))] if w[g] > 0 else x for g, x in enumerate(groups)]


def _replicate(groups: Groups, w: np.ndarray, scale: float, statistic: str,
               baseline: Optional[_Baseline], seed: np.random.SeedSequence) -> Tuple[float, float]:
    """One stratified resample: (headline*, se*)."""
    rng = np.random.default_rng(seed)
    resampled = _resample(groups, w, rng)
    if baseline is None:
        return _headline_and_se(resampled, w, scale, statistic)
    base_groups = _resample(baseline.groups, baseline.w, rng)
    redrawn = _Baseline(base_groups, baseline.w, _weighted_statistic(base_groups, baseline.w, statistic))
    return _headline_and_se(resampled, w, scale, statistic, redrawn, baseline.c0)


def _replicates(groups: Groups, w: np.ndarray, scale: float, statistic: str, baseline: Optional[_Baseline],
                replicates: int, seed: int, n_jobs: int) -> np.ndarray:
    if replicates < MIN_REPLICATES:
        raise DataError(f"at least {MIN_REPLICATES} bootstrap replicates required, got {replicates}")
    seeds = np.random.SeedSequence(seed).spawn(replicates)
    batches = [seeds[k:k + REPLICATE_BATCH] for k in range(0, replicates, REPLICATE_BATCH)]

    def run(batch: List[np.random.SeedSequence]) -> List[Tuple[float, float]]:
        return [_replicate(groups, w, scale, statistic, baseline, s) for s in batch]

    results = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(run)(b) for b in batches)
    return np.array([r for batch in results for r in batch], dtype=float)


def _prepare(ratios_by_group: Sequence[np.ndarray], weights: Sequence[float]) -> Tuple[Groups, np.ndarray]:
    groups = [np.asarray(x, dtype=float) for x in ratios_by_group]
    if len(groups) != len(weights):
        raise DataError("one weight per group required")
    nonempty = np.array([len(x) > 0 for x in groups])
    return groups, _usable_weights(weights, nonempty)


def _prepare_baseline(baseline_groups: Optional[Sequence[np.ndarray]], baseline_weights: Optional[Sequence[float]],
                      weights: Sequence[float], statistic: str) -> Optional[_Baseline]:
    if baseline_groups is None:
        return None
    groups, w = _prepare(baseline_groups, weights if baseline_weights is None else baseline_weights)
    return _Baseline(groups, w, _weighted_statistic(groups, w, statistic))


def bootstrap_ci(ratios_by_group: Sequence[np.ndarray], weights: Sequence[float], scale: float,
                 level: float = 0.95, replicates: int = DEFAULT_REPLICATES, seed: int = 0,
                 statistic: str = "mean", n_jobs: int = 1,
                 baseline_groups: Optional[Sequence[np.ndarray]] = None,
                 baseline_weights: Optional[Sequence[float]] = None) -> ConfidenceInterval:
    """
    Percentile interval from stratified resampling within each group.

    Group sizes and weights stay fixed. Every replicate draws from its own
    seed spawned from ``seed``, so the interval does not depend on ``n_jobs``.
    When the baseline ratios are given they are resampled in the same replicate
    and c0 is recomputed from them.

    Args:
        ratios_by_group: ratios of each group, in weight order
        weights: group weights (renormalised over non-empty groups)
        scale (float): 1000 / c0
        level (float): coverage
        replicates (int): number of resamples, at least 200
        seed (int): bootstrap seed
        statistic (str): "mean" or "median"
        n_jobs (int): parallel workers
        baseline_groups: ratios of the baseline snapshot by group
        baseline_weights: weights c0 was computed with (``weights`` when omitted)

    Returns:
        ConfidenceInterval
    """
    _check_level(level)
    groups, w = _prepare(ratios_by_group, weights)
    baseline = _prepare_baseline(baseline_groups, baseline_weights, weights, statistic)
    draws = _replicates(groups, w, scale, statistic, baseline, replicates, seed, n_jobs)
    lower, upper = np.quantile(draws[:, 0], [(1.0 - level) / 2.0, (1.0 + level) / 2.0])
    return ConfidenceInterval(method="BootstrapPercentile", level=level, lower=float(lower), upper=float(upper),
                              se=float(np.std(draws[:, 0], ddof=1)), replicates=replicates, seed=seed,
                              includes_baseline=baseline is not None)


def percentile_t_ci(ratios_by_group: Sequence[np.ndarray], weights: Sequence[float], scale: float,
                    level: float = 0.95, replicates: int = DEFAULT_REPLICATES, seed: int = 0,
                    statistic: str = "mean", n_jobs: int = 1,
                    baseline_groups: Optional[Sequence[np.ndarray]] = None,
                    baseline_weights: Optional[Sequence[float]] = None) -> ConfidenceInterval:
    """
    Studentised bootstrap interval.

    Each replicate's pivot is t* = (HCI* - HCI) / se*; the interval is
    HCI - t*_hi * se to HCI - t*_lo * se with se the analytic standard error of
    the original data. Replicates with se* = 0 are dropped.
    """
    _check_level(level)
    groups, w = _prepare(ratios_by_group, weights)
    baseline = _prepare_baseline(baseline_groups, baseline_weights, weights, statistic)
    headline, se = _headline_and_se(groups, w, scale, statistic, baseline,
                                    baseline.c0 if baseline is not None else None)
    draws = _replicates(groups, w, scale, statistic, baseline, replicates, seed, n_jobs)

    valid = draws[:, 1] > 0
    if not valid.all():
        logger.warning("%d bootstrap replicate(s) with zero standard error dropped",
                       int(np.count_nonzero(~valid)))
    if not valid.any():
        return ConfidenceInterval(method="PercentileT", level=level, lower=headline, upper=headline,
                                  se=se, replicates=replicates, seed=seed,
                                  includes_baseline=baseline is not None)
    pivots = (draws[valid, 0] - headline) / draws[valid, 1]
    t_lo, t_hi = np.quantile(pivots, [(1.0 - level) / 2.0, (1.0 + level) / 2.0])
    return ConfidenceInterval(method="PercentileT", level=level, lower=float(headline - t_hi * se),
                              upper=float(headline - t_lo * se), se=se, replicates=replicates, seed=seed,
                              includes_baseline=baseline is not None)


def main():
    """Print the three intervals for a small lognormal example."""
    rng = np.random.default_rng(7)
    groups = [np.exp(rng.normal(0.0, 0.1, n)) for n in (3000, 2500, 1200, 300, 100, 30, 60)]
    weights = [0.0874, 0.1413, 0.2224, 0.1500, 0.1271, 0.0923, 0.1795]
    weights = [w / math.fsum(weights) for w in weights]
    headline = 1000.0 * math.fsum(w * float(np.mean(x)) for w, x in zip(weights, groups))
    stats = GroupStats(CARAT_CLASSES, "mean", np.array([np.mean(x) for x in groups]),
                       np.array([len(x) for x in groups]), np.array([np.var(x, ddof=1) for x in groups]),
                       np.zeros(len(groups)))
    print(normal_ci(headline, hci_variance(stats, weights, 1000.0)).to_dict())
    print(bootstrap_ci(groups, weights, 1000.0, seed=1).to_dict())
    print(percentile_t_ci(groups, weights, 1000.0, seed=1).to_dict())


if __name__ == "__main__":
    main()
