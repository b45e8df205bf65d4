#!/usr/bin/env python3
"""
The hedonic ratio index.

Each scored stone gets a ratio of its price to the baseline model's
prediction. Ratios are averaged within carat classes (or any other grouping),
the group averages are combined with value-based weights and the result is
expressed on a base of 1000 at the baseline date.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from diamond_data import (
    CARAT_CLASS_EDGES,
    CLARITIES,
    COLOURS,
    MAX_CARAT,
    MIN_CARAT,
    N_CARAT_CLASSES,
    SHAPES,
    ConfigError,
    DataError,
    ExternalSeries,
    Snapshot,
    carat_class_index,
)
from price_models import BaselinePredictor, Calibration, Model, as_predictor

logger = logging.getLogger(__name__)

INDEX_BASE = 1000.0
STATISTICS = ("mean", "median")
WEIGHTING_POLICIES = ("final", "proportional", "equal")
INDEX_CSV_SCHEMA_VERSION = 1
INDEX_COLUMNS = (["date", "headline"]
                 + [f"group_{g}_subindex" for g in range(1, N_CARAT_CLASSES + 1)]
                 + ["statistic", "smoothing", "model_id"])


# ===== Grouping =====

@dataclass(frozen=True)
class GroupingScheme:
    """A partition of stones into labelled groups by carat class or by one attribute."""
    kind: str
    labels: Tuple[str, ...]
    column: Optional[str] = None

    @property
    def name(self) -> str:
        return "carat_class" if self.kind == "CaratClass" else self.kind.lower()

    def __len__(self) -> int:
        return len(self.labels)

    def codes(self, frame: pd.DataFrame) -> np.ndarray:
        """0-based group of every row, -1 where the row falls outside the scheme."""
        if self.kind == "CaratClass":
            carat = frame["carat"].to_numpy(dtype=float)
            codes = carat_class_index(carat)
            return np.where((carat >= MIN_CARAT) & (carat < MAX_CARAT), codes, -1)
        values = frame[self.column].astype(str)
        return pd.Categorical(values, categories=list(self.labels)).codes.astype(np.int64)


CARAT_CLASSES = GroupingScheme("CaratClass", tuple(str(g) for g in range(1, N_CARAT_CLASSES + 1)))
SHAPE_GROUPS = GroupingScheme("Shape", SHAPES, "shape")
COLOUR_GROUPS = GroupingScheme("Colour", COLOURS, "colour")
CLARITY_GROUPS = GroupingScheme("Clarity", CLARITIES, "clarity")
SCHEMES = {s.name: s for s in (CARAT_CLASSES, SHAPE_GROUPS, COLOUR_GROUPS, CLARITY_GROUPS)}


def scheme_by_name(name: str) -> GroupingScheme:
    key = name.strip().lower().replace("-", "_")
    if key in ("carat", "class"):
        key = "carat_class"
    if key not in SCHEMES:
        raise ConfigError(f"unknown grouping scheme {name!r} (choose from {', '.join(SCHEMES)})")
    return SCHEMES[key]


def assign_group(value: Union[float, str], scheme: GroupingScheme = CARAT_CLASSES) -> int:
    """
    1-based group id of a carat (or, for attribute schemes, a level).

    Carat classes are half-open, so 1.00 ct is class 3 and 5.00 ct is class 7.
    """
    if scheme.kind == "CaratClass":
        carat = float(value)
        if not MIN_CARAT <= carat < MAX_CARAT:
            raise DataError(f"carat {carat} outside [{MIN_CARAT}, {MAX_CARAT})")
        return int(carat_class_index(carat)) + 1
    if value not in scheme.labels:
        raise DataError(f"{value!r} is not a {scheme.kind} group")
    return scheme.labels.index(value) + 1


# ===== Ratios and group statistics =====

@dataclass(frozen=True, eq=False)
class RatioSet:
    """Price / predicted price for every scored record of one snapshot."""
    snapshot: Snapshot
    ratios: np.ndarray
    n_rejected: int = 0

    def __len__(self) -> int:
        return len(self.ratios)

    @property
    def date(self) -> date:
        return self.snapshot.date

    @property
    def prices(self) -> np.ndarray:
        return self.snapshot.prices

    def codes(self, scheme: GroupingScheme) -> np.ndarray:
        return scheme.codes(self.snapshot.frame)

    def by_group(self, scheme: GroupingScheme = CARAT_CLASSES) -> List[np.ndarray]:
        """Ratios split by group, in scheme order (empty arrays for empty groups)."""
        codes = self.codes(scheme)
        return [self.ratios[codes == g] for g in range(len(scheme))]

    def as_tuples(self, scheme: GroupingScheme = CARAT_CLASSES) -> List[Tuple[str, int, float]]:
        """(record id, 1-based group id, ratio) per record."""
        groups = self.codes(scheme) + 1
        return list(zip(self.snapshot.ids, groups.tolist(), self.ratios.tolist()))

    def scaled(self, factor: float) -> "RatioSet":
        return RatioSet(self.snapshot.scaled(factor), self.ratios * factor, self.n_rejected)


def compute_ratios(snapshot: Snapshot, predictor: Model) -> RatioSet:
    """
    Ratio of actual to predicted price for each record.

    Records whose prediction is not a positive finite number are dropped and
    counted in ``n_rejected``.

    Args:
        snapshot (Snapshot): validated snapshot
        predictor: fitted baseline model

    Returns:
        RatioSet
    """
    predicted = as_predictor(predictor).predict_snapshot(snapshot)
    good = np.isfinite(predicted) & (predicted > 0)
    n_rejected = int(np.count_nonzero(~good))
    if n_rejected:
        logger.warning("%s: %d record(s) without a positive prediction rejected", snapshot.date, n_rejected)
        snapshot = snapshot.subset(good)
        predicted = predicted[good]
    return RatioSet(snapshot=snapshot, ratios=snapshot.prices / predicted, n_rejected=n_rejected)


@dataclass(frozen=True, eq=False)
class GroupStats:
    """Per-group statistic, count, sample variance and total price value."""
    scheme: GroupingScheme
    statistic: str
    stat: np.ndarray
    count: np.ndarray
    variance: np.ndarray
    total_value: np.ndarray

    @property
    def nonempty(self) -> np.ndarray:
        return self.count > 0

    def stat_or_none(self) -> Dict[str, Optional[float]]:
        return {label: (float(s) if n > 0 else None)
                for label, s, n in zip(self.scheme.labels, self.stat, self.count)}


def group_stats(ratios: RatioSet, scheme: GroupingScheme = CARAT_CLASSES,
                statistic: str = "mean") -> GroupStats:
    """
    Summarise ratios within each group of a scheme.

    Sums are exactly rounded (``math.fsum``) so results do not depend on record
    order. Empty groups carry NaN statistics; groups with fewer than two ratios
    carry NaN variance.

    Args:
        ratios (RatioSet): scored records
        scheme (GroupingScheme): grouping
        statistic (str): "mean" or "median"

    Returns:
        GroupStats
    """
    if statistic not in STATISTICS:
        raise ConfigError(f"unknown statistic {statistic!r}")
    codes = ratios.codes(scheme)
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    bounds = np.searchsorted(sorted_codes, np.arange(len(scheme) + 1), side="left")
    values = ratios.ratios[order]
    prices = ratios.prices[order]

    m = len(scheme)
    stat = np.full(m, np.nan)
    variance = np.full(m, np.nan)
    count = np.zeros(m, dtype=np.int64)
    total = np.zeros(m)
    for g in range(m):
        x = values[bounds[g]:bounds[g + 1]]
        n = len(x)
        count[g] = n
        if n == 0:
            continue
        total[g] = math.fsum(prices[bounds[g]:bounds[g + 1]])
        mean = math.fsum(x) / n
        stat[g] = mean if statistic == "mean" else float(np.median(x))
        if n >= 2:
            variance[g] = math.fsum((x - mean) ** 2) / (n - 1)
    return GroupStats(scheme=scheme, statistic=statistic, stat=stat, count=count,
                      variance=variance, total_value=total)


# ===== Weights =====

@dataclass(frozen=True)
class WeightVector:
    """Non-negative group weights summing to 1."""
    labels: Tuple[str, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.values):
            raise DataError("one weight per group required")
        if any(not w >= 0 for w in self.values):
            raise DataError("weights must be non-negative")
        if abs(math.fsum(self.values) - 1.0) > 1e-12:
            raise DataError(f"weights sum to {math.fsum(self.values)!r}, not 1")

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.labels, self.values))


def weights_from_totals(totals: Sequence[float], labels: Optional[Sequence[str]] = None) -> WeightVector:
    """Proportional ("market-cap") weights from group total values."""
    totals = [float(t) for t in totals]
    labels = tuple(labels) if labels is not None else tuple(str(g) for g in range(1, len(totals) + 1))
    grand = math.fsum(totals)
    if not grand > 0:
        raise DataError("every group is empty: no value to weight by")
    return WeightVector(labels=labels, values=tuple(t / grand for t in totals))


def proportional_weights(snapshot: Snapshot, scheme: GroupingScheme = CARAT_CLASSES) -> WeightVector:
    """
    Weight of each group = its total price value / the snapshot's total value.

    Args:
        snapshot (Snapshot): priced records
        scheme (GroupingScheme): grouping, carat classes by default

    Returns:
        WeightVector
    """
    codes = scheme.codes(snapshot.frame)
    prices = snapshot.prices
    totals = [math.fsum(prices[codes == g]) for g in range(len(scheme))]
    return weights_from_totals(totals, scheme.labels)


def final_weights(proportional: WeightVector) -> WeightVector:
    """Blend proportional weights 50/50 with equal weights: (w + 1/M) / 2."""
    m = len(proportional)
    return WeightVector(labels=proportional.labels,
                        values=tuple((w + 1.0 / m) / 2.0 for w in proportional.values))


def equal_weights(labels: Sequence[str]) -> WeightVector:
    return WeightVector(labels=tuple(labels), values=(1.0 / len(labels),) * len(labels))


def policy_weights(totals: Sequence[float], policy: str, labels: Sequence[str]) -> WeightVector:
    """Weights under one of the supported policies."""
    if policy == "final":
        return final_weights(weights_from_totals(totals, labels))
    if policy == "proportional":
        return weights_from_totals(totals, labels)
    if policy == "equal":
        return equal_weights(labels)
    raise ConfigError(f"unknown weighting policy {policy!r} (choose from {', '.join(WEIGHTING_POLICIES)})")


def weight_table(snapshot: Snapshot) -> pd.DataFrame:
    """Count, total value and weights per carat class of a snapshot."""
    codes = CARAT_CLASSES.codes(snapshot.frame)
    prices = snapshot.prices
    totals = [math.fsum(prices[codes == g]) for g in range(N_CARAT_CLASSES)]
    proportional = weights_from_totals(totals)
    final = final_weights(proportional)
    return pd.DataFrame({
        "group": range(1, N_CARAT_CLASSES + 1),
        "lower_carat": CARAT_CLASS_EDGES[:-1],
        "upper_carat": CARAT_CLASS_EDGES[1:],
        "count": [int(np.count_nonzero(codes == g)) for g in range(N_CARAT_CLASSES)],
        "total_value": totals,
        "proportional_weight": proportional.values,
        "final_weight": final.values,
    })


def effective_weights(weights: Sequence[float], nonempty: np.ndarray) -> Tuple[np.ndarray, List[str]]:
    """
    Weights restricted to non-empty groups and renormalised to sum to 1.

    Returns:
        Tuple[np.ndarray, List[str]]: weights (0 on empty groups) and warnings
    """
    w = np.asarray(weights, dtype=float)
    nonempty = np.asarray(nonempty, dtype=bool)
    if not nonempty.any():
        raise DataError("every group is empty")
    if nonempty.all():
        return w, []
    kept = math.fsum(w[nonempty])
    if not kept > 0:
        raise DataError("all weight sits on empty groups")
    out = np.where(nonempty, w / kept, 0.0)
    missing = [str(g + 1) for g in np.flatnonzero(~nonempty)]
    message = f"empty group(s) {', '.join(missing)}: weights renormalised over the rest"
    logger.warning(message)
    return out, [message]


def weighted_sum(stat: np.ndarray, weights: np.ndarray) -> float:
    mask = weights > 0
    return math.fsum(weights[mask] * stat[mask])


# ===== Index points =====

@dataclass(frozen=True)
class IndexPoint:
    """One index value with the ingredients it was computed from."""
    date: date
    headline: float
    statistic: str = "mean"
    group_stat: Tuple[Optional[float], ...] = ()
    group_count: Tuple[int, ...] = ()
    group_total: Tuple[float, ...] = ()
    weights: Tuple[float, ...] = ()
    subindices: Dict[str, Dict[str, Optional[float]]] = field(default_factory=dict)
    warnings: Tuple[str, ...] = ()
    n_rejected: int = 0


def compute_hci(stats: GroupStats, weights: WeightVector, c0: float,
                on: Optional[date] = None) -> IndexPoint:
    """
    Headline index: 1000 x (sum of weighted group statistics) / c0.

    Empty groups are dropped and the remaining weights renormalised, with a
    warning recorded on the point.

    Args:
        stats (GroupStats): carat-class statistics of the scored snapshot
        weights (WeightVector): group weights
        c0 (float): the same weighted sum computed on the baseline snapshot
        on (date): date of the point

    Returns:
        IndexPoint
    """
    w, warnings = effective_weights(weights.values, stats.nonempty)
    headline = INDEX_BASE * weighted_sum(stats.stat, w) / c0
    return IndexPoint(
        date=on,
        headline=headline,
        statistic=stats.statistic,
        group_stat=tuple(float(s) if n > 0 else None for s, n in zip(stats.stat, stats.count)),
        group_count=tuple(int(n) for n in stats.count),
        group_total=tuple(float(t) for t in stats.total_value),
        weights=tuple(float(x) for x in w),
        warnings=tuple(warnings),
    )


def compute_subindices(ratios: RatioSet, scheme: GroupingScheme, statistic: str,
                       calibration: Calibration) -> Dict[str, Optional[float]]:
    """
    Per-group index values 1000 x stat_g / c0_g.

    Groups empty now, or empty at baseline, are reported as None.
    """
    baseline = calibration.group_c0.get(scheme.name)
    if baseline is None:
        raise DataError(f"model has no baseline calibration for the {scheme.kind} grouping")
    stats = group_stats(ratios, scheme, statistic)
    out: Dict[str, Optional[float]] = {}
    for label, s, n in zip(scheme.labels, stats.stat, stats.count):
        c0_g = baseline.get(label)
        out[label] = INDEX_BASE * float(s) / c0_g if n > 0 and c0_g else None
    return out


def recombine_subindices(subindices: Dict[str, Optional[float]], weights: Sequence[float],
                         calibration: Calibration) -> float:
    """Headline rebuilt from carat-class sub-indices, their baseline constants and weights."""
    group_c0 = calibration.group_c0["carat_class"]
    terms = [w * (subindices[label] / INDEX_BASE) * group_c0[label]
             for label, w in zip(CARAT_CLASSES.labels, weights) if w > 0]
    return INDEX_BASE * math.fsum(terms) / calibration.c0


def calibrate(predictor: Model, baseline: Snapshot, statistic: str = "mean", weighting: str = "final",
              schemes: Sequence[GroupingScheme] = tuple(SCHEMES.values())) -> BaselinePredictor:
    """
    Compute the baseline constants that put the index at exactly 1000 on the baseline.

    Args:
        predictor: fitted model
        baseline (Snapshot): the snapshot the model was fitted on
        statistic (str): "mean" or "median"
        weighting (str): weighting policy
        schemes: groupings that get per-group constants

    Returns:
        BaselinePredictor: the predictor with this calibration attached
    """
    predictor = as_predictor(predictor)
    ratios = compute_ratios(baseline, predictor)
    stats = group_stats(ratios, CARAT_CLASSES, statistic)
    weights = policy_weights(stats.total_value, weighting, CARAT_CLASSES.labels)
    w, _ = effective_weights(weights.values, stats.nonempty)
    group_c0 = {scheme.name: group_stats(ratios, scheme, statistic).stat_or_none() for scheme in schemes}
    group_c0[CARAT_CLASSES.name] = stats.stat_or_none()
    calibration = Calibration(
        statistic=statistic,
        weighting=weighting,
        baseline_date=baseline.date,
        c0=weighted_sum(stats.stat, w),
        weights=tuple(float(x) for x in w),
        group_c0=group_c0,
    )
    logger.info("Calibrated %s/%s at %s: c0=%.6f", statistic, weighting, baseline.date, calibration.c0)
    return predictor.with_calibration(calibration)


def index_point(snapshot: Snapshot, predictor: BaselinePredictor, statistic: str = "mean",
                frozen_weights: bool = False,
                schemes: Sequence[GroupingScheme] = (CARAT_CLASSES,)) -> IndexPoint:
    """
    Score one snapshot end to end: ratios, group statistics, weights, headline and sub-indices.

    Per-snapshot weights follow the weighting policy the predictor was
    calibrated with; frozen weights reuse the baseline weights.
    """
    calibration = predictor.calibration(statistic)
    ratios = compute_ratios(snapshot, predictor)
    stats = group_stats(ratios, CARAT_CLASSES, statistic)
    if frozen_weights:
        weights = WeightVector(CARAT_CLASSES.labels, calibration.weights)
    else:
        weights = policy_weights(stats.total_value, calibration.weighting, CARAT_CLASSES.labels)
    point = compute_hci(stats, weights, calibration.c0, snapshot.date)
    subindices = {scheme.name: compute_subindices(ratios, scheme, statistic, calibration)
                  for scheme in schemes}
    return replace(point, subindices=subindices, n_rejected=ratios.n_rejected)


# ===== Series =====

@dataclass(frozen=True)
class IndexSeries:
    """Dated index points plus the settings that produced them."""
    points: Tuple[IndexPoint, ...]
    model_id: str = ""
    weighting: str = "final"
    statistic: str = "mean"
    smoothing: str = "none"
    base_date: Optional[date] = None
    change_points: Tuple[date, ...] = ()

    def __post_init__(self):
        dates = [p.date for p in self.points]
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise DataError("index dates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dates(self) -> List[date]:
        return [p.date for p in self.points]

    @property
    def headline(self) -> np.ndarray:
        return np.array([p.headline for p in self.points], dtype=float)

    def value_at(self, on: date) -> float:
        for p in self.points:
            if p.date == on:
                return p.headline
        raise DataError(f"no index value on {on.isoformat()}")

    def subindex(self, scheme: str, label: str) -> np.ndarray:
        values = [p.subindices.get(scheme, {}).get(label) for p in self.points]
        return np.array([np.nan if v is None else v for v in values], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for p in self.points:
            classes = p.subindices.get(CARAT_CLASSES.name, {})
            row = {"date": p.date.isoformat(), "headline": p.headline}
            for g in CARAT_CLASSES.labels:
                value = classes.get(g)
                row[f"group_{g}_subindex"] = np.nan if value is None else value
            row.update({"statistic": self.statistic, "smoothing": self.smoothing, "model_id": self.model_id})
            rows.append(row)
        return pd.DataFrame(rows, columns=INDEX_COLUMNS)

    def to_csv(self, destination) -> None:
        self.to_frame().to_csv(destination, index=False, lineterminator="\n")

    def to_jsonl(self) -> str:
        lines = []
        for record in self.to_frame().to_dict(orient="records"):
            clean = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in record.items()}
            lines.append(json.dumps(clean))
        return "\n".join(lines) + ("\n" if lines else "")

    def subindex_frame(self, scheme: GroupingScheme) -> pd.DataFrame:
        """Wide table of one scheme's sub-indices: date plus one column per group."""
        frame = pd.DataFrame({"date": [d.isoformat() for d in self.dates]})
        for label in scheme.labels:
            frame[label] = self.subindex(scheme.name, label)
        return frame


def read_index_csv(path: Union[str, Path]) -> IndexSeries:
    """Read an index CSV written by ``IndexSeries.to_csv``."""
    frame = pd.read_csv(path, dtype={"statistic": str, "smoothing": str, "model_id": str},
                        keep_default_na=True)
    missing = [c for c in INDEX_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing column(s): {', '.join(missing)}")
    points = []
    for k, row in frame.iterrows():
        try:
            on = date.fromisoformat(str(row["date"]))
            headline = float(row["headline"])
        except ValueError:
            raise DataError(f"{path}: line {k + 2}: unparseable date or headline")
        classes = {g: (None if pd.isna(row[f"group_{g}_subindex"]) else float(row[f"group_{g}_subindex"]))
                   for g in CARAT_CLASSES.labels}
        points.append(IndexPoint(date=on, headline=headline, statistic=str(row["statistic"]),
                                 subindices={CARAT_CLASSES.name: classes}))
    if not points:
        raise DataError(f"{path}: no index rows")
    first = frame.iloc[0].fillna("")
    return IndexSeries(points=tuple(points), model_id=str(first["model_id"]),
                       statistic=str(first["statistic"]) or "mean",
                       smoothing=str(first["smoothing"]) or "none", base_date=points[0].date)


def build_index_series(snapshots: Sequence[Snapshot], predictor: BaselinePredictor, statistic: str = "mean",
                       frozen_weights: bool = False,
                       schemes: Sequence[GroupingScheme] = (CARAT_CLASSES,),
                       model_id: str = "", n_jobs: int = 1, progress: bool = False) -> IndexSeries:
    """
    Compute one index point per snapshot.

    Snapshots are scored independently (in parallel when ``n_jobs`` > 1) and
    assembled in date order.
    """
    dates = [s.date for s in snapshots]
    if len(set(dates)) != len(dates):
        raise DataError("two snapshots share a date")
    ordered = sorted(snapshots, key=lambda s: s.date)
    work = ordered
    if progress:
        from tqdm import tqdm
        work = tqdm(ordered, desc="snapshots", unit="snapshot")
    points = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(index_point)(s, predictor, statistic, frozen_weights, schemes) for s in work)
    calibration = predictor.calibration(statistic)
    return IndexSeries(points=tuple(points), model_id=model_id, weighting=calibration.weighting,
                       statistic=statistic, base_date=calibration.baseline_date)


def smooth_series(series: IndexSeries, method: str = "none", lam: Optional[float] = None) -> IndexSeries:
    """
    Smooth the headline.

    ``ewma``: s_1 = x_1, s_t = lam * x_t + (1 - lam) * s_{t-1}; ``none`` returns
    the series unchanged.
    """
    if method == "none":
        return series
    if method != "ewma":
        raise ConfigError(f"unknown smoothing method {method!r}")
    if lam is None or not 0.0 < lam <= 1.0:
        raise ConfigError("EWMA smoothing needs 0 < lambda <= 1")
    smoothed = []
    level = None
    for point in series.points:
        level = point.headline if level is None else lam * point.headline + (1.0 - lam) * level
        smoothed.append(replace(point, headline=level))
    return replace(series, points=tuple(smoothed), smoothing=f"ewma({lam:g})")


def splice_series(old: IndexSeries, new: IndexSeries, link_date: date) -> IndexSeries:
    """
    Chain a re-based series onto its predecessor at ``link_date``.

    The new headline is scaled by old(link) / new(link); the output is the old
    series up to and including the link date followed by the scaled new series.
    Sub-indices keep their own baselines and are not rescaled.
    """
    factor = old.value_at(link_date) / new.value_at(link_date)
    head = [p for p in old.points if p.date <= link_date]
    tail = [replace(p, headline=p.headline * factor) for p in new.points if p.date > link_date]
    change_points = tuple(sorted(set(old.change_points) | set(new.change_points) | {link_date}))
    logger.info("Spliced at %s with factor %.6f", link_date, factor)
    return replace(new, points=tuple(head + tail), change_points=change_points,
                   base_date=old.base_date or new.base_date)


@dataclass(frozen=True)
class Alignment:
    """An external series mapped onto the index scale by ``intercept + slope * value``."""
    series: ExternalSeries
    intercept: float
    slope: float
    n_overlap: int


def align_series_for_comparison(target: IndexSeries, other: ExternalSeries) -> Alignment:
    """
    Rescale and re-centre another series so its mean and standard deviation over
    the common period match the index's.

    Each index date is paired with the other series' latest value on or before
    it, so daily market data can be compared with a weekly index.
    """
    target_frame = pd.DataFrame({"date": pd.to_datetime(target.dates), "target": target.headline})
    other_frame = pd.DataFrame({"date": pd.to_datetime(list(other.dates)), "other": list(other.values)})
    if other_frame.empty or target_frame.empty:
        raise DataError("no overlapping dates")
    start, end = other_frame["date"].iloc[0], other_frame["date"].iloc[-1]
    window = target_frame[(target_frame["date"] >= start) & (target_frame["date"] <= end)]
    paired = pd.merge_asof(window, other_frame, on="date", direction="backward")
    if len(paired) < 2:
        raise DataError("no overlapping dates (need at least two common points)")

    other_sd = float(np.std(paired["other"].to_numpy(), ddof=1))
    if not other_sd > 0:
        raise DataError(f"{other.name}: zero variance over the overlap")
    target_sd = float(np.std(paired["target"].to_numpy(), ddof=1))
    slope = target_sd / other_sd
    intercept = float(paired["target"].mean()) - slope * float(paired["other"].mean())
    mapped = ExternalSeries(name=other.name, dates=other.dates,
                            values=tuple(intercept + slope * v for v in other.values))
    return Alignment(series=mapped, intercept=intercept, slope=slope, n_overlap=len(paired))


def main():
    """Print the weights for the published group totals."""
    totals = (120, 526, 1136, 591, 419, 157, 813)
    proportional = weights_from_totals(totals)
    final = final_weights(proportional)
    table = pd.DataFrame({"group": CARAT_CLASSES.labels, "total_musd": totals,
                          "proportional": proportional.values, "final": final.values})
    print(table.round(4).to_string(index=False))


if __name__ == "__main__":
    main()
