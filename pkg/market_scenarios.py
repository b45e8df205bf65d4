#!/usr/bin/env python3
"""
End-to-end market experiments: generate a synthetic baseline, fit the
predictor, run a scripted shock through the generator, compute the index
and compare it with the generator's ground truth.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, model_validator

from diamond_data import ConfigError
from hedonic_index import (
    CARAT_CLASSES,
    IndexSeries,
    build_index_series,
    calibrate,
    scheme_by_name,
    smooth_series,
)
from index_forecast import ForecastResult
from price_models import ForestParams, fit_forest, fit_linear, model_json
from synthetic_market import GeneratorConfig, ScenarioSpec, TrueIndexPath, generate_series, snapshot_dates

logger = logging.getLogger(__name__)


class ExperimentConfig(BaseModel):
    """One experiment: generator, dates, shock and index settings."""
    generator: GeneratorConfig = GeneratorConfig()
    baseline_date: date = date(2022, 1, 3)
    n_snapshots: int = Field(default=30, ge=1)
    dates: Optional[List[date]] = None
    interval_days: int = Field(default=7, ge=1)
    scenario: Optional[ScenarioSpec] = None
    predictor: Literal["linear", "forest"] = "linear"
    forest: ForestParams = ForestParams()
    weighting: Literal["final", "proportional", "equal"] = "final"
    frozen_weights: bool = False
    statistic: Literal["mean", "median"] = "mean"
    smoothing_lambda: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)
    subindex_schemes: List[str] = ["carat_class", "shape"]

    @model_validator(mode="after")
    def _check(self):
        if self.dates is not None:
            if not self.dates:
                raise ValueError("dates must not be empty")
            if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
                raise ValueError("dates must be strictly increasing")
            if self.dates[0] <= self.baseline_date:
                raise ValueError("the baseline date must precede every scored date")
        for name in self.subindex_schemes:
            scheme_by_name(name)
        return self

    def scored_dates(self) -> List[date]:
        if self.dates is not None:
            return list(self.dates)
        return snapshot_dates(self.baseline_date, self.n_snapshots + 1, self.interval_days)[1:]

    def all_dates(self) -> List[date]:
        return [self.baseline_date] + self.scored_dates()


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    config: ExperimentConfig
    series: IndexSeries
    true_path: TrueIndexPath
    tracking_error: np.ndarray
    summary: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        points = [{
            "date": p.date.isoformat(),
            "headline": p.headline,
            "true_path": truth,
            "tracking_error": float(err),
            "weights": list(p.weights),
            "subindices": p.subindices,
            "warnings": list(p.warnings),
        } for p, truth, err in zip(self.series.points, self.true_path.values, self.tracking_error)]
        return {
            "config": self.config.model_dump(mode="json"),
            "model_id": self.series.model_id,
            "statistic": self.series.statistic,
            "weighting": self.series.weighting,
            "smoothing": self.series.smoothing,
            "base_date": self.series.base_date.isoformat() if self.series.base_date else None,
            "true_path_weights": list(self.true_path.weights),
            "summary": self.summary,
            "points": points,
        }


def _summary(series: IndexSeries, path: TrueIndexPath, tracking: np.ndarray) -> Dict[str, object]:
    headline = series.headline
    dates = series.dates
    trough, peak = int(np.argmin(headline)), int(np.argmax(headline))
    relative = tracking / np.asarray(path.values)
    return {
        "max_deviation": float(tracking.max()),
        "max_relative_deviation": float(relative.max()),
        "trough_date": dates[trough].isoformat(),
        "trough_value": float(headline[trough]),
        "peak_date": dates[peak].isoformat(),
        "peak_value": float(headline[peak]),
    }


def run_experiment(config: ExperimentConfig, n_jobs: int = 1, progress: bool = False) -> ExperimentReport:
    """
    Generate, fit at the baseline, score every date and compare with the true path.

    The experiment seed drives the generator (and the forest), so a report is
    fully determined by its config.

    Args:
        config (ExperimentConfig): experiment definition
        n_jobs (int): parallel workers
        progress (bool): show progress bars

    Returns:
        ExperimentReport
    """
    generator = config.generator.model_copy(update={"seed": config.seed})
    snapshots, path = generate_series(generator, config.all_dates(), config.scenario, n_jobs=n_jobs)
    baseline = snapshots[0]

    if config.predictor == "linear":
        model = fit_linear(baseline)
    else:
        model = fit_forest(baseline, config.forest.model_copy(update={"seed": config.seed}), n_jobs=n_jobs)
    schemes = [scheme_by_name(name) for name in config.subindex_schemes]
    if CARAT_CLASSES not in schemes:
        schemes.insert(0, CARAT_CLASSES)
    predictor = calibrate(model, baseline, config.statistic, config.weighting, schemes)
    model_id = hashlib.sha256(model_json(predictor).encode("utf-8")).hexdigest()[:12]

    series = build_index_series(snapshots, predictor, config.statistic, config.frozen_weights, schemes,
                                model_id=model_id, n_jobs=n_jobs, progress=progress)
    if config.smoothing_lambda is not None:
        series = smooth_series(series, "ewma", config.smoothing_lambda)

    tracking = np.abs(series.headline - np.asarray(path.values))
    report = ExperimentReport(config=config, series=series, true_path=path, tracking_error=tracking,
                              summary=_summary(series, path, tracking))
    logger.info("Experiment seed %d: max tracking error %.3f", config.seed, report.summary["max_deviation"])
    return report


def run_replicates(config: ExperimentConfig, n: int, n_jobs: int = 1,
                   progress: bool = False) -> List[ExperimentReport]:
    """Repeat an experiment with seeds seed, seed + 1, ..., seed + n - 1."""
    seeds = range(config.seed, config.seed + n)
    if progress:
        from tqdm import tqdm
        seeds = tqdm(seeds, desc="replicates", unit="run")
    return [run_experiment(config.model_copy(update={"seed": s}), n_jobs=n_jobs) for s in seeds]


def report_to_plotdata(report: ExperimentReport, schemes: Optional[Sequence[str]] = None,
                       forecast: Optional[ForecastResult] = None) -> pd.DataFrame:
    """
    Long-format table (date, series, value) for plotting.

    Covers the headline, the true path, every sub-index of the selected
    schemes (all reported schemes by default) and optional forecast overlays.
    """
    if schemes is None:
        schemes = list(report.config.subindex_schemes)
    dates = [d.isoformat() for d in report.series.dates]
    columns = {"headline": list(report.series.headline), "true_path": list(report.true_path.values)}
    for name in schemes:
        scheme = scheme_by_name(name)
        for label in scheme.labels:
            columns[f"{scheme.name}:{label}"] = list(report.series.subindex(scheme.name, label))

    rows = [{"date": d, "series": name, "value": values[k]}
            for name, values in columns.items() for k, d in enumerate(dates)]
    if forecast is not None:
        forecast_dates = [d.isoformat() for d in forecast.dates] or [""] * forecast.horizon
        for name, values in (("forecast_point", forecast.point), ("forecast_lower", forecast.lower),
                             ("forecast_upper", forecast.upper)):
            rows += [{"date": d, "series": name, "value": v} for d, v in zip(forecast_dates, values)]
    return pd.DataFrame(rows, columns=["date", "series", "value"])


def main():
    """Run the small-diamond slump on a reduced market and print the summary."""
    config = ExperimentConfig(
        generator=GeneratorConfig(n_per_snapshot=5000),
        n_snapshots=16,
        scenario=ScenarioSpec(kind="SmallDiamondSlump", start=date(2022, 1, 17)),
    )
    report = run_experiment(config)
    print(json.dumps(report.summary, indent=2))


if __name__ == "__main__":
    main()
