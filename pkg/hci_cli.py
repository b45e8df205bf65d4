#!/usr/bin/env python3
"""
Command-line interface: ``generate``, ``fit``, ``index``, ``subindex``, ``ci``,
``forecast``, ``scenario``, ``splice``, ``compare`` and ``weights``.

Outputs are staged in memory and written only when a command succeeds,
together with a ``manifest.json`` describing inputs, settings and versions.
Exit codes: 0 success, 1 usage error, 2 data or configuration error,
3 internal error.
"""

import hashlib
import io
import json
import logging
import platform
import sys
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence

try:  # typer >= 0.26 vendors click; its exceptions live in typer._click
    from typer import _click as click
except ImportError:
    import click
import pandas as pd
import typer
from pydantic import BaseModel, ValidationError

from diamond_data import (
    DEFAULT_MAX_REJECTION_RATE,
    ConfigError,
    DataError,
    import_external_series,
    parse_snapshot_csv,
    write_snapshot_csv,
)
from hci_logging import configure_logging, progress_enabled
from hedonic_index import (
    CARAT_CLASSES,
    INDEX_BASE,
    INDEX_CSV_SCHEMA_VERSION,
    SCHEMES,
    align_series_for_comparison,
    build_index_series,
    calibrate,
    compute_ratios,
    group_stats,
    index_point,
    read_index_csv,
    scheme_by_name,
    smooth_series,
    splice_series,
    weight_table,
)
from index_forecast import fit_ar_diff, fit_holt, forecast_ar, forecast_dates, forecast_holt, select_ar_order
from index_inference import DEFAULT_REPLICATES, bootstrap_ci, hci_variance, normal_ci, percentile_t_ci
from market_scenarios import load_experiment_config, report_to_plotdata, run_experiment, run_replicates
from price_models import (
    MODEL_SCHEMA_VERSION,
    ForestParams,
    compare_predictors,
    fit_forest,
    fit_linear,
    load_model,
    model_json,
)
from synthetic_market import (
    GeneratorConfig,
    generate_series,
    load_generator_config,
    load_scenario_spec,
    snapshot_dates,
)

__version__ = "0.1.0"

logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, no_args_is_help=True,
                  help="Hedonic price index for wholesale diamonds.")


class Statistic(str, Enum):
    mean = "mean"
    median = "median"


class Weighting(str, Enum):
    final = "final"
    proportional = "proportional"
    equal = "equal"


class ModelKind(str, Enum):
    linear = "linear"
    forest = "forest"


class Smoothing(str, Enum):
    none = "none"
    ewma = "ewma"


class IntervalMethod(str, Enum):
    all = "all"
    normal = "normal"
    bootstrap = "bootstrap"
    percentile_t = "percentile-t"


class ForecastMethod(str, Enum):
    holt = "holt"
    ar = "ar"


class RunConfig(BaseModel):
    """Everything that determines a run's outputs; hashed into the manifest."""
    subcommand: str
    inputs: List[str] = []
    outputs: List[str] = []
    config_path: Optional[str] = None
    seed: Optional[int] = None
    verbosity: int = 0
    weighting: Optional[str] = None
    statistic: Optional[str] = None
    smoothing: Optional[str] = None
    options: Dict[str, object] = {}


@dataclass
class CliState:
    argv: List[str] = field(default_factory=list)
    threads: int = 1
    verbosity: int = 0


# ===== Helpers =====

def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _library_versions() -> Dict[str, str]:
    import joblib
    import numpy
    import pandas
    import scipy
    import sklearn
    import statsmodels
    return {"hci": __version__, "python": platform.python_version(), "numpy": numpy.__version__,
            "pandas": pandas.__version__, "scipy": scipy.__version__, "scikit-learn": sklearn.__version__,
            "statsmodels": statsmodels.__version__, "joblib": joblib.__version__}


def _finish(state: CliState, run: RunConfig, outputs: Dict[Path, str], manifest_dir: Path) -> None:
    """
    Write staged outputs and the manifest.

    The manifest holds only what determines the outputs, so it is byte-identical
    for any ``--threads``; the thread count and raw arguments go to the log.
    """
    logger.info("hci %s with %d thread(s)", " ".join(state.argv), state.threads)
    run = run.model_copy(update={"outputs": [str(p) for p in outputs]})
    config_text = run.model_dump_json()
    input_paths = [Path(p) for p in run.inputs]
    if run.config_path:
        input_paths.append(Path(run.config_path))
    manifest = {
        "command": run.subcommand,
        "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in input_paths],
        "config_sha256": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
        "run_config": json.loads(config_text),
        "seed": run.seed,
        "versions": _library_versions(),
        "schema_versions": {"model": MODEL_SCHEMA_VERSION, "index_csv": INDEX_CSV_SCHEMA_VERSION},
    }
    for path, text in outputs.items():
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("Wrote %s", path)
    manifest["outputs"] = [{"path": str(p), "sha256": _sha256(p)} for p in outputs]
    manifest_dir.mkdir(parents=True, exist_ok=True)
    (manifest_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                                encoding="utf-8")


def _csv_text(frame) -> str:
    return frame.to_csv(index=False, lineterminator="\n")


def _read_snapshots(paths: Sequence[Path], snapshot_date: Optional[date], max_rejection_rate: float):
    if snapshot_date is not None and len(paths) > 1:
        raise typer.BadParameter("--date applies to a single snapshot file")
    return [parse_snapshot_csv(p, snapshot_date, max_rejection_rate) for p in paths]


def _parse_date(value: Optional[str], name: str) -> Optional[date]:
    if value is None:
        return None
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise typer.BadParameter(f"{value!r} is not an ISO date (YYYY-MM-DD)", param_hint=name)


def _model_id(path: Path) -> str:
    return _sha256(path)[:12]


def _predictor_for(model_path: Path, statistic: str, weighting: Optional[str], baseline: Optional[Path],
                   max_rejection_rate: float):
    predictor = load_model(model_path)
    if baseline is not None:
        snapshot = parse_snapshot_csv(baseline, max_rejection_rate=max_rejection_rate)
        predictor = calibrate(predictor, snapshot, statistic, weighting or "final")
    elif weighting is not None and predictor.calibration(statistic).weighting != weighting:
        raise DataError(f"model was calibrated with {predictor.calibration(statistic).weighting} weights; "
                        f"pass --baseline to recalibrate with {weighting} weights")
    return predictor


# ===== Commands =====

def _show_version(value: bool) -> None:
    if value:
        typer.echo(f"hci {__version__} (model schema {MODEL_SCHEMA_VERSION}, "
                   f"index csv schema {INDEX_CSV_SCHEMA_VERSION})")
        raise typer.Exit()


@app.callback()
def cli(ctx: typer.Context,
        verbose: int = typer.Option(0, "--verbose", "-v", count=True, help="-v progress, -vv debug"),
        threads: int = typer.Option(1, "--threads", min=1, help="parallel workers; outputs do not depend on it"),
        version: Optional[bool] = typer.Option(None, "--version", callback=_show_version, is_eager=True,
                                               help="print versions and exit")):
    configure_logging(verbose)
    state = ctx.ensure_object(CliState)
    state.threads = threads
    state.verbosity = verbose


@app.command()
def generate(ctx: typer.Context,
             out: Path = typer.Option(..., "--out", help="output directory"),
             seed: int = typer.Option(..., "--seed", min=0),
             config: Optional[Path] = typer.Option(None, "--config", exists=True, dir_okay=False),
             scenario: Optional[Path] = typer.Option(None, "--scenario", exists=True, dir_okay=False),
             start: str = typer.Option("2022-01-03", "--start"),
             snapshots: int = typer.Option(13, "--snapshots", min=1),
             interval: int = typer.Option(7, "--interval", min=1, help="days between snapshots")):
    """Generate synthetic snapshots and the ground-truth index path."""
    state: CliState = ctx.obj
    generator = load_generator_config(config) if config else GeneratorConfig()
    generator = generator.model_copy(update={"seed": seed})
    spec = load_scenario_spec(scenario) if scenario else None
    dates = snapshot_dates(_parse_date(start, "--start"), snapshots, interval)
    series, path = generate_series(generator, dates, spec, n_jobs=state.threads)

    outputs: Dict[Path, str] = {}
    for snapshot in series:
        buffer = io.StringIO()
        write_snapshot_csv(snapshot, buffer)
        outputs[out / f"snapshot_{snapshot.date.isoformat()}.csv"] = buffer.getvalue()
    outputs[out / "true_path.csv"] = _csv_text(pd.DataFrame({"date": [d.isoformat() for d in path.dates],
                                                             "value": list(path.values)}))
    run = RunConfig(subcommand="generate", inputs=[str(p) for p in (scenario,) if p],
                    config_path=str(config) if config else None, seed=seed, verbosity=state.verbosity,
                    options={"start": start, "snapshots": snapshots, "interval": interval})
    _finish(state, run, outputs, out)


@app.command()
def fit(ctx: typer.Context,
        snapshot: Path = typer.Argument(..., exists=True, dir_okay=False),
        out: Path = typer.Option(..., "--out", help="model JSON file"),
        model: ModelKind = typer.Option(ModelKind.linear, "--model"),
        seed: Optional[int] = typer.Option(None, "--seed", min=0),
        weighting: Weighting = typer.Option(Weighting.final, "--weighting"),
        snapshot_date: Optional[str] = typer.Option(None, "--date"),
        holdout: Optional[Path] = typer.Option(None, "--holdout", exists=True, dir_okay=False),
        trees: int = typer.Option(100, "--trees", min=1),
        max_depth: int = typer.Option(12, "--max-depth", min=0),
        min_leaf: int = typer.Option(20, "--min-leaf", min=1),
        bag_fraction: float = typer.Option(0.7, "--bag-fraction", min=0.0, max=1.0),
        max_rejection_rate: float = typer.Option(DEFAULT_MAX_REJECTION_RATE, "--max-rejection-rate")):
    """Fit the baseline predictor and calibrate the index on the baseline snapshot."""
    state: CliState = ctx.obj
    if (model == ModelKind.forest or holdout is not None) and seed is None:
        raise typer.BadParameter("forest fitting is randomised: --seed is required", param_hint="--seed")
    baseline = parse_snapshot_csv(snapshot, _parse_date(snapshot_date, "--date"), max_rejection_rate)
    params = ForestParams(n_trees=trees, max_depth=max_depth, min_leaf=min_leaf,
                          bag_fraction=bag_fraction, seed=seed or 0)
    if model == ModelKind.linear:
        fitted = fit_linear(baseline)
    else:
        fitted = fit_forest(baseline, params, n_jobs=state.threads, progress=progress_enabled())
    predictor = fitted
    for statistic in Statistic:
        predictor = calibrate(predictor, baseline, statistic.value, weighting.value)

    outputs = {out: model_json(predictor)}
    inputs = [str(snapshot)]
    if holdout is not None:
        report = compare_predictors(baseline, parse_snapshot_csv(holdout, max_rejection_rate=max_rejection_rate),
                                    params, n_jobs=state.threads)
        typer.echo(report.to_string(index=False))
        outputs[out.with_name(out.stem + "_holdout.csv")] = _csv_text(report)
        inputs.append(str(holdout))
    run = RunConfig(subcommand="fit", inputs=inputs, seed=seed, verbosity=state.verbosity,
                    weighting=weighting.value, options={"model": model.value, **params.model_dump()})
    _finish(state, run, outputs, out.parent)


@app.command()
def index(ctx: typer.Context,
          snapshots: List[Path] = typer.Argument(..., exists=True, dir_okay=False),
          model: Path = typer.Option(..., "--model", exists=True, dir_okay=False),
          out: Path = typer.Option(..., "--out", help="index CSV; a .jsonl twin is written beside it"),
          statistic: Statistic = typer.Option(Statistic.mean, "--statistic"),
          weighting: Optional[Weighting] = typer.Option(None, "--weighting"),
          frozen_weights: bool = typer.Option(False, "--frozen-weights", help="hold baseline weights fixed"),
          smoothing: Smoothing = typer.Option(Smoothing.none, "--smoothing"),
          lam: Optional[float] = typer.Option(None, "--lambda", help="EWMA parameter in (0, 1]"),
          baseline: Optional[Path] = typer.Option(None, "--baseline", exists=True, dir_okay=False,
                                                  help="recalibrate on this snapshot"),
          snapshot_date: Optional[str] = typer.Option(None, "--date"),
          max_rejection_rate: float = typer.Option(DEFAULT_MAX_REJECTION_RATE, "--max-rejection-rate")):
    """Score snapshots against a fitted model and write the index series."""
    state: CliState = ctx.obj
    if smoothing == Smoothing.ewma and lam is None:
        raise typer.BadParameter("--smoothing ewma needs --lambda", param_hint="--lambda")
    predictor = _predictor_for(model, statistic.value, weighting.value if weighting else None, baseline,
                               max_rejection_rate)
    scored = _read_snapshots(snapshots, _parse_date(snapshot_date, "--date"), max_rejection_rate)
    series = build_index_series(scored, predictor, statistic.value, frozen_weights, (CARAT_CLASSES,),
                                model_id=_model_id(model), n_jobs=state.threads, progress=progress_enabled())
    series = smooth_series(series, smoothing.value, lam)
    for point in series.points:
        for warning in point.warnings:
            logger.info("%s: %s", point.date, warning)

    buffer = io.StringIO()
    series.to_csv(buffer)
    outputs = {out: buffer.getvalue(), out.with_suffix(".jsonl"): series.to_jsonl()}
    inputs = [str(p) for p in snapshots] + [str(model)] + ([str(baseline)] if baseline else [])
    run = RunConfig(subcommand="index", inputs=inputs, verbosity=state.verbosity,
                    weighting=series.weighting, statistic=statistic.value, smoothing=series.smoothing,
                    options={"frozen_weights": frozen_weights})
    _finish(state, run, outputs, out.parent)


@app.command()
def subindex(ctx: typer.Context,
             snapshots: List[Path] = typer.Argument(..., exists=True, dir_okay=False),
             model: Path = typer.Option(..., "--model", exists=True, dir_okay=False),
             out: Path = typer.Option(..., "--out"),
             scheme: str = typer.Option("carat_class", "--scheme",
                                        help=f"one of {', '.join(SCHEMES)}"),
             statistic: Statistic = typer.Option(Statistic.mean, "--statistic"),
             snapshot_date: Optional[str] = typer.Option(None, "--date"),
             max_rejection_rate: float = typer.Option(DEFAULT_MAX_REJECTION_RATE, "--max-rejection-rate")):
    """Write per-group sub-indices (carat class, shape, colour or clarity)."""
    state: CliState = ctx.obj
    grouping = scheme_by_name(scheme)
    predictor = load_model(model)
    scored = _read_snapshots(snapshots, _parse_date(snapshot_date, "--date"), max_rejection_rate)
    series = build_index_series(scored, predictor, statistic.value, schemes=(grouping,),
                                model_id=_model_id(model), n_jobs=state.threads, progress=progress_enabled())
    outputs = {out: _csv_text(series.subindex_frame(grouping))}
    run = RunConfig(subcommand="subindex", inputs=[str(p) for p in snapshots] + [str(model)],
                    verbosity=state.verbosity, statistic=statistic.value, options={"scheme": grouping.name})
    _finish(state, run, outputs, out.parent)


@app.command()
def ci(ctx: typer.Context,
       snapshot: Path = typer.Argument(..., exists=True, dir_okay=False),
       model: Path = typer.Option(..., "--model", exists=True, dir_okay=False),
       out: Path = typer.Option(..., "--out", help="JSON file"),
       seed: Optional[int] = typer.Option(None, "--seed", min=0),
       method: IntervalMethod = typer.Option(IntervalMethod.all, "--method"),
       level: float = typer.Option(0.95, "--level"),
       replicates: int = typer.Option(DEFAULT_REPLICATES, "--replicates", "-B", min=1),
       statistic: Statistic = typer.Option(Statistic.mean, "--statistic"),
       frozen_weights: bool = typer.Option(False, "--frozen-weights"),
       baseline: Optional[Path] = typer.Option(None, "--baseline", exists=True, dir_okay=False,
                                               help="the calibration snapshot; adds the sampling error of c0"),
       snapshot_date: Optional[str] = typer.Option(None, "--date"),
       max_rejection_rate: float = typer.Option(DEFAULT_MAX_REJECTION_RATE, "--max-rejection-rate")):
    """Confidence intervals for one snapshot's headline index."""
    state: CliState = ctx.obj
    if method != IntervalMethod.normal and seed is None:
        raise typer.BadParameter("bootstrap intervals are randomised: --seed is required", param_hint="--seed")
    predictor = load_model(model)
    scored = parse_snapshot_csv(snapshot, _parse_date(snapshot_date, "--date"), max_rejection_rate)
    calibration = predictor.calibration(statistic.value)
    point = index_point(scored, predictor, statistic.value, frozen_weights)
    ratios = compute_ratios(scored, predictor)
    scale = INDEX_BASE / calibration.c0
    base_ratios = None
    if baseline is not None:
        base_ratios = compute_ratios(parse_snapshot_csv(baseline, max_rejection_rate=max_rejection_rate), predictor)
    base_groups = base_ratios.by_group(CARAT_CLASSES) if base_ratios is not None else None

    intervals = []
    if method in (IntervalMethod.all, IntervalMethod.normal):
        base_stats = group_stats(base_ratios, CARAT_CLASSES, statistic.value) if base_ratios is not None else None
        variance = hci_variance(group_stats(ratios, CARAT_CLASSES, statistic.value), point.weights, scale,
                                base_stats, calibration.weights)
        intervals.append(normal_ci(point.headline, variance, level))
    groups = ratios.by_group(CARAT_CLASSES)
    if method in (IntervalMethod.all, IntervalMethod.bootstrap):
        intervals.append(bootstrap_ci(groups, point.weights, scale, level, replicates, seed,
                                      statistic.value, n_jobs=state.threads,
                                      baseline_groups=base_groups, baseline_weights=calibration.weights))
    if method in (IntervalMethod.all, IntervalMethod.percentile_t):
        intervals.append(percentile_t_ci(groups, point.weights, scale, level, replicates, seed,
                                         statistic.value, n_jobs=state.threads,
                                         baseline_groups=base_groups, baseline_weights=calibration.weights))
    records = [dict(interval.to_dict(), headline=point.headline) for interval in intervals]
    document = records[0] if len(records) == 1 else records
    outputs = {out: json.dumps(document, indent=2) + "\n"}
    inputs = [str(snapshot), str(model)] + ([str(baseline)] if baseline else [])
    run = RunConfig(subcommand="ci", inputs=inputs, seed=seed, verbosity=state.verbosity,
                    statistic=statistic.value,
                    options={"method": method.value, "level": level, "B": replicates, "frozen": frozen_weights})
    _finish(state, run, outputs, out.parent)


@app.command()
def forecast(ctx: typer.Context,
             series_path: Path = typer.Argument(..., exists=True, dir_okay=False, metavar="INDEX_CSV"),
             out: Path = typer.Option(..., "--out"),
             method: ForecastMethod = typer.Option(ForecastMethod.holt, "--method"),
             horizon: int = typer.Option(4, "--horizon", "-h", min=1),
             level: float = typer.Option(0.80, "--level"),
             p: int = typer.Option(1, "--p", min=0, max=5),
             d: int = typer.Option(1, "--d", min=0, max=2),
             select_order: bool = typer.Option(False, "--select-order", help="minimum-AICc (p, d)"),
             intercept: bool = typer.Option(True, "--intercept/--no-intercept", help="AR drift term"),
             alpha: Optional[float] = typer.Option(None, "--alpha"),
             beta: Optional[float] = typer.Option(None, "--beta"),
             interval: int = typer.Option(7, "--interval", min=1, help="days between index points")):
    """Forecast the headline index a few steps ahead."""
    state: CliState = ctx.obj
    series = read_index_csv(series_path)
    dates = forecast_dates(series.dates[-1], horizon, interval)
    if method == ForecastMethod.holt:
        result = forecast_holt(fit_holt(series.headline, alpha, beta), horizon, level, dates)
    else:
        trend = "c" if intercept else "n"
        ar = select_ar_order(series.headline, trend) if select_order else fit_ar_diff(series.headline, p, d, trend)
        result = forecast_ar(ar, horizon, level, dates)
    outputs = {out: _csv_text(result.to_frame())}
    run = RunConfig(subcommand="forecast", inputs=[str(series_path)], verbosity=state.verbosity,
                    options={"method": method.value, "horizon": horizon, "level": level, "p": p, "d": d,
                             "select_order": select_order, "intercept": intercept, "alpha": alpha, "beta": beta})
    _finish(state, run, outputs, out.parent)


@app.command()
def scenario(ctx: typer.Context,
             config: Path = typer.Option(..., "--config", exists=True, dir_okay=False),
             out: Path = typer.Option(..., "--out", help="output directory"),
             seed: int = typer.Option(..., "--seed", min=0),
             replicates: int = typer.Option(1, "--replicates", min=1)):
    """Run a synthetic market experiment and report the index against the true path."""
    state: CliState = ctx.obj
    experiment = load_experiment_config(config).model_copy(update={"seed": seed})
    outputs: Dict[Path, str] = {}
    if replicates == 1:
        report = run_experiment(experiment, n_jobs=state.threads, progress=progress_enabled())
        outputs[out / "report.json"] = json.dumps(report.to_dict(), indent=2) + "\n"
        outputs[out / "plotdata.csv"] = _csv_text(report_to_plotdata(report))
    else:
        reports = run_replicates(experiment, replicates, n_jobs=state.threads, progress=progress_enabled())
        rows = [dict(seed=r.config.seed, **r.summary) for r in reports]
        outputs[out / "replicates.csv"] = _csv_text(pd.DataFrame(rows))
    run = RunConfig(subcommand="scenario", config_path=str(config), seed=seed, verbosity=state.verbosity,
                    options={"replicates": replicates})
    _finish(state, run, outputs, out)


@app.command()
def splice(ctx: typer.Context,
           old: Path = typer.Argument(..., exists=True, dir_okay=False),
           new: Path = typer.Argument(..., exists=True, dir_okay=False),
           link_date: str = typer.Option(..., "--link-date"),
           out: Path = typer.Option(..., "--out")):
    """Chain a re-based index series onto its predecessor."""
    state: CliState = ctx.obj
    spliced = splice_series(read_index_csv(old), read_index_csv(new), _parse_date(link_date, "--link-date"))
    buffer = io.StringIO()
    spliced.to_csv(buffer)
    run = RunConfig(subcommand="splice", inputs=[str(old), str(new)], verbosity=state.verbosity,
                    options={"link_date": link_date})
    _finish(state, run, {out: buffer.getvalue()}, out.parent)


@app.command()
def compare(ctx: typer.Context,
            series_path: Path = typer.Argument(..., exists=True, dir_okay=False, metavar="INDEX_CSV"),
            external: Path = typer.Argument(..., exists=True, dir_okay=False, metavar="EXTERNAL_CSV"),
            out: Path = typer.Option(..., "--out", help="rescaled series CSV; the map goes to a .json twin")):
    """Rescale another market's series onto the index for comparison."""
    state: CliState = ctx.obj
    alignment = align_series_for_comparison(read_index_csv(series_path), import_external_series(external))
    frame = pd.DataFrame({"date": [d.isoformat() for d in alignment.series.dates],
                          "value": list(alignment.series.values)})
    mapping = {"name": alignment.series.name, "intercept": alignment.intercept, "slope": alignment.slope,
               "n_overlap": alignment.n_overlap}
    outputs = {out: _csv_text(frame), out.with_suffix(".json"): json.dumps(mapping, indent=2) + "\n"}
    run = RunConfig(subcommand="compare", inputs=[str(series_path), str(external)], verbosity=state.verbosity)
    _finish(state, run, outputs, out.parent)


@app.command()
def weights(ctx: typer.Context,
            snapshot: Path = typer.Argument(..., exists=True, dir_okay=False),
            out: Path = typer.Option(..., "--out"),
            snapshot_date: Optional[str] = typer.Option(None, "--date"),
            max_rejection_rate: float = typer.Option(DEFAULT_MAX_REJECTION_RATE, "--max-rejection-rate")):
    """Carat-class counts, values and weights of one snapshot."""
    state: CliState = ctx.obj
    table = weight_table(parse_snapshot_csv(snapshot, _parse_date(snapshot_date, "--date"), max_rejection_rate))
    typer.echo(table.to_string(index=False))
    run = RunConfig(subcommand="weights", inputs=[str(snapshot)], verbosity=state.verbosity)
    _finish(state, run, {out: _csv_text(table)}, out.parent)


# ===== Entry point =====

def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI and translate failures into exit codes.

    Args:
        argv: arguments without the program name (defaults to sys.argv[1:])

    Returns:
        int: 0 success, 1 usage error, 2 data/config error, 3 internal error
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    command = typer.main.get_command(app)
    try:
        result = command.main(args=argv, prog_name="hci", standalone_mode=False, obj=CliState(argv=argv))
        return result if isinstance(result, int) else 0
    except click.exceptions.UsageError as e:
        e.show()
        return 1
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    except (DataError, ConfigError) as e:
        logger.error("%s", e)
        return 2
    except ValidationError as e:
        logger.error("invalid configuration: %s", e)
        return 2
    except click.ClickException as e:
        e.show()
        return 1
    except Exception as e:
        logger.error("internal error: %s", e)
        logger.debug("traceback", exc_info=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
