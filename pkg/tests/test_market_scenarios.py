import json
from datetime import date

import numpy as np
import pytest
from pydantic import ValidationError

from diamond_data import SHAPES, ConfigError
from index_forecast import fit_holt, forecast_holt
from market_scenarios import (
    ExperimentConfig,
    load_experiment_config,
    report_to_plotdata,
    run_experiment,
    run_replicates,
)
from synthetic_market import GeneratorConfig, ScenarioSpec

START = date(2022, 1, 3)
NOISELESS = GeneratorConfig(n_per_snapshot=3000, noise_sd=0.0)


def _config(**overrides) -> ExperimentConfig:
    fields = dict(generator=NOISELESS, baseline_date=START, n_snapshots=15, seed=3)
    fields.update(overrides)
    return ExperimentConfig(**fields)


class TestExperiment:

    def test_no_shock_gives_a_flat_index(self):
        report = run_experiment(_config(n_snapshots=4))
        np.testing.assert_allclose(report.series.headline, 1000.0, rtol=1e-7)
        assert report.true_path.values == (1000.0,) * 5
        assert report.series.dates[0] == START

    def test_slump_is_tracked_exactly_without_noise(self):
        spec = ScenarioSpec(kind="SmallDiamondSlump", start=date(2022, 1, 17))
        report = run_experiment(_config(scenario=spec, frozen_weights=True))
        w1, w2 = report.true_path.weights[:2]
        assert report.summary["max_deviation"] < 1e-4
        assert report.summary["trough_value"] == pytest.approx(1000.0 * (1 - 0.10 * (w1 + w2)), rel=1e-7)
        # the deepest phase runs for seven snapshots from the fourth week of the shock
        assert date(2022, 2, 7) <= date.fromisoformat(report.summary["trough_date"]) <= date(2022, 3, 21)
        np.testing.assert_allclose(report.series.subindex("carat_class", "1").min(), 900.0, rtol=1e-7)
        np.testing.assert_allclose(report.series.subindex("carat_class", "2")[5], 900.0, rtol=1e-7)
        for label in "34567":
            np.testing.assert_allclose(report.series.subindex("carat_class", label), 1000.0, rtol=1e-7)

    def test_fashion_shift_moves_the_cushion_subindex(self):
        spec = ScenarioSpec(kind="FashionShift", start=date(2022, 1, 17))
        report = run_experiment(_config(scenario=spec))
        cushion = report.series.subindex("shape", "Cushion")
        np.testing.assert_allclose(cushion[:2], 1000.0, rtol=1e-7)
        np.testing.assert_allclose(cushion[2:15], 1050.0, rtol=1e-7)
        np.testing.assert_allclose(cushion[15:], 1000.0, rtol=1e-7)
        rounds = report.series.subindex("shape", "Round")
        np.testing.assert_allclose(rounds, 1000.0, rtol=1e-7)
        assert report.series.headline[2] > 1000.0

    def test_same_config_same_report(self):
        config = _config(generator=GeneratorConfig(n_per_snapshot=1500), n_snapshots=3)
        first, second = run_experiment(config), run_experiment(config, n_jobs=2)
        np.testing.assert_array_equal(first.series.headline, second.series.headline)
        assert first.series.model_id == second.series.model_id

    def test_seed_changes_the_draw(self):
        config = _config(generator=GeneratorConfig(n_per_snapshot=1500), n_snapshots=2)
        first = run_experiment(config)
        other = run_experiment(config.model_copy(update={"seed": 4}))
        assert not np.array_equal(first.series.headline, other.series.headline)

    def test_smoothing_is_applied(self):
        spec = ScenarioSpec(kind="SmallDiamondSlump", start=date(2022, 1, 17))
        raw = run_experiment(_config(scenario=spec))
        smoothed = run_experiment(_config(scenario=spec, smoothing_lambda=0.3))
        assert smoothed.series.smoothing == "ewma(0.3)"
        assert smoothed.summary["trough_value"] > raw.summary["trough_value"]

    def test_forest_predictor(self):
        config = _config(generator=GeneratorConfig(n_per_snapshot=1500), n_snapshots=2, predictor="forest",
                         forest={"n_trees": 5, "max_depth": 6})
        report = run_experiment(config)
        assert report.series.headline[0] == pytest.approx(1000.0, rel=1e-9)

    def test_report_is_json(self):
        report = run_experiment(_config(n_snapshots=2))
        doc = json.loads(json.dumps(report.to_dict()))
        assert len(doc["points"]) == 3
        assert doc["points"][0]["true_path"] == 1000.0
        assert set(doc["summary"]) == {"max_deviation", "max_relative_deviation", "trough_date",
                                       "trough_value", "peak_date", "peak_value"}

    def test_replicates_use_consecutive_seeds(self):
        reports = run_replicates(_config(n_snapshots=1), 3)
        assert [r.config.seed for r in reports] == [3, 4, 5]

    @pytest.mark.slow
    def test_noisy_slump_stays_close_to_the_truth(self):
        spec = ScenarioSpec(kind="SmallDiamondSlump", start=date(2022, 1, 17))
        config = _config(generator=GeneratorConfig(n_per_snapshot=50_000, noise_sd=0.1), scenario=spec,
                         n_snapshots=30)
        report = run_experiment(config, n_jobs=2)
        assert len(report.series.headline) == 31
        assert report.summary["max_relative_deviation"] < 0.01
        expected = np.array([1000.0] * 2 + [950.0] * 3 + [900.0] * 7 + [950.0] * 3 + [1000.0] * 16)
        for label in "12":
            np.testing.assert_allclose(report.series.subindex("carat_class", label), expected, rtol=0.01)


class TestPlotData:

    def test_one_row_per_date_and_series(self):
        report = run_experiment(_config(n_snapshots=2))
        frame = report_to_plotdata(report)
        n_series = 2 + 7 + len(SHAPES)
        assert len(frame) == 3 * n_series
        assert list(frame.columns) == ["date", "series", "value"]
        assert "shape:Cushion" in set(frame["series"])
        assert "carat_class:3" in set(frame["series"])

    def test_no_schemes(self):
        frame = report_to_plotdata(run_experiment(_config(n_snapshots=2)), schemes=[])
        assert set(frame["series"]) == {"headline", "true_path"}

    def test_forecast_overlay(self):
        report = run_experiment(_config(generator=GeneratorConfig(n_per_snapshot=1500), n_snapshots=11))
        forecast = forecast_holt(fit_holt(report.series.headline), h=2)
        frame = report_to_plotdata(report, schemes=[], forecast=forecast)
        assert (frame["series"] == "forecast_point").sum() == 2


class TestConfig:

    def test_defaults(self):
        config = ExperimentConfig()
        assert len(config.scored_dates()) == 30
        assert config.all_dates()[0] == config.baseline_date

    def test_explicit_dates(self):
        config = _config(dates=[date(2022, 2, 1), date(2022, 3, 1)])
        assert config.all_dates() == [START, date(2022, 2, 1), date(2022, 3, 1)]

    @pytest.mark.parametrize("overrides", [
        {"dates": [date(2022, 3, 1), date(2022, 2, 1)]},
        {"dates": [date(2021, 12, 1)]},
        {"subindex_schemes": ["price"]},
        {"smoothing_lambda": 0.0},
        {"predictor": "boosting"},
    ])
    def test_invalid(self, overrides):
        with pytest.raises(ValidationError):
            _config(**overrides)

    def test_load(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps({"n_snapshots": 4, "seed": 7,
                                    "scenario": {"kind": "FashionShift", "start": "2022-01-17"}}),
                        encoding="utf-8")
        config = load_experiment_config(path)
        assert config.seed == 7
        assert config.scenario.kind == "FashionShift"
        path.write_text(json.dumps({"n_snapshots": 0}), encoding="utf-8")
        with pytest.raises(ConfigError):
            load_experiment_config(path)
