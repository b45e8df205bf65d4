import hashlib
import json
from datetime import date

import pandas as pd
import pytest

import hci_cli
from diamond_data import SHAPES
from hedonic_index import INDEX_COLUMNS, IndexPoint, IndexSeries, read_index_csv

DATES = ("2022-01-03", "2022-01-10", "2022-01-17")


def run(*args) -> int:
    return hci_cli.main([str(a) for a in args])


@pytest.fixture(scope="module")
def market(tmp_path_factory):
    """Three generated snapshots, a fitted linear model and its index."""
    root = tmp_path_factory.mktemp("market")
    config = root / "generator.json"
    config.write_text(json.dumps({"n_per_snapshot": 1500}), encoding="utf-8")
    data = root / "data"
    assert run("generate", "--out", data, "--seed", 1, "--config", config, "--snapshots", 3) == 0
    snapshots = [data / f"snapshot_{d}.csv" for d in DATES]
    model = root / "model" / "model.json"
    assert run("fit", snapshots[0], "--out", model) == 0
    index = root / "index" / "index.csv"
    assert run("index", *snapshots, "--model", model, "--out", index) == 0
    return {"root": root, "data": data, "snapshots": snapshots, "model": model, "index": index}


def _long_index(path):
    points = tuple(IndexPoint(date=date.fromordinal(date(2022, 1, 3).toordinal() + 7 * k),
                              headline=1000.0 + 2.0 * k + (-1) ** k)
                   for k in range(16))
    IndexSeries(points=points, model_id="feedbeef").to_csv(path)
    return path


class TestPipeline:

    def test_generate_writes_snapshots_and_truth(self, market):
        names = sorted(p.name for p in market["data"].iterdir())
        assert names == ["manifest.json", "snapshot_2022-01-03.csv", "snapshot_2022-01-10.csv",
                         "snapshot_2022-01-17.csv", "true_path.csv"]
        truth = pd.read_csv(market["data"] / "true_path.csv")
        assert truth["value"].tolist() == [1000.0] * 3

    def test_index_starts_at_1000(self, market):
        frame = pd.read_csv(market["index"])
        assert list(frame.columns) == INDEX_COLUMNS
        assert frame["headline"].iloc[0] == pytest.approx(1000.0, abs=5e-4)
        assert frame["date"].tolist() == list(DATES)
        assert len(market["index"].with_suffix(".jsonl").read_text(encoding="utf-8").splitlines()) == 3

    def test_manifest(self, market):
        manifest = json.loads((market["index"].parent / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["command"] == "index"
        assert manifest["schema_versions"] == {"model": 1, "index_csv": 1}
        first = manifest["inputs"][0]
        assert first["sha256"] == hashlib.sha256(market["snapshots"][0].read_bytes()).hexdigest()
        outputs = {o["path"] for o in manifest["outputs"]}
        assert str(market["index"]) in outputs
        assert "timestamp" not in json.dumps(manifest)

    def test_outputs_do_not_depend_on_threads(self, market, tmp_path):
        out = tmp_path / "index.csv"
        assert run("--threads", 3, "index", *market["snapshots"], "--model", market["model"], "--out", out) == 0
        assert out.read_bytes() == market["index"].read_bytes()

    def test_manifest_does_not_depend_on_threads(self, market, tmp_path):
        out = tmp_path / "index.csv"
        manifests = []
        for threads in (1, 3):
            assert run("--threads", threads, "index", *market["snapshots"], "--model", market["model"],
                       "--out", out) == 0
            manifests.append((tmp_path / "manifest.json").read_bytes())
        assert manifests[0] == manifests[1]
        manifest = json.loads(manifests[0])
        assert "threads" not in manifest
        assert "argv" not in manifest

    def test_generate_is_reproducible(self, market, tmp_path):
        config = market["root"] / "generator.json"
        assert run("--threads", 2, "generate", "--out", tmp_path, "--seed", 1, "--config", config,
                   "--snapshots", 3) == 0
        for name in DATES:
            assert (tmp_path / f"snapshot_{name}.csv").read_bytes() == \
                (market["data"] / f"snapshot_{name}.csv").read_bytes()

    def test_smoothing(self, market, tmp_path):
        out = tmp_path / "smooth.csv"
        assert run("index", *market["snapshots"], "--model", market["model"], "--out", out,
                   "--smoothing", "ewma", "--lambda", 0.5) == 0
        assert read_index_csv(out).smoothing == "ewma(0.5)"

    def test_subindex_by_shape(self, market, tmp_path):
        out = tmp_path / "shape.csv"
        assert run("subindex", *market["snapshots"], "--model", market["model"], "--out", out,
                   "--scheme", "shape") == 0
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["date"] + list(SHAPES)
        assert frame["Round"].iloc[0] == pytest.approx(1000.0, rel=1e-9)

    def test_weights(self, market, tmp_path):
        out = tmp_path / "weights.csv"
        assert run("weights", market["snapshots"][0], "--out", out) == 0
        table = pd.read_csv(out)
        assert len(table) == 7
        assert table["final_weight"].sum() == pytest.approx(1.0)

    def test_all_intervals(self, market, tmp_path):
        out = tmp_path / "ci.json"
        assert run("ci", market["snapshots"][1], "--model", market["model"], "--out", out,
                   "--seed", 5, "-B", 200) == 0
        records = json.loads(out.read_text(encoding="utf-8"))
        assert [r["method"] for r in records] == ["Normal", "BootstrapPercentile", "PercentileT"]
        for record in records:
            assert record["lower"] <= record["headline"] <= record["upper"]

    def test_normal_interval_needs_no_seed(self, market, tmp_path):
        out = tmp_path / "ci.json"
        assert run("ci", market["snapshots"][0], "--model", market["model"], "--out", out,
                   "--method", "normal", "--level", 0.8) == 0
        record = json.loads(out.read_text(encoding="utf-8"))
        assert record["method"] == "Normal"
        assert record["level"] == 0.8

    def test_baseline_widens_the_interval(self, market, tmp_path):
        plain, widened = tmp_path / "plain.json", tmp_path / "widened.json"
        args = ("ci", market["snapshots"][1], "--model", market["model"], "--method", "normal")
        assert run(*args, "--out", plain) == 0
        assert run(*args, "--baseline", market["snapshots"][0], "--out", widened) == 0
        without = json.loads(plain.read_text(encoding="utf-8"))
        with_baseline = json.loads(widened.read_text(encoding="utf-8"))
        assert without["includes_baseline"] is False
        assert with_baseline["includes_baseline"] is True
        assert with_baseline["headline"] == without["headline"]
        assert with_baseline["upper"] - with_baseline["lower"] > without["upper"] - without["lower"]

    def test_splice_with_itself(self, market, tmp_path):
        out = tmp_path / "spliced.csv"
        assert run("splice", market["index"], market["index"], "--link-date", DATES[1], "--out", out) == 0
        assert pd.read_csv(out)["headline"].tolist() == pd.read_csv(market["index"])["headline"].tolist()

    def test_compare(self, market, tmp_path):
        headline = pd.read_csv(market["index"])["headline"]
        external = tmp_path / "ftse.csv"
        pd.DataFrame({"date": list(DATES), "value": 3.0 * headline + 10.0}).to_csv(external, index=False)
        out = tmp_path / "aligned.csv"
        assert run("compare", market["index"], external, "--out", out) == 0
        mapping = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
        assert mapping["name"] == "ftse"
        assert mapping["slope"] == pytest.approx(1 / 3)
        assert mapping["n_overlap"] == 3


class TestForecast:

    def test_holt(self, tmp_path):
        out = tmp_path / "forecast.csv"
        assert run("forecast", _long_index(tmp_path / "index.csv"), "--out", out, "-h", 4) == 0
        frame = pd.read_csv(out)
        assert frame["date"].tolist() == ["2022-04-25", "2022-05-02", "2022-05-09", "2022-05-16"]
        assert (frame["method"] == "holt").all()

    def test_ar_with_order_selection(self, tmp_path):
        out = tmp_path / "forecast.csv"
        assert run("forecast", _long_index(tmp_path / "index.csv"), "--out", out, "--method", "ar",
                   "--select-order") == 0
        assert len(pd.read_csv(out)) == 4

    def test_ar_without_intercept_is_flat_from_the_last_value(self, tmp_path):
        index = _long_index(tmp_path / "index.csv")
        out = tmp_path / "forecast.csv"
        assert run("forecast", index, "--out", out, "--method", "ar", "--p", 0, "--no-intercept") == 0
        last = pd.read_csv(index)["headline"].iloc[-1]
        assert pd.read_csv(out)["point"].tolist() == pytest.approx([last] * 4, rel=1e-12)
        manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["run_config"]["options"]["intercept"] is False

    def test_short_series(self, market, tmp_path):
        out = tmp_path / "forecast.csv"
        assert run("forecast", market["index"], "--out", out) == 2
        assert not out.exists()


class TestScenario:

    def _config(self, tmp_path, **extra):
        path = tmp_path / "experiment.json"
        doc = {"generator": {"n_per_snapshot": 1500}, "n_snapshots": 2, "subindex_schemes": ["shape"]}
        doc.update(extra)
        path.write_text(json.dumps(doc), encoding="utf-8")
        return path

    def test_single_run(self, tmp_path):
        out = tmp_path / "run"
        assert run("scenario", "--config", self._config(tmp_path), "--out", out, "--seed", 2) == 0
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["config"]["seed"] == 2
        assert len(report["points"]) == 3
        assert set(pd.read_csv(out / "plotdata.csv")["series"]) >= {"headline", "true_path", "shape:Round"}

    def test_replicates(self, tmp_path):
        out = tmp_path / "runs"
        assert run("scenario", "--config", self._config(tmp_path), "--out", out, "--seed", 2,
                   "--replicates", 2) == 0
        assert pd.read_csv(out / "replicates.csv")["seed"].tolist() == [2, 3]

    def test_invalid_config(self, tmp_path):
        out = tmp_path / "run"
        assert run("scenario", "--config", self._config(tmp_path, n_snapshots=0), "--out", out, "--seed", 2) == 2
        assert not out.exists()


class TestExitCodes:

    def test_version(self, capsys):
        assert run("--version") == 0
        assert "hci 0.1.0" in capsys.readouterr().out

    def test_unknown_option(self, market, tmp_path):
        assert run("weights", market["snapshots"][0], "--out", tmp_path / "w.csv", "--bogus") == 1

    def test_missing_file(self, tmp_path):
        assert run("weights", tmp_path / "nope.csv", "--out", tmp_path / "w.csv") == 1

    def test_bad_snapshot_is_a_data_error(self, tmp_path):
        snapshot = tmp_path / "snapshot_2022-01-03.csv"
        snapshot.write_text("carat,price_usd\n1.0,100\n", encoding="utf-8")
        out = tmp_path / "model.json"
        assert run("fit", snapshot, "--out", out) == 2
        assert not out.exists()
        assert not (tmp_path / "manifest.json").exists()

    def test_forest_needs_a_seed(self, market, tmp_path):
        out = tmp_path / "forest.json"
        assert run("fit", market["snapshots"][0], "--out", out, "--model", "forest") == 1
        assert not out.exists()

    def test_bootstrap_needs_a_seed(self, market, tmp_path):
        assert run("ci", market["snapshots"][0], "--model", market["model"], "--out", tmp_path / "ci.json") == 1

    def test_ewma_needs_lambda(self, market, tmp_path):
        assert run("index", *market["snapshots"], "--model", market["model"], "--out", tmp_path / "i.csv",
                   "--smoothing", "ewma") == 1

    def test_weighting_mismatch_without_baseline(self, market, tmp_path):
        assert run("index", *market["snapshots"], "--model", market["model"], "--out", tmp_path / "i.csv",
                   "--weighting", "equal") == 2

    def test_recalibrate_with_baseline(self, market, tmp_path):
        out = tmp_path / "i.csv"
        assert run("index", *market["snapshots"], "--model", market["model"], "--out", out,
                   "--weighting", "equal", "--baseline", market["snapshots"][0]) == 0
        assert pd.read_csv(out)["headline"].iloc[0] == pytest.approx(1000.0, rel=1e-9)
