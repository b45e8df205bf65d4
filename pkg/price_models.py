#!/usr/bin/env python3
"""
Baseline price models: a log-linear hedonic regression and a bagged
regression-tree ensemble, both fitted once at the baseline date and then
frozen for scoring.

Trees are grown with scikit-learn and exported to plain arrays, so prediction,
saving and loading never depend on sklearn internals and reproduce the fitted
model bit for bit.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.linalg
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from sklearn.tree import DecisionTreeRegressor

from diamond_data import (
    CLASS_LOWER_BOUNDS,
    GRADE_COLUMNS,
    GRADE_SCALES,
    N_CARAT_CLASSES,
    SHAPES,
    DataError,
    DiamondAttributes,
    ModelFileError,
    Snapshot,
    carat_class_index,
)

logger = logging.getLogger(__name__)

MODEL_SCHEMA_VERSION = 1
OTHER_LOCATION = "OTHER"
CATEGORICAL_COLUMNS = tuple(GRADE_COLUMNS) + ("shape", "location")
TREE_FEATURES = ("carat", "carat_class") + tuple(GRADE_COLUMNS) + ("shape", "location")
PREDICT_CHUNK_ROWS = 250_000


# ===== Encoding =====

@dataclass(frozen=True)
class Vocabulary:
    """Levels of every categorical column, first level is the reference."""
    levels: Dict[str, Tuple[str, ...]]

    @classmethod
    def from_snapshot(cls, snapshot: Snapshot) -> "Vocabulary":
        levels = {column: tuple(GRADE_SCALES[column]) for column in GRADE_COLUMNS}
        levels["shape"] = tuple(SHAPES)
        observed = snapshot.frame["location"].astype(str).unique()
        levels["location"] = tuple(sorted(set(observed) - {OTHER_LOCATION}))
        return cls(levels=levels)

    def to_dict(self) -> Dict[str, List[str]]:
        return {column: list(values) for column, values in self.levels.items()}

    @classmethod
    def from_dict(cls, data: Dict[str, List[str]]) -> "Vocabulary":
        return cls(levels={column: tuple(data[column]) for column in CATEGORICAL_COLUMNS})

    def codes(self, frame: pd.DataFrame, column: str) -> np.ndarray:
        """Level index per row; -1 for levels outside the vocabulary."""
        values = frame[column].astype(str)
        return pd.Categorical(values, categories=list(self.levels[column])).codes.astype(np.int64)

    def linear_feature_names(self) -> Tuple[str, ...]:
        names = [f"class_{g}" for g in range(2, N_CARAT_CLASSES + 1)]
        names += [f"offset_{g}" for g in range(1, N_CARAT_CLASSES + 1)]
        for column in CATEGORICAL_COLUMNS:
            names += [f"{column}={level}" for level in self.levels[column][1:]]
        names.append(f"location={OTHER_LOCATION}")
        return tuple(names)


@dataclass(frozen=True)
class FeatureVector:
    names: Tuple[str, ...]
    values: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.values, other.values)


def _attributes_to_frame(attributes: Union[DiamondAttributes, Sequence[DiamondAttributes]]) -> pd.DataFrame:
    if isinstance(attributes, DiamondAttributes):
        attributes = [attributes]
    return pd.DataFrame([{
        "carat": a.carat, "colour": a.colour, "clarity": a.clarity, "cut": a.cut,
        "polish": a.polish, "symmetry": a.symmetry, "fluorescence": a.fluorescence,
        "shape": a.shape, "location": a.location,
    } for a in attributes])


def linear_design(frame: pd.DataFrame, vocabulary: Vocabulary) -> np.ndarray:
    """
    Design matrix of the log-linear model (no intercept column).

    Carat enters as class dummies plus a piecewise-linear offset within each
    class, so the basis is continuous inside a class and free to jump at the
    class boundaries.
    """
    n = len(frame)
    names = vocabulary.linear_feature_names()
    X = np.zeros((n, len(names)))
    rows = np.arange(n)

    carat = frame["carat"].to_numpy(dtype=float)
    cls = carat_class_index(carat)
    has_dummy = cls > 0
    X[rows[has_dummy], cls[has_dummy] - 1] = 1.0
    offset_start = N_CARAT_CLASSES - 1
    X[rows, offset_start + cls] = carat - CLASS_LOWER_BOUNDS[cls]

    col = offset_start + N_CARAT_CLASSES
    for column in CATEGORICAL_COLUMNS:
        codes = vocabulary.codes(frame, column)
        n_levels = len(vocabulary.levels[column])
        hot = codes >= 1
        X[rows[hot], col + codes[hot] - 1] = 1.0
        if column == "location":
            X[rows[codes < 0], len(names) - 1] = 1.0
        col += max(n_levels - 1, 0)
    return X


def tree_design(frame: pd.DataFrame, vocabulary: Vocabulary) -> np.ndarray:
    """Ordinal layout for trees: carat, class, grade ranks, shape and location codes."""
    carat = frame["carat"].to_numpy(dtype=float)
    columns = [carat, carat_class_index(carat).astype(float)]
    for column in CATEGORICAL_COLUMNS:
        codes = vocabulary.codes(frame, column)
        if column == "location":
            codes = np.where(codes < 0, len(vocabulary.levels["location"]), codes)
        columns.append(codes.astype(float))
    # trees were grown on float32 features; compare in the same precision
    return np.column_stack(columns).astype(np.float32).astype(np.float64)


def encode(attributes: DiamondAttributes, vocabulary: Optional[Vocabulary] = None) -> FeatureVector:
    """
    Linear-model feature vector of one stone.

    Args:
        attributes (DiamondAttributes): a valid stone
        vocabulary (Vocabulary): fitted vocabulary; without one every location is "other"

    Returns:
        FeatureVector
    """
    if vocabulary is None:
        levels = {column: tuple(GRADE_SCALES[column]) for column in GRADE_COLUMNS}
        levels["shape"] = tuple(SHAPES)
        levels["location"] = ()
        vocabulary = Vocabulary(levels=levels)
    values = linear_design(_attributes_to_frame(attributes), vocabulary)[0]
    return FeatureVector(names=vocabulary.linear_feature_names(), values=values)


# ===== Models =====

@dataclass(frozen=True, eq=False)
class LinearHedonicModel:
    """OLS fit of log(price); coefficients align with ``feature_names``."""
    vocabulary: Vocabulary
    feature_names: Tuple[str, ...]
    coefficients: np.ndarray
    intercept: float
    residual_sd: float
    r_squared: float
    t0: date
    n_train: int
    dropped: Tuple[str, ...] = ()

    kind = "linear"

    def log_predict(self, frame: pd.DataFrame) -> np.ndarray:
        return self.intercept + linear_design(frame, self.vocabulary) @ self.coefficients

    def parameters(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "intercept": self.intercept,
            "coefficients": self.coefficients.tolist(),
            "dropped": list(self.dropped),
            "r_squared": self.r_squared,
        }


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """A binary tree in array form; ``left[k] == -1`` marks a leaf."""
    left: np.ndarray
    right: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    value: np.ndarray

    @classmethod
    def leaf(cls, value: float) -> "RegressionTree":
        return cls(left=np.array([-1]), right=np.array([-1]), feature=np.array([-2]),
                   threshold=np.array([-2.0]), value=np.array([value]))

    @classmethod
    def from_sklearn(cls, estimator: DecisionTreeRegressor) -> "RegressionTree":
        tree = estimator.tree_
        return cls(
            left=np.asarray(tree.children_left, dtype=np.int64).copy(),
            right=np.asarray(tree.children_right, dtype=np.int64).copy(),
            feature=np.asarray(tree.feature, dtype=np.int64).copy(),
            threshold=np.asarray(tree.threshold, dtype=np.float64).copy(),
            value=np.asarray(tree.value[:, 0, 0], dtype=np.float64).copy(),
        )

    @property
    def n_nodes(self) -> int:
        return len(self.left)

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        active = np.arange(len(X))
        while active.size:
            current = node[active]
            internal = self.left[current] >= 0
            active, current = active[internal], current[internal]
            if not active.size:
                break
            go_left = X[active, self.feature[current]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
        return self.value[node]

    def to_dict(self) -> dict:
        return {"left": self.left.tolist(), "right": self.right.tolist(),
                "feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "value": self.value.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "RegressionTree":
        tree = cls(left=np.array(data["left"], dtype=np.int64),
                   right=np.array(data["right"], dtype=np.int64),
                   feature=np.array(data["feature"], dtype=np.int64),
                   threshold=np.array(data["threshold"], dtype=np.float64),
                   value=np.array(data["value"], dtype=np.float64))
        lengths = {len(tree.left), len(tree.right), len(tree.feature), len(tree.threshold), len(tree.value)}
        if len(lengths) != 1:
            raise ModelFileError("tree arrays differ in length")
        internal = tree.left >= 0
        n = len(tree.left)
        if (np.any(tree.left[internal] >= n) or np.any(tree.right[internal] >= n)
                or np.any(tree.feature[internal] >= len(TREE_FEATURES))):
            raise ModelFileError("tree references a node or feature that does not exist")
        return tree


class ForestParams(BaseModel):
    n_trees: int = Field(default=100, ge=1)
    max_depth: Optional[int] = Field(default=12, ge=0)
    min_leaf: int = Field(default=20, ge=1)
    bag_fraction: float = Field(default=0.7, gt=0.0, le=1.0)
    max_features: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)


@dataclass(frozen=True, eq=False)
class ForestModel:
    """Bagged regression trees on log(price)."""
    vocabulary: Vocabulary
    trees: Tuple[RegressionTree, ...]
    params: ForestParams
    residual_sd: float
    t0: date
    n_train: int

    kind = "forest"

    def log_predict(self, frame: pd.DataFrame) -> np.ndarray:
        X = tree_design(frame, self.vocabulary)
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)

    def parameters(self) -> dict:
        return {
            "hyperparameters": self.params.model_dump(),
            "feature_names": list(TREE_FEATURES),
            "trees": [tree.to_dict() for tree in self.trees],
        }


@dataclass(frozen=True)
class Calibration:
    """
    Baseline constants that anchor the index at 1000.

    ``group_c0`` maps a grouping scheme name to the baseline statistic of each
    group (None where the group was empty at baseline).
    """
    statistic: str
    weighting: str
    baseline_date: date
    c0: float
    weights: Tuple[float, ...]
    group_c0: Dict[str, Dict[str, Optional[float]]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "weighting": self.weighting,
                "baseline_date": self.baseline_date.isoformat(), "c0": self.c0,
                "weights": list(self.weights), "group_c0": self.group_c0}

    @classmethod
    def from_dict(cls, data: dict) -> "Calibration":
        return cls(statistic=data["statistic"], weighting=data["weighting"],
                   baseline_date=date.fromisoformat(data["baseline_date"]), c0=float(data["c0"]),
                   weights=tuple(float(w) for w in data["weights"]),
                   group_c0={scheme: dict(groups) for scheme, groups in data["group_c0"].items()})


@dataclass(frozen=True)
class BaselinePredictor:
    """A frozen model plus the index calibration computed on its baseline snapshot."""
    model: Union[LinearHedonicModel, ForestModel]
    calibrations: Dict[str, Calibration] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.model.kind

    @property
    def vocabulary(self) -> Vocabulary:
        return self.model.vocabulary

    @property
    def t0(self) -> date:
        return self.model.t0

    def with_calibration(self, calibration: Calibration) -> "BaselinePredictor":
        calibrations = dict(self.calibrations)
        calibrations[calibration.statistic] = calibration
        return BaselinePredictor(model=self.model, calibrations=calibrations)

    def calibration(self, statistic: str) -> Calibration:
        if statistic not in self.calibrations:
            raise DataError(f"model has no baseline calibration for statistic '{statistic}'")
        return self.calibrations[statistic]

    def log_predict_frame(self, frame: pd.DataFrame) -> np.ndarray:
        parts = [self.model.log_predict(frame.iloc[start:start + PREDICT_CHUNK_ROWS])
                 for start in range(0, len(frame), PREDICT_CHUNK_ROWS)]
        return np.concatenate(parts) if parts else np.zeros(0)

    def predict_frame(self, frame: pd.DataFrame) -> np.ndarray:
        return np.exp(self.log_predict_frame(frame))

    def predict_snapshot(self, snapshot: Snapshot) -> np.ndarray:
        return self.predict_frame(snapshot.frame)


Model = Union[BaselinePredictor, LinearHedonicModel, ForestModel]


def as_predictor(model: Model) -> BaselinePredictor:
    return model if isinstance(model, BaselinePredictor) else BaselinePredictor(model=model)


# ===== Fitting =====

def fit_linear(baseline: Snapshot) -> LinearHedonicModel:
    """
    Ordinary least squares of log(price) on the hedonic design.

    Aliased columns (levels never seen, collinear dummies) are detected with a
    pivoted QR decomposition, dropped with a warning and given coefficient 0.

    Args:
        baseline (Snapshot): the baseline snapshot

    Returns:
        LinearHedonicModel
    """
    vocabulary = Vocabulary.from_snapshot(baseline)
    names = vocabulary.linear_feature_names()
    n = len(baseline)
    if n < 10 * (len(names) + 1):
        raise DataError(f"linear fit needs at least {10 * (len(names) + 1)} records, got {n}")

    y = np.log(baseline.prices)
    X = np.column_stack([np.ones(n), linear_design(baseline.frame, vocabulary)])
    # "other" location never occurs in training; its coefficient stays 0
    candidates = np.arange(X.shape[1] - 1)
    A = X[:, candidates]

    _, R, pivot = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag[0] * max(A.shape) * np.finfo(float).eps if diag.size else 0.0
    rank = int(np.sum(diag > tol))
    keep = np.sort(pivot[:rank])
    all_names = ("intercept",) + names
    dropped = tuple(all_names[j] for j in np.sort(pivot[rank:]))
    if dropped:
        logger.warning("Dropped %d aliased column(s): %s", len(dropped), ", ".join(dropped))

    solution, *_ = np.linalg.lstsq(A[:, keep], y, rcond=None)
    beta = np.zeros(X.shape[1])
    beta[candidates[keep]] = solution

    residuals = y - X @ beta
    ssr = math.fsum(residuals ** 2)
    sst = math.fsum((y - y.mean()) ** 2)
    dof = max(n - rank, 1)
    model = LinearHedonicModel(
        vocabulary=vocabulary,
        feature_names=names,
        coefficients=beta[1:],
        intercept=float(beta[0]),
        residual_sd=math.sqrt(ssr / dof),
        r_squared=1.0 - ssr / sst if sst > 0 else 1.0,
        t0=baseline.date,
        n_train=n,
        dropped=dropped,
    )
    logger.info("Linear fit on %d records: R^2 %.4f, residual sd %.4g", n, model.r_squared, model.residual_sd)
    return model


def _grow_tree(X: np.ndarray, y: np.ndarray, params: ForestParams, max_features: int,
               seed: np.random.SeedSequence) -> RegressionTree:
    if params.max_depth == 0:
        # a stump predicts the training mean whatever the bag
        return RegressionTree.leaf(float(np.mean(y)))
    rng = np.random.default_rng(seed)
    n = len(y)
    if params.bag_fraction >= 1.0:
        bag = np.arange(n)
    else:
        bag = rng.integers(0, n, size=max(1, int(round(params.bag_fraction * n))))
    estimator = DecisionTreeRegressor(
        max_depth=params.max_depth,
        min_samples_leaf=params.min_leaf,
        max_features=max_features,
        random_state=int(seed.generate_state(1)[0]),
    )
    estimator.fit(X[bag], y[bag])
    return RegressionTree.from_sklearn(estimator)


def fit_forest(baseline: Snapshot, params: Optional[ForestParams] = None, n_jobs: int = 1,
               progress: bool = False) -> ForestModel:
    """
    Grow a bagged ensemble of regression trees on log(price).

    Each tree has its own seed spawned from ``params.seed``, so the forest is
    identical for any ``n_jobs``. A bag fraction of 1 uses every record once
    (no resampling).

    Args:
        baseline (Snapshot): the baseline snapshot, at least 1000 records
        params (ForestParams): hyperparameters
        n_jobs (int): parallel tree builders
        progress (bool): show a progress bar

    Returns:
        ForestModel
    """
    params = params or ForestParams()
    n = len(baseline)
    if n < 1000:
        raise DataError(f"forest fit needs at least 1000 records, got {n}")
    vocabulary = Vocabulary.from_snapshot(baseline)
    X = tree_design(baseline.frame, vocabulary)
    y = np.log(baseline.prices)
    d = X.shape[1]
    max_features = min(params.max_features or math.ceil(math.sqrt(d)), d)

    seeds = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    if progress:
        from tqdm import tqdm
        seeds_iter = tqdm(seeds, desc="trees", unit="tree")
    else:
        seeds_iter = seeds
    trees = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_grow_tree)(X, y, params, max_features, seed) for seed in seeds_iter)

    forest = ForestModel(vocabulary=vocabulary, trees=tuple(trees), params=params,
                         residual_sd=0.0, t0=baseline.date, n_train=n)
    residuals = y - forest.log_predict(baseline.frame)
    forest = ForestModel(vocabulary=vocabulary, trees=tuple(trees), params=params,
                         residual_sd=float(np.std(residuals, ddof=1)), t0=baseline.date, n_train=n)
    logger.info("Forest of %d trees on %d records (max_features=%d)", params.n_trees, n, max_features)
    return forest


# ===== Scoring =====

def predict(model: Model, attributes: DiamondAttributes) -> float:
    """Predicted price in USD: exp of the model's log-scale prediction."""
    return float(as_predictor(model).predict_frame(_attributes_to_frame(attributes))[0])


@dataclass(frozen=True)
class ErrorSummary:
    median: float
    p90: float
    n: int


def holdout_relative_error(model: Model, holdout: Snapshot) -> ErrorSummary:
    """
    Absolute relative prediction error |P - F| / P on a holdout snapshot.

    Args:
        model: fitted model
        holdout (Snapshot): records disjoint from the training data

    Returns:
        ErrorSummary: median and 90th percentile
    """
    if len(holdout) == 0:
        raise DataError("empty holdout snapshot")
    prices = holdout.prices
    errors = np.abs(prices - as_predictor(model).predict_snapshot(holdout)) / prices
    return ErrorSummary(median=float(np.median(errors)), p90=float(np.quantile(errors, 0.9)), n=len(errors))


def compare_predictors(baseline: Snapshot, holdout: Snapshot, params: Optional[ForestParams] = None,
                       n_jobs: int = 1) -> pd.DataFrame:
    """Fit both model kinds on ``baseline`` and tabulate their holdout errors."""
    rows = []
    for kind, model in (("linear", fit_linear(baseline)), ("forest", fit_forest(baseline, params, n_jobs))):
        summary = holdout_relative_error(model, holdout)
        rows.append({"model": kind, "median_error": summary.median, "p90_error": summary.p90, "n": summary.n})
    return pd.DataFrame(rows)


# ===== Persistence =====

def model_to_dict(model: Model) -> dict:
    predictor = as_predictor(model)
    inner = predictor.model
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "kind": inner.kind,
        "vocabulary": inner.vocabulary.to_dict(),
        "parameters": inner.parameters(),
        "t0": inner.t0.isoformat(),
        "n_train": inner.n_train,
        "residual_sd": inner.residual_sd,
        "calibration": {stat: c.to_dict() for stat, c in sorted(predictor.calibrations.items())},
    }


def model_json(model: Model) -> str:
    return json.dumps(model_to_dict(model), allow_nan=False)


def save_model(model: Model, path: Union[str, Path]) -> None:
    Path(path).write_text(model_json(model), encoding="utf-8")


def model_from_dict(doc: dict) -> BaselinePredictor:
    version = doc.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise ModelFileError(f"model file has schema version {version}, "
                             f"this build reads version {MODEL_SCHEMA_VERSION}")
    try:
        vocabulary = Vocabulary.from_dict(doc["vocabulary"])
        parameters = doc["parameters"]
        t0 = date.fromisoformat(doc["t0"])
        if doc["kind"] == "linear":
            names = tuple(parameters["feature_names"])
            if names != vocabulary.linear_feature_names():
                raise ModelFileError("feature names do not match the vocabulary")
            coefficients = np.array(parameters["coefficients"], dtype=float)
            if len(coefficients) != len(names):
                raise ModelFileError("coefficient count does not match the feature count")
            inner = LinearHedonicModel(
                vocabulary=vocabulary, feature_names=names, coefficients=coefficients,
                intercept=float(parameters["intercept"]), residual_sd=float(doc["residual_sd"]),
                r_squared=float(parameters["r_squared"]), t0=t0, n_train=int(doc["n_train"]),
                dropped=tuple(parameters.get("dropped", ())),
            )
        elif doc["kind"] == "forest":
            trees = tuple(RegressionTree.from_dict(t) for t in parameters["trees"])
            if not trees:
                raise ModelFileError("forest has no trees")
            inner = ForestModel(
                vocabulary=vocabulary, trees=trees,
                params=ForestParams(**parameters["hyperparameters"]),
                residual_sd=float(doc["residual_sd"]), t0=t0, n_train=int(doc["n_train"]),
            )
        else:
            raise ModelFileError(f"unknown model kind {doc['kind']!r}")
        calibrations = {stat: Calibration.from_dict(c) for stat, c in doc.get("calibration", {}).items()}
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ModelFileError):
            raise
        raise ModelFileError(f"malformed model file: {e}") from e
    return BaselinePredictor(model=inner, calibrations=calibrations)


def load_model(path: Union[str, Path]) -> BaselinePredictor:
    """
    Read a model file written by ``save_model``.

    Raises:
        ModelFileError: truncated or corrupt JSON, or another schema version
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelFileError(f"{path}: truncated or corrupt model file ({e})") from e
    if not isinstance(doc, dict):
        raise ModelFileError(f"{path}: not a model document")
    return model_from_dict(doc)


def main():
    """Fit a linear model on a small synthetic snapshot and report the holdout error."""
    from synthetic_market import GeneratorConfig, MarketState, generate_snapshot

    state = MarketState.initial(date(2022, 6, 27))
    train = generate_snapshot(GeneratorConfig(seed=1, n_per_snapshot=5000), state)
    test = generate_snapshot(GeneratorConfig(seed=2, n_per_snapshot=2000), state)
    summary = holdout_relative_error(fit_linear(train), test)
    print(f"Holdout median relative error {summary.median:.2%}, p90 {summary.p90:.2%}")


if __name__ == "__main__":
    main()
