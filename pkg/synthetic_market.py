#!/usr/bin/env python3
"""
Synthetic wholesale diamond market with a known price law.

The generator is the oracle for every index-level check: prices follow a
log-additive law (optionally with a colour x carat-class interaction), market
states carry multiplicative group and shape factors, and scripted scenarios
move those factors over a window of snapshots.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from diamond_data import (
    CLARITIES,
    CLASS_LOWER_BOUNDS,
    COLOURS,
    CUT_GRADES,
    FLUORESCENCE,
    GRADE_COLUMNS,
    GRADE_SCALES,
    N_CARAT_CLASSES,
    SHAPES,
    ConfigError,
    DataError,
    DiamondAttributes,
    Snapshot,
    carat_class_index,
)

logger = logging.getLogger(__name__)

# Class sizes of the 27/06/2022 wholesale snapshot
REFERENCE_CLASS_COUNTS = (329506, 281696, 134001, 24661, 8710, 2333, 4937)
DEFAULT_CLASS_MIX = tuple(c / sum(REFERENCE_CLASS_COUNTS) for c in REFERENCE_CLASS_COUNTS)

BLOCK_SIZE = 8192
# Carats above 5 ct: 5.00 + exponential tail (hundredths of a carat)
LARGE_STONE_TAIL_HUNDREDTHS = 150.0
MAX_CARAT_HUNDREDTHS = 9999

SCENARIO_WINDOW = 13  # "3 months (13 snapshots)"


# ===== Configuration =====

def _check_levels(values: Dict[str, float], allowed: Sequence[str], name: str) -> Dict[str, float]:
    unknown = [k for k in values if k not in allowed]
    if unknown:
        raise ValueError(f"unknown {name} level(s): {', '.join(unknown)}")
    return values


class AttributeLaw(BaseModel):
    """Categorical frequencies of each characteristic (normalised when used)."""
    colour: Dict[str, float] = dict(zip(COLOURS, (0.06, 0.10, 0.14, 0.16, 0.15, 0.13, 0.10, 0.07, 0.05, 0.04)))
    clarity: Dict[str, float] = dict(zip(CLARITIES, (0.01, 0.03, 0.07, 0.10, 0.16, 0.18, 0.20, 0.17, 0.08)))
    cut: Dict[str, float] = dict(zip(CUT_GRADES, (0.55, 0.25, 0.12, 0.06, 0.02)))
    polish: Dict[str, float] = dict(zip(CUT_GRADES, (0.60, 0.28, 0.09, 0.02, 0.01)))
    symmetry: Dict[str, float] = dict(zip(CUT_GRADES, (0.50, 0.32, 0.13, 0.04, 0.01)))
    fluorescence: Dict[str, float] = dict(zip(FLUORESCENCE, (0.60, 0.18, 0.12, 0.08, 0.02)))
    shape: Dict[str, float] = dict(zip(SHAPES, (0.55, 0.07, 0.06, 0.08, 0.06, 0.06, 0.03, 0.05, 0.02, 0.02)))
    location: Dict[str, float] = {"NY": 0.35, "ANTWERP": 0.20, "MUMBAI": 0.20,
                                  "TEL AVIV": 0.10, "HONG KONG": 0.10, "DUBAI": 0.05}

    @model_validator(mode="after")
    def _check(self):
        for column, scale in GRADE_SCALES.items():
            _check_levels(getattr(self, column), scale, column)
        _check_levels(self.shape, SHAPES, "shape")
        for name in list(GRADE_SCALES) + ["shape", "location"]:
            probs = getattr(self, name)
            if any(p < 0 for p in probs.values()) or sum(probs.values()) <= 0:
                raise ValueError(f"{name} frequencies must be non-negative with a positive total")
        self.location = {k.strip().upper(): v for k, v in self.location.items()}
        return self

    def levels(self, name: str) -> Tuple[Tuple[str, ...], np.ndarray]:
        """Levels (in vocabulary order) and normalised probabilities."""
        probs = getattr(self, name)
        if name in GRADE_SCALES:
            order = [level for level in GRADE_SCALES[name] if level in probs]
        elif name == "shape":
            order = [level for level in SHAPES if level in probs]
        else:
            order = list(probs)
        p = np.array([probs[level] for level in order], dtype=float)
        return tuple(order), p / p.sum()


class PriceLaw(BaseModel):
    """
    Coefficients of the true log-price function.

    log price = base + class_step[g] + class_slope[g] * (carat - lower bound of g)
                + grade decrements + shape premium + location offset
                + colour_class_interaction * colour rank * (g - 1)

    Levels missing from a dict contribute 0.
    """
    base: float = math.log(1200.0)
    class_step: List[float] = [0.0, 0.83, 1.91, 3.0, 3.6, 4.01, 4.36]
    class_slope: List[float] = [2.4, 1.6, 0.9, 0.45, 0.3, 0.25, 0.12]
    colour: Dict[str, float] = dict(zip(COLOURS, (0.0, -0.06, -0.12, -0.19, -0.27, -0.36, -0.46, -0.57, -0.69, -0.82)))
    clarity: Dict[str, float] = dict(zip(CLARITIES, (0.0, -0.05, -0.12, -0.18, -0.26, -0.33, -0.45, -0.58, -0.85)))
    cut: Dict[str, float] = dict(zip(CUT_GRADES, (0.0, -0.04, -0.09, -0.15, -0.24)))
    polish: Dict[str, float] = dict(zip(CUT_GRADES, (0.0, -0.02, -0.05, -0.09, -0.14)))
    symmetry: Dict[str, float] = dict(zip(CUT_GRADES, (0.0, -0.02, -0.05, -0.09, -0.14)))
    fluorescence: Dict[str, float] = dict(zip(FLUORESCENCE, (0.0, -0.01, -0.04, -0.08, -0.12)))
    shape: Dict[str, float] = dict(zip(SHAPES, (0.0, -0.25, -0.28, -0.20, -0.27, -0.22, -0.30, -0.26, -0.30, -0.32)))
    location: Dict[str, float] = {"NY": 0.0, "ANTWERP": -0.01, "MUMBAI": -0.04,
                                  "TEL AVIV": -0.02, "HONG KONG": 0.01, "DUBAI": -0.015}
    colour_class_interaction: float = 0.0

    @model_validator(mode="after")
    def _check(self):
        if len(self.class_step) != N_CARAT_CLASSES or len(self.class_slope) != N_CARAT_CLASSES:
            raise ValueError("class_step and class_slope need one entry per carat class (7)")
        if any(s < 0 for s in self.class_slope):
            raise ValueError("class_slope entries must be non-negative")
        for column, scale in GRADE_SCALES.items():
            _check_levels(getattr(self, column), scale, column)
        _check_levels(self.shape, SHAPES, "shape")
        self.location = {k.strip().upper(): v for k, v in self.location.items()}
        return self


class GeneratorConfig(BaseModel):
    """Everything that determines a synthetic snapshot apart from the market state."""
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    n_per_snapshot: int = Field(default=10_000, gt=0)
    class_mix: List[float] = list(DEFAULT_CLASS_MIX)
    attribute_law: AttributeLaw = AttributeLaw()
    price_law: PriceLaw = PriceLaw()
    noise_sd: float = Field(default=0.1, ge=0.0)

    @field_validator("class_mix")
    @classmethod
    def _mix_sums_to_one(cls, mix: List[float]) -> List[float]:
        if len(mix) != N_CARAT_CLASSES:
            raise ValueError("class_mix needs one proportion per carat class (7)")
        if any(p < 0 for p in mix):
            raise ValueError("class_mix proportions must be non-negative")
        if abs(math.fsum(mix) - 1.0) > 1e-12:
            raise ValueError(f"class_mix sums to {math.fsum(mix)!r}, not 1")
        return mix


def load_generator_config(path: Union[str, Path]) -> GeneratorConfig:
    """Read a GeneratorConfig JSON document."""
    try:
        return GeneratorConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


# ===== Market state =====

@dataclass(frozen=True)
class MarketState:
    """
    Latent price factors of the market on one date.

    ``shape_mix_shift`` maps (from_shape, to_shape) to the fraction of the
    from-shape's volume that moves to the to-shape.
    """
    date: date
    group_factor: Tuple[float, ...] = (1.0,) * N_CARAT_CLASSES
    shape_factor: Dict[str, float] = field(default_factory=dict)
    shape_mix_shift: Dict[Tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.group_factor) != N_CARAT_CLASSES:
            raise DataError("group_factor needs one factor per carat class")
        if any(not f > 0 for f in self.group_factor) or any(not f > 0 for f in self.shape_factor.values()):
            raise DataError("market factors must be positive")
        outflow: Dict[str, float] = {}
        for (source, _), fraction in self.shape_mix_shift.items():
            if not 0.0 <= fraction <= 1.0:
                raise DataError("volume shift fractions must lie in [0, 1]")
            outflow[source] = outflow.get(source, 0.0) + fraction
        if any(total > 1.0 + 1e-12 for total in outflow.values()):
            raise DataError("volume shifts move more than the whole of a shape")

    @classmethod
    def initial(cls, on: date) -> "MarketState":
        return cls(date=on)

    def shape_probabilities(self, law: AttributeLaw) -> Tuple[Tuple[str, ...], np.ndarray]:
        """Shape frequencies after volume reallocation; the total is conserved."""
        levels, base = law.levels("shape")
        probs = base.copy()
        index = {shape: k for k, shape in enumerate(levels)}
        for (source, target), fraction in sorted(self.shape_mix_shift.items()):
            if source not in index or target not in index:
                continue
            moved = base[index[source]] * fraction
            probs[index[source]] -= moved
            probs[index[target]] += moved
        return levels, probs

    def shape_value_shares(self, law: AttributeLaw, price_law: PriceLaw) -> Tuple[Tuple[str, ...], np.ndarray]:
        """
        Expected share of market value held by each shape, at base-law prices and
        this state's volumes.

        Shape is drawn independently of every other characteristic, so the
        shares are the same in every carat class.
        """
        levels, probs = self.shape_probabilities(law)
        values = np.array([p * math.exp(price_law.shape.get(shape, 0.0)) for shape, p in zip(levels, probs)])
        return levels, values / math.fsum(values)

    def expected_shape_factor(self, law: AttributeLaw, price_law: PriceLaw) -> float:
        """Value-weighted mean shape factor under this state's shape law."""
        levels, shares = self.shape_value_shares(law, price_law)
        return math.fsum(v * self.shape_factor.get(shape, 1.0) for shape, v in zip(levels, shares))


# ===== Scenarios =====

class VolumeShift(BaseModel):
    from_shape: str = "Round"
    to_shape: str = "Cushion"
    fraction: float = Field(default=0.05, ge=0.0, le=1.0)


class ScenarioSpec(BaseModel):
    """
    A scripted market shock.

    FashionShift: to_shape price x (1 + price_change) and ``volume_shift`` of the
    from_shape volume (relative to that shape's own volume) moved to to_shape.
    SmallDiamondSlump: ``phases`` of (snapshots, change) applied to ``classes``.
    Custom: ``group_change`` / ``shape_change`` / ``volume_shifts`` over the whole window.
    """
    kind: Literal["FashionShift", "SmallDiamondSlump", "Custom"]
    start: date
    duration: Optional[int] = Field(default=None, ge=1)
    price_change: float = 0.05
    volume_shift: float = Field(default=0.05, ge=0.0, le=1.0)
    from_shape: str = "Round"
    to_shape: str = "Cushion"
    classes: List[int] = [1, 2]
    phases: List[Tuple[int, float]] = [(3, -0.05), (7, -0.10), (3, -0.05)]
    group_change: Dict[int, float] = {}
    shape_change: Dict[str, float] = {}
    volume_shifts: List[VolumeShift] = []

    @model_validator(mode="after")
    def _check(self):
        changes = [self.price_change] + [c for _, c in self.phases]
        changes += list(self.group_change.values()) + list(self.shape_change.values())
        if any(c <= -1.0 for c in changes):
            raise ValueError("percentage changes must exceed -100%")
        if any(n < 1 for n, _ in self.phases):
            raise ValueError("every phase needs at least one snapshot")
        if any(not 1 <= g <= N_CARAT_CLASSES for g in list(self.classes) + list(self.group_change)):
            raise ValueError("carat classes are numbered 1..7")
        if self.kind == "SmallDiamondSlump":
            phase_total = sum(n for n, _ in self.phases)
            if self.duration is not None and self.duration != phase_total:
                raise ValueError(f"duration {self.duration} does not match the phase schedule ({phase_total})")
        return self

    @property
    def window(self) -> int:
        if self.kind == "SmallDiamondSlump":
            return sum(n for n, _ in self.phases)
        return self.duration or SCENARIO_WINDOW


def load_scenario_spec(path: Union[str, Path]) -> ScenarioSpec:
    try:
        return ScenarioSpec.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def _compose_shift(existing: Dict[Tuple[str, str], float], source: str, target: str,
                   fraction: float) -> Dict[Tuple[str, str], float]:
    shifts = dict(existing)
    previous = shifts.get((source, target), 0.0)
    shifts[(source, target)] = 1.0 - (1.0 - previous) * (1.0 - fraction)
    return shifts


def _scaled_shapes(factors: Dict[str, float], changes: Dict[str, float]) -> Dict[str, float]:
    out = dict(factors)
    for shape, change in changes.items():
        out[shape] = out.get(shape, 1.0) * (1.0 + change)
    return out


def _scaled_groups(factors: Tuple[float, ...], changes: Dict[int, float]) -> Tuple[float, ...]:
    return tuple(f * (1.0 + changes.get(g, 0.0)) for g, f in enumerate(factors, start=1))


def apply_scenario(states: List[MarketState], spec: ScenarioSpec) -> List[MarketState]:
    """
    Apply a scripted shock to a sequence of market states.

    Factors multiply the pre-scenario values, so scenarios stack. States outside
    the window are returned unchanged.

    Args:
        states (List[MarketState]): one state per snapshot date, increasing dates
        spec (ScenarioSpec): the shock

    Returns:
        List[MarketState]: new states
    """
    if not states:
        raise DataError("no market states to apply the scenario to")
    dates = [s.date for s in states]
    if spec.start < dates[0] or spec.start > dates[-1]:
        raise DataError(f"scenario start {spec.start} outside {dates[0]}..{dates[-1]}")
    start = next(k for k, d in enumerate(dates) if d >= spec.start)
    window = spec.window
    if start + window > len(states):
        raise DataError(f"scenario window of {window} snapshots from {dates[start]} "
                        f"runs past the last date {dates[-1]}")

    if spec.kind == "SmallDiamondSlump":
        schedule = [change for n, change in spec.phases for _ in range(n)]
    else:
        schedule = [None] * window

    out = list(states)
    for offset, change in enumerate(schedule):
        k = start + offset
        state = out[k]
        if spec.kind == "FashionShift":
            state = replace(
                state,
                shape_factor=_scaled_shapes(state.shape_factor, {spec.to_shape: spec.price_change}),
                shape_mix_shift=_compose_shift(state.shape_mix_shift, spec.from_shape,
                                               spec.to_shape, spec.volume_shift),
            )
        elif spec.kind == "SmallDiamondSlump":
            state = replace(state, group_factor=_scaled_groups(
                state.group_factor, {g: change for g in spec.classes}))
        else:
            shifts = state.shape_mix_shift
            for shift in spec.volume_shifts:
                shifts = _compose_shift(shifts, shift.from_shape, shift.to_shape, shift.fraction)
            state = replace(
                state,
                group_factor=_scaled_groups(state.group_factor, spec.group_change),
                shape_factor=_scaled_shapes(state.shape_factor, spec.shape_change),
                shape_mix_shift=shifts,
            )
        out[k] = state
    logger.info("Applied %s over %d snapshots from %s", spec.kind, window, dates[start])
    return out


# ===== Price law =====

def _lookup(values: pd.Series, table: Dict[str, float]) -> np.ndarray:
    mapped = values.astype(str).map(table)
    return mapped.fillna(0.0).to_numpy(dtype=float)


def true_log_price(frame: pd.DataFrame, law: PriceLaw) -> np.ndarray:
    """Log of the price law, before market factors, for every row of a snapshot frame."""
    carat = frame["carat"].to_numpy(dtype=float)
    cls = carat_class_index(carat)
    step = np.asarray(law.class_step)[cls]
    slope = np.asarray(law.class_slope)[cls]
    log_price = law.base + step + slope * (carat - CLASS_LOWER_BOUNDS[cls])
    for column in GRADE_COLUMNS:
        log_price = log_price + _lookup(frame[column], getattr(law, column))
    log_price = log_price + _lookup(frame["shape"], law.shape)
    log_price = log_price + _lookup(frame["location"], law.location)
    if law.colour_class_interaction:
        rank = frame["colour"].astype(str).map({c: k for k, c in enumerate(COLOURS)}).to_numpy(dtype=float)
        log_price = log_price + law.colour_class_interaction * rank * cls
    return log_price


def market_factor(frame: pd.DataFrame, state: MarketState) -> np.ndarray:
    cls = carat_class_index(frame["carat"].to_numpy(dtype=float))
    group = np.asarray(state.group_factor, dtype=float)[cls]
    shape = frame["shape"].astype(str).map(state.shape_factor).fillna(1.0).to_numpy(dtype=float)
    return group * shape


def true_price(attributes: DiamondAttributes, state: MarketState,
               law: Optional[PriceLaw] = None) -> float:
    """
    Noise-free price of a stone in a given market state.

    Args:
        attributes (DiamondAttributes): the stone
        state (MarketState): market factors
        law (PriceLaw): price law, default coefficients when omitted

    Returns:
        float: price in USD
    """
    law = law or PriceLaw()
    frame = pd.DataFrame([{
        "carat": attributes.carat, "colour": attributes.colour, "clarity": attributes.clarity,
        "cut": attributes.cut, "polish": attributes.polish, "symmetry": attributes.symmetry,
        "fluorescence": attributes.fluorescence, "shape": attributes.shape,
        "location": attributes.location,
    }])
    return float(np.exp(true_log_price(frame, law))[0] * market_factor(frame, state)[0])


# ===== Snapshot generation =====

def _block_seed(config: GeneratorConfig, on: date, block: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([config.seed, on.toordinal(), block])


def _generate_block(config: GeneratorConfig, state: MarketState, block: int, size: int) -> pd.DataFrame:
    rng = np.random.default_rng(_block_seed(config, state.date, block))
    law = config.attribute_law

    cls = rng.choice(N_CARAT_CLASSES, size=size, p=np.asarray(config.class_mix) / math.fsum(config.class_mix))
    uniform = rng.random(size)
    tail = rng.exponential(LARGE_STONE_TAIL_HUNDREDTHS, size)
    lower = np.rint(CLASS_LOWER_BOUNDS * 100).astype(np.int64)
    width = np.diff(np.append(lower, 10_000))
    hundredths = lower[cls] + np.floor(uniform * width[cls]).astype(np.int64)
    large = cls == N_CARAT_CLASSES - 1
    hundredths[large] = np.minimum(lower[-1] + np.floor(tail[large]).astype(np.int64), MAX_CARAT_HUNDREDTHS)
    carat = hundredths / 100.0

    columns = {"carat": carat}
    for name in list(GRADE_COLUMNS) + ["shape", "location"]:
        if name == "shape":
            levels, probs = state.shape_probabilities(law)
        else:
            levels, probs = law.levels(name)
        codes = rng.choice(len(levels), size=size, p=probs)
        columns[name] = pd.Categorical.from_codes(codes, categories=list(levels))
    noise = rng.standard_normal(size) * config.noise_sd

    frame = pd.DataFrame(columns)
    frame = frame[["carat", "colour", "clarity", "cut", "polish", "symmetry",
                   "fluorescence", "shape", "location"]]
    frame["price"] = np.exp(true_log_price(frame, config.price_law) + noise) * market_factor(frame, state)
    return frame


def generate_snapshot(config: GeneratorConfig, state: MarketState, n_jobs: int = 1) -> Snapshot:
    """
    Draw one synthetic snapshot.

    Records are generated in fixed-size blocks, each with its own seed derived
    from (seed, date, block), so the output does not depend on ``n_jobs``.

    Args:
        config (GeneratorConfig): generator settings
        state (MarketState): market factors for the snapshot date
        n_jobs (int): parallel workers

    Returns:
        Snapshot: ``config.n_per_snapshot`` records
    """
    n = config.n_per_snapshot
    sizes = [min(BLOCK_SIZE, n - start) for start in range(0, n, BLOCK_SIZE)]
    if n_jobs == 1 or len(sizes) == 1:
        blocks = [_generate_block(config, state, b, size) for b, size in enumerate(sizes)]
    else:
        blocks = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_generate_block)(config, state, b, size) for b, size in enumerate(sizes))
    frame = pd.concat(blocks, ignore_index=True)
    for name in list(GRADE_COLUMNS) + ["shape", "location"]:
        frame[name] = frame[name].astype("category")
    return Snapshot(date=state.date, frame=frame)


@dataclass(frozen=True)
class TrueIndexPath:
    """Ground-truth index level per date, 1000 at the first date."""
    dates: Tuple[date, ...]
    values: Tuple[float, ...]
    weights: Tuple[float, ...]

    def to_series(self) -> pd.Series:
        return pd.Series(list(self.values), index=pd.DatetimeIndex(list(self.dates)), name="true_path")


def population_factor(state: MarketState, weights: Sequence[float], law: AttributeLaw,
                      price_law: PriceLaw) -> float:
    """Weighted market factor: sum_g w_g * group_factor_g * value-weighted shape factor."""
    shape = state.expected_shape_factor(law, price_law)
    return math.fsum(w * f * shape for w, f in zip(weights, state.group_factor))


def true_index_path(states: Sequence[MarketState], weights: Sequence[float],
                    law: AttributeLaw, price_law: Optional[PriceLaw] = None) -> TrueIndexPath:
    price_law = price_law or PriceLaw()
    factors = [population_factor(s, weights, law, price_law) for s in states]
    values = tuple(1000.0 * f / factors[0] for f in factors)
    return TrueIndexPath(dates=tuple(s.date for s in states), values=values, weights=tuple(weights))


def snapshot_dates(start: date, count: int, interval_days: int = 7) -> List[date]:
    """``count`` dates from ``start`` at a fixed cadence (weekly by default)."""
    return [d.date() for d in pd.date_range(start=start, periods=count, freq=f"{interval_days}D")]


def generate_series(config: GeneratorConfig, dates: Sequence[date],
                    spec: Optional[ScenarioSpec] = None,
                    n_jobs: int = 1) -> Tuple[List[Snapshot], TrueIndexPath]:
    """
    Generate one snapshot per date plus the ground-truth index path.

    The path uses the generator's own final weights, computed from the first
    snapshot's carat-class values exactly as the index does at its baseline.

    Args:
        config (GeneratorConfig): generator settings
        dates: strictly increasing snapshot dates
        spec (ScenarioSpec): optional shock
        n_jobs (int): parallel workers per snapshot

    Returns:
        Tuple[List[Snapshot], TrueIndexPath]
    """
    from hedonic_index import CARAT_CLASSES, final_weights, proportional_weights

    dates = list(dates)
    if any(b <= a for a, b in zip(dates, dates[1:])):
        raise DataError("snapshot dates must be strictly increasing")
    states = [MarketState.initial(d) for d in dates]
    if spec is not None:
        states = apply_scenario(states, spec)

    snapshots = [generate_snapshot(config, state, n_jobs=n_jobs) for state in states]
    weights = final_weights(proportional_weights(snapshots[0], CARAT_CLASSES)).values
    path = true_index_path(states, weights, config.attribute_law, config.price_law)
    logger.info("Generated %d snapshots of %d records", len(snapshots), config.n_per_snapshot)
    return snapshots, path


def main():
    """Print a small synthetic snapshot summary."""
    config = GeneratorConfig(n_per_snapshot=2000)
    snapshot = generate_snapshot(config, MarketState.initial(date(2022, 6, 27)))
    classes = pd.Series(carat_class_index(snapshot.carats) + 1).value_counts().sort_index()
    print(f"Generated {len(snapshot)} stones for {snapshot.date}")
    print(classes.to_string())
    print(json.dumps({"median_price": float(np.median(snapshot.prices))}))


if __name__ == "__main__":
    main()
