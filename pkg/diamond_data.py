#!/usr/bin/env python3
"""
Diamond snapshot data: value types, CSV ingestion and validation.

A snapshot is one dated batch of wholesale price quotations. Everything
downstream (model fitting, ratios, weights) works on the pandas frame held by
``Snapshot``; ``PricedDiamond`` records are materialised on demand.
"""

import csv
import io
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import BinaryIO, Dict, Iterable, Iterator, List, Optional, TextIO, Tuple, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

# ===== Vocabularies =====

COLOURS = ("D", "E", "F", "G", "H", "I", "J", "K", "L", "M")
CLARITIES = ("FL", "IF", "VVS1", "VVS2", "VS1", "VS2", "SI1", "SI2", "I1")
CUT_GRADES = ("EX", "VG", "G", "F", "P")
FLUORESCENCE = ("NON", "FNT", "MED", "STG", "VST")
SHAPES = ("Round", "Cushion", "Princess", "Oval", "Emerald",
          "Pear", "Marquise", "Radiant", "Asscher", "Heart")

# Ordinal scales, best grade first
GRADE_SCALES: Dict[str, Tuple[str, ...]] = {
    "colour": COLOURS,
    "clarity": CLARITIES,
    "cut": CUT_GRADES,
    "polish": CUT_GRADES,
    "symmetry": CUT_GRADES,
    "fluorescence": FLUORESCENCE,
}
GRADE_COLUMNS = tuple(GRADE_SCALES)

MIN_CARAT = 0.25
MAX_CARAT = 100.0

# Half-open carat classes [lo, hi); a boundary carat belongs to the upper class
CARAT_CLASS_EDGES = (0.25, 0.50, 1.00, 2.00, 3.00, 4.00, 5.00, 100.0)
CLASS_LOWER_BOUNDS = np.array(CARAT_CLASS_EDGES[:-1])
N_CARAT_CLASSES = len(CARAT_CLASS_EDGES) - 1

SNAPSHOT_COLUMNS = ["carat", "colour", "clarity", "cut", "shape", "polish",
                    "symmetry", "fluorescence", "location", "price_usd"]
SERIES_COLUMNS = ["date", "value"]

DEFAULT_MAX_REJECTION_RATE = 0.05

_SHAPE_LOOKUP = {shape.upper(): shape for shape in SHAPES}
_DATE_IN_NAME = re.compile(r"(\d{4}-\d{2}-\d{2})")


# ===== Errors =====

class HCIError(Exception):
    """Base class for every error raised deliberately by this package."""


class DataError(HCIError, ValueError):
    """Input data cannot be used (bad schema, no valid rows, duplicate dates, ...)."""


class ModelFileError(DataError):
    """A saved model file is truncated, corrupt or from another schema version."""


class ConfigError(HCIError, ValueError):
    """A JSON configuration document failed validation."""


# ===== Value types =====

@dataclass(frozen=True)
class DiamondAttributes:
    """The eight quality characteristics of a stone plus its market location."""
    carat: float
    colour: str
    clarity: str
    cut: str
    polish: str
    symmetry: str
    fluorescence: str
    shape: str
    location: str

    @classmethod
    def from_raw(cls, carat, colour: str, clarity: str, cut: str, polish: str,
                 symmetry: str, fluorescence: str, shape: str, location: str) -> "DiamondAttributes":
        """Build attributes from loosely formatted text, canonicalising case."""
        return cls(
            carat=float(carat),
            colour=_canonical_grade(colour),
            clarity=_canonical_grade(clarity),
            cut=_canonical_grade(cut),
            polish=_canonical_grade(polish),
            symmetry=_canonical_grade(symmetry),
            fluorescence=_canonical_grade(fluorescence),
            shape=_canonical_shape(shape),
            location=_canonical_location(location),
        )

    def problems(self) -> List[str]:
        """Rejection reasons for this stone, empty when it is valid."""
        frame = _attributes_frame([self], prices=[1.0])
        reason = _rejection_reasons(frame).iloc[0]
        return [] if reason is None else [reason]


@dataclass(frozen=True)
class PricedDiamond:
    """A stone with its quoted wholesale price in USD."""
    attributes: DiamondAttributes
    price: float
    id: Optional[str] = None


@dataclass(frozen=True)
class RowRejection:
    """One rejected input row.

    ``line`` is the 1-based line in the source CSV (the header is line 1);
    ``position`` is the 0-based record position for in-memory snapshots.
    """
    reason: str
    line: Optional[int] = None
    position: Optional[int] = None


@dataclass
class ValidationReport:
    """Outcome of checking a snapshot (or a CSV file) against the domain rules."""
    n_records: int
    rejections: List[RowRejection] = field(default_factory=list)

    @property
    def n_rejected(self) -> int:
        return len(self.rejections)

    @property
    def n_accepted(self) -> int:
        return self.n_records - self.n_rejected

    @property
    def counts(self) -> Dict[str, int]:
        """Rejections per reason."""
        return dict(Counter(rejection.reason for rejection in self.rejections))

    @property
    def rejection_rate(self) -> float:
        return self.n_rejected / self.n_records if self.n_records else 0.0


@dataclass(frozen=True)
class Snapshot:
    """
    A dated collection of priced diamonds.

    The records live in ``frame`` with one row per stone and the columns
    carat, colour, clarity, cut, polish, symmetry, fluorescence, shape,
    location, price (float USD) and, when ids were supplied, id.
    The frame is treated as read-only; every transformation returns a new Snapshot.
    """
    date: date
    frame: pd.DataFrame = field(repr=False, compare=False)
    ingest_report: Optional[ValidationReport] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_records(cls, snapshot_date: date, records: Iterable[PricedDiamond]) -> "Snapshot":
        records = list(records)
        frame = _attributes_frame([r.attributes for r in records], prices=[r.price for r in records])
        ids = [r.id for r in records]
        if any(i is not None for i in ids):
            frame["id"] = ids
        return cls(date=snapshot_date, frame=frame)

    def __len__(self) -> int:
        return len(self.frame)

    def __iter__(self) -> Iterator[PricedDiamond]:
        return iter(self.records)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Snapshot):
            return NotImplemented
        return self.date == other.date and frames_equal(self.frame, other.frame)

    @property
    def records(self) -> List[PricedDiamond]:
        """Materialise the records in order (slow for very large snapshots)."""
        frame = self.frame
        ids = frame["id"].tolist() if "id" in frame.columns else [None] * len(frame)
        out = []
        for row, record_id in zip(frame.itertuples(index=False), ids):
            attributes = DiamondAttributes(
                carat=float(row.carat), colour=str(row.colour), clarity=str(row.clarity),
                cut=str(row.cut), polish=str(row.polish), symmetry=str(row.symmetry),
                fluorescence=str(row.fluorescence), shape=str(row.shape), location=str(row.location),
            )
            out.append(PricedDiamond(attributes=attributes, price=float(row.price), id=record_id))
        return out

    @property
    def prices(self) -> np.ndarray:
        return self.frame["price"].to_numpy(dtype=float)

    @property
    def carats(self) -> np.ndarray:
        return self.frame["carat"].to_numpy(dtype=float)

    @property
    def ids(self) -> List[str]:
        """Record ids, falling back to the record position when none were given."""
        if "id" in self.frame.columns:
            return [str(i) if i is not None else str(k) for k, i in enumerate(self.frame["id"])]
        return [str(k) for k in range(len(self.frame))]

    def with_prices(self, prices: np.ndarray) -> "Snapshot":
        frame = self.frame.copy()
        frame["price"] = np.asarray(prices, dtype=float)
        return Snapshot(date=self.date, frame=frame)

    def scaled(self, factor: float) -> "Snapshot":
        """Every price multiplied by ``factor``."""
        return self.with_prices(self.prices * factor)

    def subset(self, mask: np.ndarray) -> "Snapshot":
        return Snapshot(date=self.date, frame=self.frame.loc[np.asarray(mask)].reset_index(drop=True))

    def total_value(self) -> float:
        """Exactly rounded sum of prices."""
        return math.fsum(self.prices)


@dataclass(frozen=True)
class ExternalSeries:
    """A named, dated series from another market, e.g. an equity index."""
    name: str
    dates: Tuple[date, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise DataError("dates and values differ in length")
        if len(set(self.dates)) != len(self.dates):
            raise DataError("duplicate date in series")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DataError("series dates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.dates)

    def to_series(self) -> pd.Series:
        return pd.Series(list(self.values), index=pd.DatetimeIndex(list(self.dates)), name=self.name)


def carat_class_index(carats) -> np.ndarray:
    """0-based carat class of each carat (no range check)."""
    return np.searchsorted(CLASS_LOWER_BOUNDS[1:], np.asarray(carats, dtype=float), side="right")


# ===== Canonicalisation helpers =====

def _canonical_grade(value) -> str:
    return str(value).strip().upper()


def _canonical_shape(value) -> str:
    text = str(value).strip()
    return _SHAPE_LOOKUP.get(text.upper(), text)


def _canonical_location(value) -> str:
    return str(value).strip().upper()


def _attributes_frame(attributes: List[DiamondAttributes], prices: List[float]) -> pd.DataFrame:
    frame = pd.DataFrame({
        "carat": np.array([a.carat for a in attributes], dtype=float),
        "colour": [a.colour for a in attributes],
        "clarity": [a.clarity for a in attributes],
        "cut": [a.cut for a in attributes],
        "polish": [a.polish for a in attributes],
        "symmetry": [a.symmetry for a in attributes],
        "fluorescence": [a.fluorescence for a in attributes],
        "shape": [a.shape for a in attributes],
        "location": [a.location for a in attributes],
        "price": np.array(prices, dtype=float),
    })
    return frame


def frames_equal(left: pd.DataFrame, right: pd.DataFrame) -> bool:
    """Field-for-field equality of two snapshot frames, ignoring dtypes."""
    if list(left.columns) != list(right.columns) or len(left) != len(right):
        return False
    for column in left.columns:
        a = left[column].to_numpy(dtype=object if left[column].dtype.kind not in "fi" else float)
        b = right[column].to_numpy(dtype=object if right[column].dtype.kind not in "fi" else float)
        if a.dtype == float and b.dtype == float:
            if not np.array_equal(a, b):
                return False
        elif [str(x) for x in a] != [str(x) for x in b]:
            return False
    return True


# ===== Validation =====

def _rejection_reasons(frame: pd.DataFrame) -> pd.Series:
    """
    First rejection reason per row (None for valid rows).

    Args:
        frame (pd.DataFrame): frame with numeric carat/price (NaN where unparseable)

    Returns:
        pd.Series: object series aligned with ``frame``
    """
    carat = pd.to_numeric(frame["carat"], errors="coerce").to_numpy(dtype=float)
    price = pd.to_numeric(frame["price"], errors="coerce").to_numpy(dtype=float)

    checks = [
        (~np.isfinite(carat) & ~np.isinf(carat), "malformed carat"),
        (carat < MIN_CARAT, "carat below 0.25"),
        (carat >= MAX_CARAT, "carat ≥ 100"),
        (~np.isfinite(price), "malformed price"),
        (price <= 0, "non-positive price"),
    ]
    for column, scale in GRADE_SCALES.items():
        values = frame[column].astype(str).str.upper()
        checks.append((~values.isin(scale).to_numpy(), f"unknown {column} grade"))
    checks.append((~frame["shape"].astype(str).isin(SHAPES).to_numpy(), "unknown shape"))
    location = frame["location"].astype(str).str.strip()
    missing = (location == "") | (location.str.upper() == "NAN")
    checks.append((missing.to_numpy(), "missing location"))

    conditions = [np.asarray(condition, dtype=bool) for condition, _ in checks]
    reasons = [reason for _, reason in checks]
    # np.select takes the first matching condition, so check order is priority order
    picked = np.select(conditions, reasons, default="")
    return pd.Series([r if r else None for r in picked], index=frame.index, dtype=object)


def validate_snapshot(snapshot: Snapshot) -> ValidationReport:
    """
    Check every record of a snapshot against the domain rules.

    The snapshot is not modified; the report counts rejections per category.

    Args:
        snapshot (Snapshot): snapshot to check

    Returns:
        ValidationReport: per-record rejections (``position`` set)
    """
    reasons = _rejection_reasons(snapshot.frame)
    rejections = [RowRejection(reason=reason, position=position)
                  for position, reason in enumerate(reasons) if reason is not None]
    return ValidationReport(n_records=len(snapshot), rejections=rejections)


def accepted_subset(snapshot: Snapshot) -> Snapshot:
    """The snapshot restricted to records that pass validation."""
    reasons = _rejection_reasons(snapshot.frame)
    return snapshot.subset(reasons.isna().to_numpy())


# ===== CSV ingestion =====

def _open_text(source) -> Tuple[TextIO, bool]:
    """Return a text handle for a path, a text stream or a byte stream."""
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline=""), True
    if isinstance(source, (io.TextIOBase,)):
        return source, False
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), False


def snapshot_date_from_name(path: Union[str, Path]) -> Optional[date]:
    """Pick an ISO date out of a file name such as ``snapshot_2022-06-27.csv``."""
    match = _DATE_IN_NAME.search(Path(path).name)
    return date.fromisoformat(match.group(1)) if match else None


def _check_header(header: List[str], expected: List[str]) -> None:
    header = [h.strip() for h in header]
    missing = [c for c in expected if c not in header]
    unknown = [c for c in header if c not in expected]
    if missing or unknown:
        parts = []
        if missing:
            parts.append(f"missing column(s): {', '.join(missing)}")
        if unknown:
            parts.append(f"unknown column(s): {', '.join(unknown)}")
        raise DataError("; ".join(parts))
    if header != expected:
        raise DataError(f"columns out of order: expected {','.join(expected)}")


def _finalise_chunk(rows: List[List[str]], lines: List[int],
                    rejections: List[RowRejection]) -> pd.DataFrame:
    """Turn raw CSV rows into a canonical frame holding only the valid rows."""
    raw = pd.DataFrame(rows, columns=SNAPSHOT_COLUMNS)
    raw = raw.rename(columns={"price_usd": "price"})
    for column in GRADE_COLUMNS:
        raw[column] = raw[column].str.strip().str.upper()
    raw["shape"] = raw["shape"].map(_canonical_shape)
    raw["location"] = raw["location"].str.strip().str.upper()
    raw["carat"] = pd.to_numeric(raw["carat"].str.strip(), errors="coerce")
    raw["price"] = pd.to_numeric(raw["price"].str.strip(), errors="coerce")

    reasons = _rejection_reasons(raw)
    bad = reasons.notna().to_numpy()
    for line, reason in zip(np.asarray(lines)[bad], reasons[bad]):
        rejections.append(RowRejection(reason=reason, line=int(line)))
    good = raw.loc[~bad]
    return good[["carat", "colour", "clarity", "cut", "polish", "symmetry",
                 "fluorescence", "shape", "location", "price"]]


def parse_snapshot_csv(source: Union[str, Path, BinaryIO, TextIO],
                       snapshot_date: Optional[date] = None,
                       max_rejection_rate: float = DEFAULT_MAX_REJECTION_RATE,
                       chunksize: int = 200_000) -> Snapshot:
    """
    Read a snapshot CSV in the documented schema.

    Rows are read in chunks so memory stays proportional to the accepted data.
    Malformed rows are rejected individually and reported with their line number;
    they never abort ingestion unless the rejection rate exceeds the ceiling.

    Args:
        source: file path, text stream or byte stream
        snapshot_date (date): date of the snapshot; taken from the file name when omitted
        max_rejection_rate (float): fraction of rejected rows that turns into a hard error
        chunksize (int): rows validated per batch

    Returns:
        Snapshot: the accepted rows, with ``ingest_report`` describing rejections
    """
    if snapshot_date is None and isinstance(source, (str, Path)):
        snapshot_date = snapshot_date_from_name(source)
    if snapshot_date is None:
        raise DataError("snapshot date not given and not found in the file name")

    handle, owned = _open_text(source)
    rejections: List[RowRejection] = []
    frames: List[pd.DataFrame] = []
    n_records = 0
    try:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("empty file: no header row")
        _check_header(header, SNAPSHOT_COLUMNS)

        rows: List[List[str]] = []
        lines: List[int] = []
        for fields in reader:
            if not fields:
                continue
            n_records += 1
            if len(fields) != len(SNAPSHOT_COLUMNS):
                rejections.append(RowRejection(
                    reason=f"expected {len(SNAPSHOT_COLUMNS)} fields, found {len(fields)}",
                    line=reader.line_num))
                continue
            rows.append(fields)
            lines.append(reader.line_num)
            if len(rows) >= chunksize:
                frames.append(_finalise_chunk(rows, lines, rejections))
                rows, lines = [], []
        if rows:
            frames.append(_finalise_chunk(rows, lines, rejections))
    except csv.Error as e:
        raise DataError(f"unreadable CSV: {e}") from e
    finally:
        if owned:
            handle.close()

    report = ValidationReport(n_records=n_records, rejections=rejections)
    n_valid = report.n_accepted
    if n_valid == 0:
        raise DataError(f"no valid rows ({report.n_rejected} rejected)")
    if report.n_rejected:
        logger.warning("%d of %d rows rejected: %s", report.n_rejected, n_records, report.counts)
    if report.rejection_rate > max_rejection_rate:
        raise DataError(f"rejection rate {report.rejection_rate:.1%} exceeds ceiling "
                        f"{max_rejection_rate:.1%}")

    frame = pd.concat(frames, ignore_index=True)
    for column in list(GRADE_COLUMNS) + ["shape", "location"]:
        frame[column] = frame[column].astype("category")
    logger.info("Parsed %d rows for snapshot %s", len(frame), snapshot_date)
    return Snapshot(date=snapshot_date, frame=frame, ingest_report=report)


def snapshot_to_csv_frame(snapshot: Snapshot) -> pd.DataFrame:
    """The snapshot laid out in the documented CSV column order."""
    frame = snapshot.frame.rename(columns={"price": "price_usd"})
    return frame[SNAPSHOT_COLUMNS]


def write_snapshot_csv(snapshot: Snapshot, destination: Union[str, Path, TextIO]) -> None:
    """
    Write a snapshot in the documented schema.

    Floats are written with the shortest repr that round-trips, so reading the
    file back yields the identical snapshot.
    """
    frame = snapshot_to_csv_frame(snapshot)
    frame.to_csv(destination, index=False, encoding="utf-8", lineterminator="\n")


# ===== External series =====

def import_external_series(path: Union[str, Path], name: Optional[str] = None) -> ExternalSeries:
    """
    Read a two-column ``date,value`` CSV holding another index series.

    Args:
        path: CSV path with ISO-8601 dates
        name (str): series name, defaults to the file stem

    Returns:
        ExternalSeries: points sorted by date
    """
    path = Path(path)
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    _check_header(list(df.columns), SERIES_COLUMNS)

    dates: List[date] = []
    values: List[float] = []
    for offset, (raw_date, raw_value) in enumerate(zip(df["date"], df["value"])):
        line = offset + 2
        try:
            dates.append(date.fromisoformat(raw_date.strip()))
        except ValueError:
            raise DataError(f"line {line}: unparseable date {raw_date!r}")
        try:
            value = float(raw_value)
        except ValueError:
            raise DataError(f"line {line}: unparseable value {raw_value!r}")
        if not math.isfinite(value):
            raise DataError(f"line {line}: unparseable value {raw_value!r}")
        values.append(value)

    seen = set()
    for d in dates:
        if d in seen:
            raise DataError(f"duplicate date {d.isoformat()}")
        seen.add(d)

    order = sorted(range(len(dates)), key=lambda k: dates[k])
    return ExternalSeries(
        name=name or path.stem,
        dates=tuple(dates[k] for k in order),
        values=tuple(values[k] for k in order),
    )


def main():
    """Validate a snapshot file and print the rejection summary."""
    import sys
    if len(sys.argv) < 2:
        print("usage: diamond_data.py SNAPSHOT.csv [YYYY-MM-DD]")
        return
    snapshot_date = date.fromisoformat(sys.argv[2]) if len(sys.argv) > 2 else None
    snapshot = parse_snapshot_csv(sys.argv[1], snapshot_date, max_rejection_rate=1.0)
    report = snapshot.ingest_report
    print(f"Accepted {report.n_accepted}/{report.n_records} rows")
    for reason, count in sorted(report.counts.items()):
        print(f"  {reason}: {count}")


if __name__ == "__main__":
    main()
