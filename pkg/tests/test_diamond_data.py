import io
from datetime import date

import numpy as np
import pytest

from conftest import BASELINE_DATE, SNAPSHOT_HEADER, make_stone
from diamond_data import (
    DataError,
    DiamondAttributes,
    PricedDiamond,
    Snapshot,
    accepted_subset,
    carat_class_index,
    import_external_series,
    parse_snapshot_csv,
    snapshot_date_from_name,
    validate_snapshot,
    write_snapshot_csv,
)

GOOD_ROW = "1.01,D,IF,EX,Round,EX,EX,NON,NY,12000.00"


class TestParseSnapshot:

    def test_single_row_maps_fields(self, snapshot_csv):
        snapshot = parse_snapshot_csv(snapshot_csv([GOOD_ROW]))
        assert snapshot.date == BASELINE_DATE
        [record] = snapshot.records
        assert record.attributes == make_stone()
        assert record.price == 12000.0

    def test_rows_rejected_with_line_numbers(self, snapshot_csv):
        rows = [GOOD_ROW,
                "0.20,D,IF,EX,Round,EX,EX,NON,NY,500",
                "150,D,IF,EX,Round,EX,EX,NON,NY,500",
                "1.2,Z,IF,EX,Round,EX,EX,NON,NY,5000",
                "1.2,D,IF,EX,Round,EX,EX,NON,NY,0",
                "1.2,D,IF,EX,Round,EX,EX,NON,,5000",
                "abc,D,IF,EX,Round,EX,EX,NON,NY,5000",
                "1.2,D,IF,EX,Round,EX",
                GOOD_ROW]
        snapshot = parse_snapshot_csv(snapshot_csv(rows), max_rejection_rate=1.0)
        assert len(snapshot) == 2
        report = snapshot.ingest_report
        reasons = {r.line: r.reason for r in report.rejections}
        assert reasons[3] == "carat below 0.25"
        assert reasons[4] == "carat ≥ 100"
        assert reasons[5] == "unknown colour grade"
        assert reasons[6] == "non-positive price"
        assert reasons[7] == "missing location"
        assert reasons[8] == "malformed carat"
        assert reasons[9].startswith("expected 10 fields")
        assert report.n_records == 9

    def test_rejection_ceiling_is_a_hard_error(self, snapshot_csv):
        rows = [GOOD_ROW] * 3 + ["0.20,D,IF,EX,Round,EX,EX,NON,NY,500"]
        with pytest.raises(DataError, match="rejection rate"):
            parse_snapshot_csv(snapshot_csv(rows))

    def test_no_valid_rows(self, snapshot_csv):
        with pytest.raises(DataError, match="no valid rows"):
            parse_snapshot_csv(snapshot_csv(["0.20,D,IF,EX,Round,EX,EX,NON,NY,500"]), max_rejection_rate=1.0)

    @pytest.mark.parametrize("header,message", [
        ("carat,colour,clarity,cut,shape,polish,symmetry,fluorescence,price_usd", "missing column"),
        ("carat,colour,clarity,cut,shape,polish,symmetry,fluorescence,location,price_usd,extra", "unknown column"),
    ])
    def test_bad_header(self, tmp_path, header, message):
        path = tmp_path / "snapshot_2022-06-27.csv"
        path.write_text(header + "\n", encoding="utf-8")
        with pytest.raises(DataError, match=message):
            parse_snapshot_csv(path)

    def test_date_required(self):
        stream = io.StringIO(SNAPSHOT_HEADER + GOOD_ROW + "\n")
        with pytest.raises(DataError, match="snapshot date"):
            parse_snapshot_csv(stream)

    def test_byte_stream_with_explicit_date(self):
        stream = io.BytesIO((SNAPSHOT_HEADER + GOOD_ROW + "\n").encode("utf-8"))
        snapshot = parse_snapshot_csv(stream, date(2023, 1, 2))
        assert snapshot.date == date(2023, 1, 2)
        assert len(snapshot) == 1

    def test_loose_formatting_is_canonicalised(self, snapshot_csv):
        snapshot = parse_snapshot_csv(snapshot_csv(["1.01, d ,vvs1,ex,ROUND,ex,vg,non, ny ,12000"]))
        attributes = snapshot.records[0].attributes
        assert (attributes.colour, attributes.clarity, attributes.shape, attributes.location) == \
            ("D", "VVS1", "Round", "NY")

    def test_small_chunks_give_the_same_snapshot(self, baseline, tmp_path):
        path = tmp_path / "snapshot_2022-06-27.csv"
        write_snapshot_csv(baseline, path)
        assert parse_snapshot_csv(path, chunksize=97) == parse_snapshot_csv(path)


def test_csv_round_trip(baseline, tmp_path):
    path = tmp_path / "snapshot_2022-06-27.csv"
    write_snapshot_csv(baseline, path)
    parsed = parse_snapshot_csv(path)
    assert parsed == baseline
    assert np.array_equal(parsed.prices, baseline.prices)


def test_date_from_name():
    assert snapshot_date_from_name("data/snapshot_2022-06-27.csv") == date(2022, 6, 27)
    assert snapshot_date_from_name("prices.csv") is None


class TestValidateSnapshot:

    def _snapshot(self, *stones):
        return Snapshot.from_records(BASELINE_DATE, [PricedDiamond(stone, price) for stone, price in stones])

    def test_all_valid(self):
        report = validate_snapshot(self._snapshot((make_stone(), 1000.0), (make_stone(carat=0.3), 200.0)))
        assert report.n_rejected == 0

    def test_zero_price(self):
        report = validate_snapshot(self._snapshot((make_stone(), 0.0), (make_stone(), 10.0)))
        assert report.counts == {"non-positive price": 1}
        assert report.rejections[0].position == 0

    def test_unknown_colour(self):
        snapshot = self._snapshot((make_stone(colour="Z"), 1000.0))
        assert validate_snapshot(snapshot).counts == {"unknown colour grade": 1}

    def test_order_independent(self):
        stones = [(make_stone(colour="Z"), 1.0), (make_stone(), 2.0), (make_stone(carat=0.1), 3.0)]
        forward = validate_snapshot(self._snapshot(*stones))
        backward = validate_snapshot(self._snapshot(*reversed(stones)))
        assert forward.counts == backward.counts
        assert set(accepted_subset(self._snapshot(*stones)).prices) == {2.0}


def test_attributes_from_raw():
    stone = DiamondAttributes.from_raw("0.3", "g", "vs1", "ex", "vg", "vg", "non", "round", "ny")
    assert stone.problems() == []
    assert stone.shape == "Round"
    assert DiamondAttributes.from_raw(0.3, "g", "vs1", "ex", "vg", "vg", "non", "blob", "ny").problems() == \
        ["unknown shape"]


@pytest.mark.parametrize("carat,expected", [
    (0.25, 0), (0.49, 0), (0.5, 1), (0.99, 1), (1.0, 2), (4.99, 5), (5.0, 6), (99.99, 6)])
def test_carat_class_index(carat, expected):
    assert int(carat_class_index(carat)) == expected


class TestExternalSeries:

    def _write(self, tmp_path, text):
        path = tmp_path / "ftse.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_sorted(self, tmp_path):
        series = import_external_series(self._write(
            tmp_path, "date,value\n2022-01-17,3\n2022-01-03,1\n2022-01-10,2\n"))
        assert series.name == "ftse"
        assert series.dates == (date(2022, 1, 3), date(2022, 1, 10), date(2022, 1, 17))
        assert series.values == (1.0, 2.0, 3.0)

    def test_duplicate_date(self, tmp_path):
        with pytest.raises(DataError, match="duplicate date 2022-01-03"):
            import_external_series(self._write(tmp_path, "date,value\n2022-01-03,1\n2022-01-03,2\n"))

    def test_unparseable_value(self, tmp_path):
        with pytest.raises(DataError, match="line 3"):
            import_external_series(self._write(tmp_path, "date,value\n2022-01-03,1\n2022-01-10,n/a\n"))
