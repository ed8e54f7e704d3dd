import logging

import numpy as np
import pytest

from peci.core import Direction
from peci.dataio import (
    RESULT_FIELDS,
    MultiColumnWarning,
    ResultRecord,
    find_pair_files,
    load_metadata,
    load_pair_file,
    read_results,
    write_results,
)
from peci.errors import ParseError, TooFewRows


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestPairFile:
    def test_basic(self, tmp_path):
        p = load_pair_file(write(tmp_path, "a.txt", "0 1\n1 2\n2 4\n"))
        assert p.x.tolist() == [0, 1, 2] and p.y.tolist() == [1, 2, 4]

    def test_blank_lines_and_tabs(self, tmp_path):
        p = load_pair_file(write(tmp_path, "a.txt", "\n0\t1\n\n  1   2  \n2 4\n\n"))
        assert p.x.tolist() == [0, 1, 2]

    def test_one_row(self, tmp_path):
        with pytest.raises(TooFewRows):
            load_pair_file(write(tmp_path, "a.txt", "0 1\n"))

    def test_four_columns(self, tmp_path):
        with pytest.warns(MultiColumnWarning):
            p = load_pair_file(write(tmp_path, "a.txt", "0 1 9 9\n1 2 9 9\n2 4 9 9\n"))
        assert p.y.tolist() == [1, 2, 4]

    def test_scientific_notation(self, tmp_path):
        p = load_pair_file(write(tmp_path, "a.txt", "1e-3 2.5E+2\n-3.0e0 .5\n4 5\n"))
        assert p.x.tolist() == [0.001, -3.0, 4.0] and p.y.tolist() == [250.0, 0.5, 5.0]

    def test_decimal_comma_rejected(self, tmp_path):
        with pytest.raises(ParseError, match=":2:"):
            load_pair_file(write(tmp_path, "a.txt", "0 1\n1,5 2\n2 4\n"))

    def test_short_row_line_number(self, tmp_path):
        with pytest.raises(ParseError) as err:
            load_pair_file(write(tmp_path, "a.txt", "0 1\n1 2\n7\n2 4\n"))
        assert err.value.line == 3 and "a.txt:3:" in str(err.value)

    def test_non_finite_rejected(self, tmp_path):
        with pytest.raises(ParseError):
            load_pair_file(write(tmp_path, "a.txt", "0 1\nnan 2\n2 4\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="cannot read"):
            load_pair_file(tmp_path / "nope.txt")


class TestMetadata:
    def test_canonical_row(self, tmp_path):
        md = load_metadata(write(tmp_path, "meta", "0001 1 1 2 2 1.0\n"))
        assert md["0001"] == (Direction.X_CAUSES_Y, 1.0)

    def test_reverse_row(self, tmp_path):
        md = load_metadata(write(tmp_path, "meta", "0002 2 2 1 1 0.5\n"))
        assert md["0002"] == (Direction.Y_CAUSES_X, 0.5)

    def test_multidimensional_excluded(self, tmp_path, caplog):
        with caplog.at_level(logging.INFO, logger="peci.dataio"):
            md = load_metadata(write(tmp_path, "meta", "0001 1 1 2 2 1\n0052 1 2 3 4 1\n"))
        assert "0052" not in md and md.excluded == ["0052"]
        assert "0052" in caplog.text

    def test_empty(self, tmp_path):
        md = load_metadata(write(tmp_path, "meta", ""))
        assert md == {} and md.excluded == []

    def test_malformed(self, tmp_path):
        with pytest.raises(ParseError, match=":2:"):
            load_metadata(write(tmp_path, "meta", "0001 1 1 2 2 1\n0002 a 1 2 2 1\n"))


def test_find_pair_files(tmp_path):
    for name in ("pair0001.txt", "pair0002.txt", "pair0001_des.txt", "README", "pairmeta.txt"):
        write(tmp_path, name, "")
    assert sorted(find_pair_files(tmp_path)) == ["0001", "0002"]


RECORDS = [
    ResultRecord("0001", "igci", 0, 1, "none", "x->y", 0.0, True, 0.0),
    ResultRecord("0002", "wpeci-tanh", 261, 1000, "tanh", "y->x", -12.345678901234567, False, 1.5e-3),
]


class TestResults:
    def test_fields(self):
        assert RESULT_FIELDS == ("id", "method", "k", "T", "weighting", "decision", "vote_sum", "correct", "elapsed")

    def test_empty_csv_header_only(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results(path, [], "csv")
        assert path.read_text() == ",".join(RESULT_FIELDS) + "\n"

    def test_one_record(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results(path, RECORDS[:1], "csv")
        assert len(path.read_text().splitlines()) == 2

    @pytest.mark.parametrize("fmt", ["csv", "jsonl"])
    def test_round_trip(self, tmp_path, fmt):
        path = tmp_path / f"r.{fmt}"
        write_results(path, RECORDS, fmt)
        assert read_results(path) == RECORDS

    def test_jsonl_field_order(self, tmp_path):
        path = tmp_path / "r.jsonl"
        write_results(path, RECORDS, "jsonl")
        first = path.read_text().splitlines()[0]
        positions = [first.index(f'"{f}"') for f in RESULT_FIELDS]
        assert positions == sorted(positions)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            write_results(tmp_path / "r", RECORDS, "xml")

    def test_coercion(self):
        r = ResultRecord("1", "igci", "3", "4", "none", "x->y", "1.5", "True", "0")
        assert (r.k, r.T, r.vote_sum, r.correct) == (3, 4, 1.5, True)
        assert np.isclose(r.elapsed, 0.0)
