import numpy as np
import pytest

import inarboot as ib
from inarboot.errors import InputError


class TestCountSeries:
    def test_from_values_split(self):
        s = ib.CountSeries.from_values([2, 1, 3, 0], p=1)
        assert list(s.presample) == [2]
        assert list(s.body) == [1, 3, 0]
        assert s.p == 1
        assert s.n == 2

    def test_negative_rejected(self):
        with pytest.raises(InputError):
            ib.CountSeries([0], [1, -2, 3])

    def test_non_integer_rejected(self):
        with pytest.raises(InputError):
            ib.CountSeries([0], [1.5, 2.0])

    def test_integral_floats_accepted(self):
        s = ib.CountSeries([0.0], [1.0, 2.0])
        assert s.body.dtype == np.int64

    def test_empty_body_rejected(self):
        with pytest.raises(InputError):
            ib.CountSeries([1], [])

    def test_equality_is_by_value(self):
        a = ib.CountSeries([1], [2, 3])
        b = ib.CountSeries([1], [2, 3])
        c = ib.CountSeries([1], [2, 4])
        assert a == b
        assert a != c


class TestCsv:
    def test_round_trip(self, tmp_path):
        s = ib.CountSeries([2], [1, 3, 0, 5])
        path = tmp_path / "series.csv"
        ib.write_series_csv(s, path)
        back = ib.read_series_csv(path, p=1)
        assert back == s

    def test_header_optional(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("1\n2\n3\n")
        s = ib.read_series_csv(path, p=1)
        assert list(s.presample) == [1]
        assert list(s.body) == [2, 3]

    def test_malformed_line_reported(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("count\n1\nx\n3\n")
        with pytest.raises(InputError, match="line 3"):
            ib.read_series_csv(path, p=1)

    def test_negative_line_reported(self, tmp_path):
        path = tmp_path / "neg.csv"
        path.write_text("1\n-2\n")
        with pytest.raises(InputError, match="line 2"):
            ib.read_series_csv(path, p=1)

    def test_too_short(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("1\n")
        with pytest.raises(InputError):
            ib.read_series_csv(path, p=1)

    def test_presample_rows_must_match_order(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("1\n2\n3\n")
        with pytest.raises(InputError):
            ib.read_series_csv(path, p=1, presample_rows=2)
