"""Observed count series with the presample convention.

A series of model order p consists of p presample values followed by the
body X_0, ..., X_n.  Conditional likelihoods run over t = 0..n, each term
conditioning on the p values preceding X_t.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError


def _as_count_array(values, what: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise InputError(f"{what} must be one-dimensional")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        rounded = np.asarray(arr, dtype=float)
        if not np.all(np.isfinite(rounded)) or np.any(rounded != np.floor(rounded)):
            raise InputError(f"{what} must contain integers")
        arr = rounded.astype(np.int64)
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise InputError(f"{what} must be non-negative")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CountSeries:
    """Presample (length p) plus body X_0..X_n (length n+1)."""

    presample: np.ndarray = field(repr=False)
    body: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "presample", _as_count_array(self.presample, "presample"))
        object.__setattr__(self, "body", _as_count_array(self.body, "body"))
        if self.body.size < 1:
            raise InputError("series body must contain at least one value")

    @property
    def p(self) -> int:
        return self.presample.size

    @property
    def n(self) -> int:
        """Index of the last body value; the body holds n+1 observations."""
        return self.body.size - 1

    def values(self) -> np.ndarray:
        """Presample and body concatenated."""
        return np.concatenate([self.presample, self.body])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CountSeries)
            and np.array_equal(self.presample, other.presample)
            and np.array_equal(self.body, other.body)
        )

    def __repr__(self) -> str:
        return f"CountSeries(p={self.p}, n={self.n})"

    @classmethod
    def from_values(cls, values, p: int) -> "CountSeries":
        """Split a flat value list: first p entries are the presample."""
        arr = _as_count_array(values, "values")
        if p < 0 or arr.size <= p:
            raise InputError(f"need more than p={p} values, got {arr.size}")
        return cls(arr[:p], arr[p:])


def read_series_csv(path, p: int, presample_rows: int | None = None) -> CountSeries:
    """Read a one-column CSV of counts (optional "count" header).

    By default the first p rows are taken as the presample; `presample_rows`
    exists to state that explicitly and must then equal p.
    """
    if presample_rows is None:
        presample_rows = p
    if presample_rows != p:
        raise InputError(f"presample_rows must equal the model order p={p}")
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if lineno == 1 and text.lower() == "count":
                continue
            try:
                value = int(text)
            except ValueError:
                raise InputError(f"line {lineno}: not an integer: {text!r}") from None
            if value < 0:
                raise InputError(f"line {lineno}: negative count: {value}")
            values.append(value)
    if len(values) <= p:
        raise InputError(f"file holds {len(values)} counts; need more than p={p}")
    return CountSeries.from_values(values, p)


def write_series_csv(series: CountSeries, path, header: bool = True) -> None:
    """Write presample rows followed by body rows, one integer per line."""
    lines = []
    if header:
        lines.append("count")
    lines.extend(str(int(v)) for v in series.values())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
