"""Count series container and coercion helpers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import DataError

__all__ = ["CountSeries", "as_counts"]


@dataclass
class CountSeries:
    """Ordered non-negative integer observations with optional timestamps."""

    values: np.ndarray
    timestamps: Optional[Sequence[str]] = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 1 or arr.size == 0:
            raise DataError("a count series must be a non-empty 1-d sequence")
        farr = np.asarray(arr, dtype=float)
        if not np.all(np.isfinite(farr)):
            raise DataError("counts must be finite")
        if np.any(farr < 0) or np.any(farr != np.floor(farr)):
            raise DataError("counts must be non-negative integers")
        self.values = np.asarray(farr, dtype=np.int64)
        if self.timestamps is not None and len(self.timestamps) != len(self.values):
            raise DataError("timestamps must align with counts")

    def __len__(self):
        return len(self.values)


def as_counts(series) -> np.ndarray:
    """Coerce a CountSeries or array-like of counts to a float64 array."""
    if isinstance(series, CountSeries):
        return np.asarray(series.values, dtype=float)
    return np.asarray(CountSeries(np.asarray(series)).values, dtype=float)
