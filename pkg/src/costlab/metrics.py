"""Accuracy metrics used to rank every model: MAPE, R2, adjusted R2.

MAPE divides each absolute error by the actual value, per standard practice.
The three-way accuracy banding is closed on the left: 10 percent is still
"below 10" and 20 percent is still "below 20".
"""

from __future__ import annotations

from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateDofError,
    LengthMismatchError,
    NegativeMapeError,
    NonpositiveActualError,
    ZeroSstError,
)


class MapeCategory(Enum):
    BELOW_10 = "below 10"
    BELOW_20 = "below 20"
    UNACCEPTABLE = "unacceptable"

    @property
    def label(self) -> str:
        return self.value


def _as_arrays(actual: Sequence[float], predicted: Sequence[float]):
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.ndim != 1:
        raise LengthMismatchError(
            f"actual and predicted must be equal-length vectors, got {a.shape} vs {p.shape}"
        )
    if a.size == 0:
        raise LengthMismatchError("empty metric inputs")
    return a, p


def mape(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """Mean absolute percentage error: mean(|y - yhat| * 100 / y)."""
    a, p = _as_arrays(actual, predicted)
    if np.any(a <= 0):
        raise NonpositiveActualError("mape requires strictly positive actual values")
    return float(np.mean(np.abs(a - p) * 100.0 / a))


def categorize(mape_pct: float) -> MapeCategory:
    """Three-band accuracy class for a MAPE percentage."""
    if mape_pct < 0:
        raise NegativeMapeError(f"mape must be >= 0, got {mape_pct}")
    if mape_pct <= 10.0:
        return MapeCategory.BELOW_10
    if mape_pct <= 20.0:
        return MapeCategory.BELOW_20
    return MapeCategory.UNACCEPTABLE


def r_squared(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """Coefficient of determination: 1 - SSE/SST. Negative for bad models."""
    a, p = _as_arrays(actual, predicted)
    sst = float(np.sum((a - a.mean()) ** 2))
    if sst == 0.0:
        raise ZeroSstError("actual values are all identical; R2 undefined")
    sse = float(np.sum((a - p) ** 2))
    return 1.0 - sse / sst

def adjusted_r_squared(r2: float, k_predictors: int, n: int) -> float:
    """R2 penalized for predictor count: r2 - (1 - r2) * K / (n - K - 1)."""
    if n <= k_predictors + 1:
        raise DegenerateDofError(
            f"need n > K + 1 for adjustment, got n={n}, K={k_predictors}"
        )
    return r2 - (1.0 - r2) * k_predictors / (n - (k_predictors + 1))
