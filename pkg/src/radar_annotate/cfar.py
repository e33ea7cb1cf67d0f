"""2D cell-averaging CFAR detection on magnitude maps."""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, WindowTooLarge
from .kernels import cfar_threshold_map


@dataclass
class CfarParams:
    """Training/guard half-widths per axis and the target false-alarm rate."""

    train_cells: int = 8
    guard_cells: int = 2
    probability_false_alarm: float = 1e-3

    def __post_init__(self):
        if self.train_cells < 1:
            raise ValidationError("train_cells must be >= 1")
        if self.guard_cells < 0:
            raise ValidationError("guard_cells must be >= 0")
        if not 0.0 < self.probability_false_alarm < 1.0:
            raise ValidationError("probability_false_alarm must be in (0, 1)")

    @property
    def window_size(self) -> int:
        return 2 * (self.train_cells + self.guard_cells) + 1


def cfar_threshold(map2d: np.ndarray, params: CfarParams) -> np.ndarray:
    """Per-cell detection threshold over the map.

    A cell's threshold is ``alpha * mean(training cells)`` with
    ``alpha = N (pfa^(-1/N) - 1)`` for its actual training count N, which
    is exact for exponentially distributed cell power. Edge cells use the
    truncated window.
    """
    arr = np.asarray(map2d, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2D map, got shape {arr.shape}")
    if params.window_size > min(arr.shape):
        raise WindowTooLarge(
            f"CFAR window {params.window_size} exceeds map dims {arr.shape}"
        )
    return cfar_threshold_map(
        arr, params.train_cells, params.guard_cells, params.probability_false_alarm
    )


def cfar_detect(map2d: np.ndarray, params: CfarParams | None = None):
    """Cells whose magnitude exceeds the local CFAR threshold.

    Returns a list of ((row, col), magnitude) in row-major order.
    """
    params = params or CfarParams()
    arr = np.asarray(map2d, dtype=np.float64)
    threshold = cfar_threshold(arr, params)
    rows, cols = np.nonzero(arr > threshold)
    return [((int(r), int(c)), float(arr[r, c])) for r, c in zip(rows, cols)]
