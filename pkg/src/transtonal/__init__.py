"""Transientness and tonality indices from wavelet / local cosine log-dimensions."""
__version__ = "0.1.0"

from ._backend import NAME as kernel_backend  # noqa: E402
from .measures import (  # noqa: E402
    LOG_DIM_CONSTANT,
    Basis,
    DimensionReport,
    SignificanceMap,
    TheoryReport,
    indices_from_signal,
    log_dimension,
    true_indices,
)
from .transforms import TransformPlan, cosine_plan, forward, gram, inverse, wavelet_plan  # noqa: E402
