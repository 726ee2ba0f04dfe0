"""Multiresolution wavelet representation of closed planar contours."""
from .circconv import circular_convolve, downsample, periodic_extend, upsample
from .contour import (
    FourierContour,
    arc_length,
    canonical_start,
    centroid,
    ensure_anticlockwise,
    eval_contour,
    fourier_coefficients,
    trace_contour,
    truncate_fourier,
)
from .filters import FilterBank, make_filter_bank, refinement_mask, scaling_function_samples
from .groundtruth import (
    GroundTruthRecord,
    PipelineConfig,
    average_midpoint,
    build_record,
    record_curve,
    select_levels,
)
from .initialization import InitConfig, init_approx_coeffs, min_level, phi_hat
from .metrics import MetricReport, dice, hausdorff, l2_error, loss
from .pyramid import (
    Decomposition,
    decompose_full,
    decompose_step,
    level_curve,
    reconstruct_schedule,
    reconstruct_step,
    threshold_details,
)
from .toygen import ToySample, hypocycloid, rasterize, sample_toy

__version__ = "0.1.0"
