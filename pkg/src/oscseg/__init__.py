"""Image segmentation by frequency locking of locally coupled oscillators.

A grayscale image is mapped onto a 2-D grid of nonlinear oscillators (one
per pixel) whose natural frequencies encode pixel intensity.  Nearest
neighbor coupling pulls similar pixels onto a common locked frequency;
reading out the per-node frequency map and clustering it yields the
segmentation.  An intensity-histogram (Otsu) baseline and noise-injection
utilities support side-by-side evaluation.
"""

from .errors import (ConfigError, DegenerateValues, DimensionMismatch,
                     InvalidSize, MalformedHeader, NumericalBlowup,
                     OscsegError, PgmError, TruncatedData, UnsupportedMaxval)
from .frequency import (FrequencyHistogram, FrequencyMap, NodeFlag,
                        crossing_detector, estimate_frequency,
                        frequency_histogram, interpolate_crossing)
from .images import (GrayImage, NoiseSpec, add_gaussian_noise,
                     generate_quadrant_image, generate_two_region_image,
                     quadrant_reference, read_pgm, write_pgm)
from .models import (MODELS, BzParams, BzState, MemsParams, MemsState,
                     ModelInfo, NeuralParams, NeuralState, bz_derivative,
                     bz_sigmoid, fixed_point_check_inactive, mems_derivative,
                     model_for_params, neural_derivative)
from .network import (CouplingSpec, NetworkState, SimConfig, build_network,
                      coupling_term, default_sim_config, map_intensity,
                      neighborhood, rk4_step, rk4_update, simulate,
                      simulate_single)
from .segmentation import (LabelMap, SegmentationMetrics, cluster_by_gap,
                           mislabel_rate, otsu_threshold,
                           region_match_accuracy, segment_binary)

__version__ = "0.1.0"

__all__ = [
    "BzParams", "BzState", "ConfigError", "CouplingSpec", "DegenerateValues",
    "DimensionMismatch", "FrequencyHistogram", "FrequencyMap", "GrayImage",
    "InvalidSize", "LabelMap", "MODELS", "MalformedHeader", "MemsParams",
    "MemsState", "ModelInfo", "NetworkState", "NeuralParams", "NeuralState",
    "NodeFlag", "NoiseSpec", "NumericalBlowup", "OscsegError", "PgmError",
    "SegmentationMetrics", "SimConfig", "TruncatedData", "UnsupportedMaxval",
    "add_gaussian_noise", "build_network", "bz_derivative", "bz_sigmoid",
    "cluster_by_gap", "coupling_term", "crossing_detector",
    "default_sim_config", "estimate_frequency", "fixed_point_check_inactive",
    "frequency_histogram", "generate_quadrant_image",
    "generate_two_region_image", "interpolate_crossing", "map_intensity",
    "mems_derivative", "mislabel_rate", "model_for_params",
    "neighborhood", "neural_derivative", "otsu_threshold",
    "quadrant_reference", "read_pgm", "region_match_accuracy", "rk4_step",
    "rk4_update", "segment_binary", "simulate", "simulate_single",
    "write_pgm",
]
