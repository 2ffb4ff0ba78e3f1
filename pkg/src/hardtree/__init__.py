"""Tree-structured hard thresholding for wavelet denoising in the white-noise model."""

from .coefficients import (
    CoefIndex,
    CoefficientField,
    read_csv,
    squared_distance,
    squared_norm,
    tail_energy,
    write_csv,
    zero_field,
)
from .estimators import (
    EstimateResult,
    KeepMask,
    Threshold,
    apply_mask,
    brute_force_argmin,
    hard_threshold,
    hard_tree,
    hard_tree_reference,
    lepski_haar,
    penalized_cost,
)
from .noise import NoiseConfig, default_m, max_scale, observe, replicate_rng, threshold_level
from .transform import WaveletBasis, analyze, synthesize
from .tree import DyadicNode, TreeScope, ancestors, scope, tree_max

__version__ = "0.1.0"
