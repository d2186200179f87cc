"""Variational segmentation with a convex-shape projection and soft
thresholding-dynamics regularization.

The solver alternates a closed-form regularized-sigmoid step with an
active-set projection that forces every connected component of the
thresholded output to be convex; a sublevel-set lifting extends it to
nested multiphase segmentation.
"""

from .convexity import (
    ConvexityReport,
    active_set,
    isoperimetric_ratio,
    project_convex,
    verify_convex,
    violation_field,
)
from .dual import binary_entropy, data_energy, lse, regularized_sigmoid
from .field import (
    MIRROR,
    ZERO_BACKGROUND,
    Kernel,
    ball_kernel,
    convolve,
    gaussian_kernel,
    gradient_magnitude,
)
from .pipeline import (
    dice,
    generate_phantom,
    read_feature_file,
    read_image_pgm,
    region_variance_feature,
    smooth_dice_loss,
    write_feature_file,
)
from .regularizer import edge_weight, td_energy, td_perimeter, td_subgradient
from .solver import EnergyTrace, SolverConfig, cs_std_solve, cs_std_solve_multiphase, total_energy
from .sublevel import label_to_sublevel, project_nested, sublevel_to_label

__version__ = "0.1.0"

__all__ = [
    "ConvexityReport",
    "EnergyTrace",
    "Kernel",
    "MIRROR",
    "SolverConfig",
    "ZERO_BACKGROUND",
    "active_set",
    "ball_kernel",
    "binary_entropy",
    "convolve",
    "cs_std_solve",
    "cs_std_solve_multiphase",
    "data_energy",
    "dice",
    "edge_weight",
    "gaussian_kernel",
    "generate_phantom",
    "gradient_magnitude",
    "isoperimetric_ratio",
    "label_to_sublevel",
    "lse",
    "project_convex",
    "project_nested",
    "read_feature_file",
    "read_image_pgm",
    "region_variance_feature",
    "regularized_sigmoid",
    "smooth_dice_loss",
    "sublevel_to_label",
    "td_energy",
    "td_perimeter",
    "td_subgradient",
    "total_energy",
    "verify_convex",
    "violation_field",
    "write_feature_file",
]
