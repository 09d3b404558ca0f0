"""Basins of attraction of a three-species competition model, reconstructed as
implicit surfaces with partition-of-unity interpolation on stable WSVD bases."""
from ._backend import NAME as BACKEND
from .dynamics import (UNRESOLVED, AttractorClassifier, Equilibrium, IntegratorOptions, ModelParams,
                       Trajectory, classify_attractor, classify_stability, equilibria, integrate,
                       jacobian, rhs)
from .kernels import RadialKernel, eval_kernel, kernel_matrix
from .pum import Cover, PuInterpolant, build_cover, evaluate_pu, fit_pu, shepard
from .separatrix import (GridSpec, SeparatrixCloud, SeparatrixPoint, bisect, face_grid,
                         pair_opposite_faces, sample_separatrices)
from .surface import (AugmentedCloud, CoverSpec, ImplicitModel, Mesh, OrientedCloud, augment,
                      estimate_normals, extract_isosurface, fit_implicit)
from .wsvd import (StableInterpolant, WeightScheme, WsvdBasis, build_basis, discrete_inner,
                   evaluate, fit, wsvd_basis)

__version__ = "0.1.0"
