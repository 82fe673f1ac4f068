"""Annihilating-filter based low-rank Hankel matrix completion."""
from aloha.fri import (AnnihilatingFilter, DiracStream, annihilation_residual, dirac_spectrum,
                       minimal_annihilating_filter, numerical_rank, vandermonde_factors)
from aloha.hankel import HankelLift, LiftedMatrix, concat_coils, lift_1d, lift_2d, unlift
from aloha.kernels import BACKEND
from aloha.pipeline import (ReconPlan, ReconResult, reconstruct, reconstruct_dynamic,
                            reconstruct_multicoil, reconstruct_static, rss)
from aloha.sampling import MaskSpec, Phantom, make_mask, nmse
from aloha.solver import FactorPair, SolveReport, admm_complete, lmafit_init
from aloha.weighting import WeightSpectrum, apply_weight, build_weights, haar_weight

__version__ = "0.1.0"
