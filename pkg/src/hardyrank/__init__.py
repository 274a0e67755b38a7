"""Numerical workbench for ranks of co-doubly commuting submodules of H^2(D^2).

Everything lives on degree-N coefficient truncations; finite Blaschke
products are the only inner functions represented.
"""
from .bidisc import (
    BidiscVector,
    SubspaceFrame,
    TiltedCoefficients,
    compressed_pair,
    defect_projection,
    e_frames,
    shift_pair,
    submodule_frame,
    theta_square_identity,
)
from .blaschke import BlaschkeProduct, CoeffVector, evaluate, multiplication_matrix, taylor_coefficients
from .model_space import (
    Conjugation,
    ModelSpaceFrame,
    beurling_generator_check,
    compressed_shift,
    conjugation,
    model_projector,
    tm_frame,
)
from .rank_engine import (
    KrylovReport,
    RankCertificate,
    bilinear_vanishing,
    certify_rank,
    coverage,
    krylov_span,
    pairing_check,
    semi_invariant_compression,
    single_generator_deficiency,
    witness,
)

__version__ = "0.1.0"
