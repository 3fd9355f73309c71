"""Numerical analytic generators of one-parameter groups on finite carriers."""

from __future__ import annotations

from .continuation import (
    CounterexampleF,
    Strip,
    alpha_z_spectral,
    composition_check,
    counterexample_norm_gap,
    counterexample_weak_continuity,
    three_lines_check,
)
from .errors import AnagenError
from .graph_structures import (
    GraphElement,
    dual_generator_check,
    graph_intersection_check,
    graph_product,
    hinfty_basis,
    kaplansky_truncation,
    natural_involution,
    selfadjoint_part,
    tensor_uniqueness_check,
)
from .group_models import (
    DiagonalGroup,
    EmbeddedCornerGroup,
    GeometricSequence,
    ImplementedGroup,
    OneParamGroup,
    SequenceModel,
    apply,
    build_corner,
    build_modular_group,
    in_domain_sequence,
)
from .matrix_core import PositiveMatrix, eig_hermitian, matrix_power, subspace_equal
from .modular import (
    FaithfulState,
    MarkovSetup,
    ModularData,
    build_markov,
    build_modular,
    verify_bcm_closure,
    verify_bcm_commutation,
    verify_j_intertwine,
    verify_kms,
)
from .report import CheckReport
from .smearing import QuadratureScheme, SmearingOperator, smear, smear_closed_form, smear_shifted
from .tolerances import DEFAULT, Tolerances

__version__ = "0.1.0"
