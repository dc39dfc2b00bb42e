"""covercraft: covering-space constructions, short lattice bases and
stable-norm certificates on periodic graphs, with exact arithmetic."""

from .abelian import (
    PresentedAbelianGroup,
    WordSet,
    defining_exponent,
    lattice_addition_oracle,
    presented_group_from_table,
    smith_normal_form,
    sumset_power,
)
from .errors import (
    CertificateError,
    CovercraftError,
    ModelInvalidError,
    PerturbRadiusError,
    ResourceBudgetError,
    ScenarioParseError,
)
from .ghspace import FiniteMetricSpace, gh_distance_exact, quotient_space, spaces_isometric
from .monodromy import (
    ConditionReport,
    CoverWindow,
    CoveringVerdict,
    MonodromyInput,
    build_cover_group,
    build_cover_window,
    build_gamma_tilde,
    check_conditions,
    covering_verdict,
    label_collisions,
    overlap_word_set,
    verify_local_homeomorphism,
)
from .periodic import (
    Ball,
    LatticeAction,
    PeriodicGraph,
    QuotientView,
    VoltageGroup,
    derived_ball,
    displacement,
    quotient_diameter,
)
from .shortbasis import (
    ShortBasisResult,
    gromov_short_basis,
    milnor_svarc_generators,
    verify_separation,
)
from .stable import (
    JohnTransform,
    NormModel,
    SublatticeCertificate,
    analytic_norm_model,
    asymptotic_volume_estimate,
    cs_sublattice,
    john_transform,
    norm_model_from_action,
    stable_norm_estimate,
)

__version__ = "0.1.0"
