"""Consistent history families over finite-dimensional quantum systems.

Projector logic with the meaninglessness rule, frameworks and their
refinements, chain-ket consistency checking, extended-Born probabilities,
framework-relative inference, a gallery of worked scenarios, and a
scenario-file CLI (``histories-lab``).
"""

from . import errors
from .numerics import DEFAULT_TOL, Ket, Operator, approx_equal, hermitian_eigensystem, tensor_product
from .qlogic import (
    DecompositionOfIdentity,
    EventAlgebra,
    Observable,
    Projector,
    common_refinement,
    conjunction,
    disjunction,
    event_algebra,
    frameworks_compatible,
    intersection_projector,
    negation,
    observable_decomposition,
    projector_from_ket,
    validate_pdi,
)
from .histories import (
    ConsistencyReport,
    HistoryFamily,
    ProbabilityTable,
    StepUnitaries,
    Y0,
    backward_pre_probability,
    born_probability,
    chain_ket,
    consistency_check,
    evolve,
    history_probabilities,
    make_family,
    probability_via_preprobability,
)
from .inference import (
    AgreementReport,
    Event,
    FamilyPairClass,
    classify_family_pair,
    conditional,
    cross_framework_agreement,
    joint_distribution,
    marginal,
)
from .gallery import SCENARIO_NAMES, Scenario, build_scenario, run_expected

__version__ = "0.1.0"
