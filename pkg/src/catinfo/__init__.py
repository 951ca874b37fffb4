"""Information-theoretic analysis of multi-way contingency tables.

Sample (conditional) mutual information on the likelihood-ratio scale,
its split into interaction and partial association, IPF-fitted
hierarchical log-linear models, backward CMI-deletion model construction,
grouped logit models and a resampling goodness-of-fit study.
"""

from .chisq import chi_square_sf
from .errors import (
    CatInfoError,
    DegenerateTableError,
    DomainError,
    FormulaError,
    RankDeficiencyError,
    SchemaError,
)
from .info import (
    CMITerm,
    DecompositionReport,
    GroupPartition,
    InfoStat,
    chain_decompose,
    conditional_mutual_information,
    entropy,
    mutual_information,
)
from .kernels import BACKEND
from .logit import (
    LogitFit,
    LogitModel,
    aic_neighborhood_search,
    fit_logit,
    loglinear_equivalence_check,
    mi_logit_construct,
    parse_logit,
)
from .loglinear import (
    LoglinearFit,
    ModelFormula,
    TwoStepResult,
    closure_and_params,
    interaction_stat,
    ipf_fit,
    parse_formula,
    partial_association,
    resolve_interaction,
    two_step_test,
)
from .selection import (
    CandidateModel,
    InformationModel,
    backward_select,
    peel_decompose,
    rank_dispensability,
    terms_to_candidates,
)
from .simulation import (
    AcceptanceReport,
    SimulationConfig,
    run_acceptance_study,
    sample_empirical_multinomial,
    sample_model_parametric,
    sample_subset,
)
from .table import (
    ContingencyTable,
    ProbabilityTable,
    VariableSpec,
    compound,
    from_array,
    from_cell_counts,
    from_records,
    marginalize,
    to_pdf,
)

__version__ = "0.1.0"
