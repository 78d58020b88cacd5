"""Bayesian-network inference with conflict, surprise, and rebuttal diagnostics."""

from .errors import (
    BnsentinelError,
    ConflictingEvidenceError,
    EnumerationCapError,
    EvidenceError,
    ImpossibleEvidenceError,
    NetworkError,
    SchemaError,
    ScopeError,
    UnknownVariableError,
)
from .network import (
    BayesNet,
    NodeModel,
    Variable,
    build_network,
    joint_probability,
    parent_configurations,
)
from .inference import (
    EvidenceSession,
    Factor,
    PosteriorTable,
    cpt_factor,
    eliminate,
    forward_sample,
    forward_sample_codes,
    new_session,
)
from .straw import (
    MixtureConfig,
    StrawModel,
    conflict_cj,
    expected_conflict,
    explicit_straw,
    independence_straw,
    mixture_posterior,
    mixture_posterior_weight,
    surprise_cs,
)
from .rebuttal import (
    MonitoredConfigSet,
    RebuttalAssessment,
    RebuttalSpec,
    attach_rebuttal,
    monitor_rebuttals,
    monitored_likelihood_ratio,
    rebuttal_likelihood_ratio,
    rebuttal_posterior_odds,
    select_monitored_configs,
)
from .diagnostics import (
    ConflictTrace,
    ExplanationEntry,
    MixtureTailReport,
    TailReport,
    TraceEntry,
    conflict_trace,
    explain_conflict,
    mixture_tail_check,
    random_explicit_straw,
    random_network,
    suggest_discriminator,
    surprise_tail,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
