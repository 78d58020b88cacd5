"""Straw evidence models and the conflict / surprise indicators.

A straw model is a deliberately simple alternative distribution over the
evidence variables, used only to flag model failure: the surprise index is
the log2 ratio of straw to assessed evidence probability, so positive
values mean the straw fits the observed evidence better. The classic
conflict index is the special case whose straw multiplies the network's
original prior marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    EnumerationCapError,
    EvidenceError,
    ImpossibleEvidenceError,
    ScopeError,
)
from .inference import EvidenceSession, PosteriorTable, eliminate
from .network import BayesNet

KIND_INDEPENDENCE = "independence-of-priors"
KIND_EXPLICIT = "explicit-table"

EXPLICIT_SUM_TOL = 1e-9
LN2 = math.log(2.0)

# expected_conflict and the dense straw tables refuse to enumerate more
# configurations than this
DEFAULT_ENUMERATION_CAP = 2**20


@dataclass(frozen=True, eq=False)
class StrawModel:
    """An alternative distribution over a fixed evidence scope.

    ``independence-of-priors`` straws score an assignment as the product of
    the network's original prior marginals; ``explicit-table`` straws carry
    a full joint table over the scope. Assignments over a subset of the
    scope are marginalized.
    """

    kind: str
    evidence_scope: tuple[str, ...]
    outcome_labels: tuple[tuple[str, ...], ...]
    priors: tuple[np.ndarray, ...] | None = None
    table: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "evidence_scope", tuple(self.evidence_scope))
        object.__setattr__(
            self, "outcome_labels", tuple(tuple(o) for o in self.outcome_labels)
        )
        if self.kind not in (KIND_INDEPENDENCE, KIND_EXPLICIT):
            raise ScopeError(f"unknown straw kind {self.kind!r}")
        if len(set(self.evidence_scope)) != len(self.evidence_scope):
            raise ScopeError("straw scope lists a variable twice")
        if self.kind == KIND_INDEPENDENCE:
            if self.priors is None or self.table is not None:
                raise ScopeError("independence straw carries priors, not a table")
        else:
            if self.table is None or self.priors is not None:
                raise ScopeError("explicit straw carries a table, not priors")
            total = float(self.table.sum())
            if abs(total - 1.0) > EXPLICIT_SUM_TOL:
                raise ScopeError(
                    f"explicit straw table sums to {total:.12g}, not 1 within "
                    f"{EXPLICIT_SUM_TOL}"
                )

    def _axis(self, variable: str) -> int:
        try:
            return self.evidence_scope.index(variable)
        except ValueError:
            raise ScopeError(
                f"{variable!r} is outside the straw scope {self.evidence_scope}"
            ) from None

    def evidence_probability(self, assignment: Mapping[str, str]) -> float:
        """P of an assignment over (a subset of) the scope; rest marginalized."""
        if self.kind == KIND_INDEPENDENCE:
            p = 1.0
            for v, label in assignment.items():
                axis = self._axis(v)
                p *= float(self.priors[axis][self.outcome_labels[axis].index(label)])
            return p
        arr = self.table
        # slice bound axes from the highest index down so positions stay valid
        bound = sorted(
            ((self._axis(v), label) for v, label in assignment.items()), reverse=True
        )
        for axis, label in bound:
            arr = np.take(arr, self.outcome_labels[axis].index(label), axis=axis)
        return float(arr.sum())

    def log2_evidence(self, assignment: Mapping[str, str]) -> float:
        p = self.evidence_probability(assignment)
        return math.log2(p) if p > 0.0 else -math.inf

    def log2_scope_table(
        self, scope: Sequence[str] | None = None, cap: int = DEFAULT_ENUMERATION_CAP
    ) -> np.ndarray:
        """Dense log2 table over ``scope`` (default: the full straw scope)."""
        scope = self.evidence_scope if scope is None else tuple(scope)
        axes = [self._axis(v) for v in scope]
        if len(set(axes)) != len(axes):
            raise ScopeError("scope lists a variable twice")
        cells = int(np.prod([len(self.outcome_labels[a]) for a in axes], dtype=np.int64))
        if cells > cap:
            raise EnumerationCapError(
                f"straw table over {scope} has {cells} cells, cap is {cap}"
            )
        with np.errstate(divide="ignore"):
            if self.kind == KIND_INDEPENDENCE:
                out = np.zeros([len(self.outcome_labels[a]) for a in axes])
                for i, a in enumerate(axes):
                    shape = [1] * len(axes)
                    shape[i] = len(self.outcome_labels[a])
                    out = out + np.log2(self.priors[a]).reshape(shape)
                return out
            drop = tuple(sorted(set(range(len(self.evidence_scope))) - set(axes)))
            arr = self.table.sum(axis=drop) if drop else self.table
            kept = [a for a in range(len(self.evidence_scope)) if a not in drop]
            arr = arr.transpose([kept.index(a) for a in axes])
            return np.log2(arr)


def independence_straw(net: BayesNet, evidence_scope: Sequence[str]) -> StrawModel:
    """The straw that multiplies the net's original prior marginals."""
    scope = tuple(evidence_scope)
    priors = tuple(
        eliminate(net, (v,), {}).normalize().table() for v in scope
    )
    labels = tuple(net.variable(v).outcomes for v in scope)
    return StrawModel(
        kind=KIND_INDEPENDENCE,
        evidence_scope=scope,
        outcome_labels=labels,
        priors=priors,
    )


def explicit_straw(
    net: BayesNet, evidence_scope: Sequence[str], table: np.ndarray
) -> StrawModel:
    """A straw backed by an explicit joint table over the scope.

    The table is validated against the net's outcome spaces, must sum to 1
    within ``EXPLICIT_SUM_TOL``, and is renormalized exactly.
    """
    scope = tuple(evidence_scope)
    labels = tuple(net.variable(v).outcomes for v in scope)
    shape = tuple(len(o) for o in labels)
    arr = np.asarray(table, dtype=np.float64).reshape(shape)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ScopeError("straw table entries must be finite and non-negative")
    total = float(arr.sum())
    if abs(total - 1.0) > EXPLICIT_SUM_TOL:
        raise ScopeError(
            f"straw table sums to {total:.12g}, not 1 within {EXPLICIT_SUM_TOL}"
        )
    arr = arr / total
    arr.setflags(write=False)
    return StrawModel(
        kind=KIND_EXPLICIT, evidence_scope=scope, outcome_labels=labels, table=arr
    )


def surprise_cs(straw: StrawModel, session: EvidenceSession) -> float:
    """Surprise index in bits: log2 of straw over assessed evidence probability.

    ``-inf`` when the straw assigns the evidence zero probability; the
    session guarantees the assessed probability is positive.
    """
    evid = session.evidence()
    outside = [v for v in evid if v not in straw.evidence_scope]
    if outside:
        raise ScopeError(
            f"evidence variables {sorted(outside)} are outside the straw scope"
        )
    log2_pa = session.log_evidence_probability / LN2
    return straw.log2_evidence(evid) - log2_pa


def conflict_cj(session: EvidenceSession) -> float:
    """Conflict index in bits: surprise against the independence straw.

    Positive values mean the product of the observed items' original prior
    marginals fits the evidence better than the assessed joint does.
    """
    if not session.log:
        raise EvidenceError("conflict is undefined for an empty evidence log")
    observed = tuple(v for v, _ in session.log)
    return surprise_cs(independence_straw(session.net, observed), session)


def expected_conflict(
    net: BayesNet,
    evidence_scope: Sequence[str],
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Expected conflict over the scope: never positive, zero iff independent.

    Equals minus the KL divergence (in bits) from the net's joint over the
    scope to the product of its prior marginals, computed by exact
    enumeration; scopes above ``cap`` configurations are refused.
    """
    scope = tuple(evidence_scope)
    cells = int(
        np.prod([net.variable(v).cardinality for v in scope], dtype=np.int64)
    )
    if cells > cap:
        raise EnumerationCapError(
            f"scope {scope} has {cells} configurations, cap is {cap}"
        )
    marginal = eliminate(net, scope, {}).normalize()
    straw = independence_straw(net, scope)
    p = marginal.table()
    log2_indep = straw.log2_scope_table(scope, cap=cap)
    with np.errstate(divide="ignore", invalid="ignore"):
        log2_p = marginal.log_values / LN2
        terms = p * (log2_indep - log2_p)
    return float(np.sum(terms[p > 0.0]))


@dataclass(frozen=True)
class MixtureConfig:
    """Prior probability that the assessed model's context does not hold."""

    epsilon: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.epsilon < 1.0):
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")


def mixture_posterior_weight(
    config: MixtureConfig, pa_evidence: float, po_evidence: float
) -> float:
    """Posterior probability of the alternative context given the evidence.

    The posterior odds are the prior odds ``eps / (1 - eps)`` times the
    likelihood ratio of the evidence under the alternative vs the assessed
    model.
    """
    if pa_evidence < 0.0 or po_evidence < 0.0:
        raise ValueError("evidence probabilities must be non-negative")
    if config.epsilon == 0.0:
        return 0.0
    if pa_evidence == 0.0 and po_evidence == 0.0:
        raise ImpossibleEvidenceError(
            "evidence has zero probability under both mixture components"
        )
    num = config.epsilon * po_evidence
    return num / ((1.0 - config.epsilon) * pa_evidence + num)


def mixture_posterior(
    weight: float, pa_posterior: PosteriorTable, po_posterior: PosteriorTable
) -> PosteriorTable:
    """Convex combination of assessed and alternative posteriors."""
    if not (0.0 <= weight <= 1.0):
        raise ValueError(f"weight must be in [0, 1], got {weight}")
    if (
        pa_posterior.variable != po_posterior.variable
        or pa_posterior.outcomes != po_posterior.outcomes
    ):
        raise ScopeError("mixture components have mismatched outcome spaces")
    dist = (1.0 - weight) * pa_posterior.distribution + weight * po_posterior.distribution
    return PosteriorTable(
        pa_posterior.variable, pa_posterior.outcomes, dist / dist.sum()
    )
