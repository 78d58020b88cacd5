"""Diagnostics: surprise tail bounds, conflict traces, and rare-case explainers.

The surprise index against any pre-specified straw model has a universal
tail bound: under the assessed model, the probability that it exceeds K
bits is strictly below 2**-K. This module verifies that exactly for
enumerable scopes, checks the mixture version by Monte Carlo, reconstructs
per-item conflict traces, and ranks rare hypotheses that would explain
surprising evidence together with observables that could discriminate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._kernels import ancestral_codes, compile_net, surprise_scores
from .errors import EnumerationCapError, ImpossibleEvidenceError, ScopeError
from .inference import EvidenceSession, eliminate
from .network import BayesNet, NodeModel, Variable, build_network
from .straw import (
    DEFAULT_ENUMERATION_CAP,
    LN2,
    StrawModel,
    explicit_straw,
    independence_straw,
)


@dataclass(frozen=True)
class TailReport:
    """Exact tail probability of the surprise index at threshold ``K`` bits.

    ``pi_K`` is the probability, under the assessed model, that the surprise
    index strictly exceeds ``K``; ``satisfied`` records the strict comparison
    against the universal bound ``2**-K``.
    """

    K: float
    pi_K: float
    bound: float
    satisfied: bool


def surprise_tail(
    net: BayesNet,
    straw: StrawModel,
    evidence_scope: Sequence[str],
    K: float,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> TailReport:
    """Exact tail report by enumerating every scope configuration."""
    scope = tuple(evidence_scope)
    cells = int(np.prod([net.variable(v).cardinality for v in scope], dtype=np.int64))
    if cells > cap:
        raise EnumerationCapError(
            f"scope {scope} has {cells} configurations, cap is {cap}"
        )
    marginal = eliminate(net, scope, {}).normalize()
    pa = marginal.table()
    with np.errstate(invalid="ignore"):
        cs = straw.log2_scope_table(scope, cap=cap) - marginal.log_values / LN2
    mask = pa > 0.0
    pi = float(np.sum(pa[mask & (cs > K)]))
    bound = 2.0 ** (-K)
    return TailReport(K=float(K), pi_K=pi, bound=bound, satisfied=pi < bound)


@dataclass(frozen=True)
class MixtureTailReport:
    """Monte Carlo check of the mixture tail bound.

    When evidence is drawn from the (1 - epsilon, epsilon) mixture of the
    assessed net and any other net, the surprise index stays below ``K``
    bits with probability at least ``(1 - epsilon) * (1 - 2**-K)``;
    ``margin`` is three binomial standard errors of the empirical frequency.
    """

    epsilon: float
    K: float
    n: int
    frequency: float
    bound: float
    margin: float
    satisfied: bool


def mixture_tail_check(
    net_a: BayesNet,
    net_o: BayesNet,
    epsilon: float,
    straw: StrawModel,
    K: float,
    n: int,
    seed: int,
) -> MixtureTailReport:
    """Sample evidence from the mixture and compare the surprise tail bound.

    Each sample comes from ``net_o`` with probability ``epsilon``, otherwise
    from ``net_a``; its surprise is scored over the straw's scope against
    the assessed (``net_a``) marginal. Samples whose scope configuration is
    impossible under both models count as not satisfying ``c_S < K``.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if not (0.0 <= epsilon < 1.0):
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")
    _check_shared_spaces(net_a, net_o)

    scope = straw.evidence_scope
    names = net_a.names
    scope_cols = np.array([names.index(v) for v in scope], dtype=np.int64)
    cards = [net_a.variable(v).cardinality for v in scope]
    strides = np.ones(len(scope), dtype=np.int64)
    for i in range(len(scope) - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]

    marginal = eliminate(net_a, scope, {}).normalize()
    log2_pa = np.ascontiguousarray((marginal.log_values / LN2).ravel())
    log2_ps = np.ascontiguousarray(straw.log2_scope_table(scope).ravel())

    rng = np.random.default_rng(seed)
    uniforms = rng.random((n, len(names)))
    from_alternative = rng.random(n) < epsilon
    compiled_a = compile_net(net_a)
    compiled_o = compile_net(net_o)
    codes_a = np.empty((n, len(names)), dtype=np.int64)
    codes_a[:, compiled_a.decl_pos] = ancestral_codes(compiled_a, uniforms)
    codes_o = np.empty((n, len(names)), dtype=np.int64)
    codes_o[:, compiled_o.decl_pos] = ancestral_codes(compiled_o, uniforms)
    codes = np.where(from_alternative[:, None], codes_o, codes_a)

    scores = surprise_scores(
        np.ascontiguousarray(codes[:, scope_cols]), strides, log2_ps, log2_pa
    )
    frequency = float(np.count_nonzero(scores < K)) / n
    bound = (1.0 - epsilon) * (1.0 - 2.0 ** (-K))
    margin = 3.0 * math.sqrt(frequency * (1.0 - frequency) / n)
    return MixtureTailReport(
        epsilon=float(epsilon),
        K=float(K),
        n=int(n),
        frequency=frequency,
        bound=bound,
        margin=margin,
        satisfied=frequency > bound - margin,
    )


def _check_shared_spaces(net_a: BayesNet, net_o: BayesNet) -> None:
    if net_a.names != net_o.names or any(
        net_a.variable(v).outcomes != net_o.variable(v).outcomes for v in net_a.names
    ):
        raise ScopeError("nets do not share variable/outcome spaces")


@dataclass(frozen=True)
class ExplanationEntry:
    """How strongly one candidate outcome would explain the evidence.

    ``lift_bits`` is the log2 factor by which conditioning on the outcome
    raises the evidence probability, identically log2(posterior / prior).
    """

    variable: str
    outcome: str
    lift_bits: float
    prior: float
    posterior: float


def explain_conflict(
    session: EvidenceSession, candidates: Sequence[str]
) -> list[ExplanationEntry]:
    """Rank unobserved candidate outcomes by how much they lift the evidence.

    Outcomes with zero posterior get ``-inf`` lift. Sorted by descending
    lift, then lexicographically by (variable, outcome); the ranking is
    independent of candidate list order.
    """
    candidates = tuple(candidates)
    if len(set(candidates)) != len(candidates):
        raise ScopeError("candidates list a variable twice")
    evid = session.evidence()
    for v in candidates:
        session.net.variable(v)
        if v in evid:
            raise ScopeError(f"candidate {v!r} is already observed")
    entries = []
    for v in candidates:
        var = session.net.variable(v)
        prior = eliminate(session.net, (v,), {}).normalize().table()
        posterior = session.posterior(v).distribution
        for idx, label in enumerate(var.outcomes):
            po = float(posterior[idx])
            pr = float(prior[idx])
            lift = -math.inf if po == 0.0 else math.log2(po) - math.log2(pr)
            entries.append(
                ExplanationEntry(
                    variable=v, outcome=label, lift_bits=lift, prior=pr, posterior=po
                )
            )
    entries.sort(key=lambda e: (-e.lift_bits, e.variable, e.outcome))
    return entries


def _jeffreys_bits(p: np.ndarray, q: np.ndarray) -> float:
    """Symmetric KL divergence in bits; infinite when supports differ."""
    total = 0.0
    for pi, qi in zip(p.tolist(), q.tolist()):
        if pi == qi:
            continue
        if pi == 0.0 or qi == 0.0:
            return math.inf
        total += (pi - qi) * (math.log2(pi) - math.log2(qi))
    return total


def suggest_discriminator(
    session: EvidenceSession,
    hypothesis: tuple[str, str],
    observables: Sequence[str],
) -> list[tuple[str, float]]:
    """Rank observables by how well they separate a hypothesis outcome.

    Each observable is scored by the Jeffreys divergence (bits) between its
    posterior given the hypothesis outcome and given its complement, both
    conditioned on the current evidence; the complement aggregates the other
    outcomes weighted by their posteriors. Sorted descending with
    lexicographic tie-breaks.
    """
    hvar, hlabel = hypothesis
    h_idx = session.net.outcome_index(hvar, hlabel)
    evid = session.evidence()
    if hvar in evid:
        raise ScopeError(f"hypothesis variable {hvar!r} is already observed")
    observables = tuple(observables)
    if len(set(observables)) != len(observables):
        raise ScopeError("observables list a variable twice")
    scored = []
    for f in observables:
        session.net.variable(f)
        if f in evid:
            raise ScopeError(f"observable {f!r} is already observed")
        if f == hvar:
            raise ScopeError("an observable cannot be the hypothesis variable")
        joint = session.posterior_factor((hvar, f)).table()
        p_h = float(joint[h_idx].sum())
        p_rest = float(joint.sum() - joint[h_idx].sum())
        if p_h == 0.0 or p_rest == 0.0:
            raise ImpossibleEvidenceError(
                f"cannot condition on {hvar}={hlabel}: posterior probability "
                f"{p_h:.3g} leaves nothing to compare against"
            )
        given_h = joint[h_idx] / p_h
        given_rest = (joint.sum(axis=0) - joint[h_idx]) / p_rest
        scored.append((f, _jeffreys_bits(given_h, given_rest)))
    scored.sort(key=lambda e: (-e[1], e[0]))
    return scored


@dataclass(frozen=True)
class TraceEntry:
    variable: str
    outcome: str
    conditional: float
    running_conflict_bits: float


@dataclass(frozen=True)
class ConflictTrace:
    """Per-item running conflict, reconstructed from cached conditionals."""

    entries: tuple[TraceEntry, ...]


def conflict_trace(session: EvidenceSession) -> ConflictTrace:
    """Running conflict in bits after each absorbed item.

    Uses the session's cached per-item conditionals and the net's original
    prior marginals; the final entry agrees with the full conflict index.
    """
    entries = []
    cum_prior_bits = 0.0
    cum_evidence_bits = 0.0
    for (variable, outcome), conditional in zip(
        session.log, session.per_item_conditionals
    ):
        prior = eliminate(session.net, (variable,), {}).normalize()
        p = prior.value({variable: outcome})
        cum_prior_bits += math.log2(p)
        cum_evidence_bits += math.log2(conditional)
        entries.append(
            TraceEntry(
                variable=variable,
                outcome=outcome,
                conditional=conditional,
                running_conflict_bits=cum_prior_bits - cum_evidence_bits,
            )
        )
    return ConflictTrace(entries=tuple(entries))


# -- seeded generators for property suites ------------------------------------


def random_network(
    seed: int | np.random.Generator,
    min_vars: int = 3,
    max_vars: int = 6,
    min_outcomes: int = 2,
    max_outcomes: int = 3,
    edge_prob: float = 0.4,
    max_parents: int = 3,
    variables: Sequence[Variable] | None = None,
) -> BayesNet:
    """A random DAG with Dirichlet(1) CPT rows; deterministic given the seed.

    Pass ``variables`` to draw fresh structure and tables over an existing
    variable/outcome space (for building mixture partners).
    """
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    if variables is None:
        nv = int(rng.integers(min_vars, max_vars + 1))
        cards = rng.integers(min_outcomes, max_outcomes + 1, size=nv)
        variables = tuple(
            Variable(f"v{i}", tuple(f"o{j}" for j in range(cards[i])))
            for i in range(nv)
        )
    else:
        variables = tuple(variables)
    by_name = {v.name: v for v in variables}
    nodes = []
    for i, var in enumerate(variables):
        parents = tuple(
            variables[j].name for j in range(i) if rng.random() < edge_prob
        )[:max_parents]
        rows = int(
            np.prod([len(by_name[p].outcomes) for p in parents], dtype=np.int64)
        )
        cpt = rng.dirichlet(np.ones(len(var.outcomes)), size=rows)
        nodes.append(NodeModel(variable=var.name, parents=parents, cpt=cpt))
    return build_network(variables, nodes)


def random_explicit_straw(
    net: BayesNet, evidence_scope: Sequence[str], seed: int | np.random.Generator
) -> StrawModel:
    """A random explicit straw table (Dirichlet(1) over all configurations)."""
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    scope = tuple(evidence_scope)
    shape = tuple(net.variable(v).cardinality for v in scope)
    table = rng.dirichlet(np.ones(int(np.prod(shape, dtype=np.int64)))).reshape(shape)
    return explicit_straw(net, scope, table)
