"""Rebuttal monitoring: context-violation variables for node models.

A rebuttal is a binary proposition whose truth invalidates one node's
assessed conditional distribution and replaces it with a simple straw
distribution, independent of the node's parents. Rebuttals can be attached
to the network explicitly (one extra root per rebuttal, no new loops), or
monitored cheaply through a likelihood ratio computed from the node's
family posterior: exact with a single rebuttal, approximate when other
rebuttals' posteriors are non-negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NetworkError, ScopeError
from .inference import EvidenceSession
from .network import BayesNet, NodeModel, Variable, build_network, parent_configurations

STRAW_SUM_TOL = 1e-9
REBUTTAL_OUTCOMES = ("t", "f")
DEFAULT_RATIO_FLOOR = 2.0


@dataclass(frozen=True, eq=False)
class RebuttalSpec:
    """Straw conditional and prior for one node's context-violation flag."""

    node: str
    straw_distribution: np.ndarray
    prior_true: float

    def __post_init__(self) -> None:
        arr = np.asarray(self.straw_distribution, dtype=np.float64)
        object.__setattr__(self, "straw_distribution", arr)
        if arr.ndim != 1 or arr.size < 2:
            raise ScopeError("straw distribution must be a vector over >= 2 outcomes")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
            raise ScopeError("straw distribution entries must be finite, non-negative")
        if abs(float(arr.sum()) - 1.0) > STRAW_SUM_TOL:
            raise ScopeError(
                f"straw distribution sums to {arr.sum():.12g}, not 1 within {STRAW_SUM_TOL}"
            )
        if not (0.0 < self.prior_true < 1.0):
            raise ScopeError(f"prior_true must be inside (0, 1), got {self.prior_true}")

    @property
    def prior_odds(self) -> float:
        return self.prior_true / (1.0 - self.prior_true)


def rebuttal_variable_name(node: str) -> str:
    return f"R_{node}"


def _check_spec(net: BayesNet, spec: RebuttalSpec) -> None:
    k = net.variable(spec.node).cardinality
    if spec.straw_distribution.size != k:
        raise ScopeError(
            f"straw distribution for {spec.node!r} has {spec.straw_distribution.size} "
            f"entries, variable has {k} outcomes"
        )


def attach_rebuttal(net: BayesNet, spec: RebuttalSpec) -> BayesNet:
    """Augment the net with an explicit rebuttal variable for one node.

    The rebuttal becomes a new root with outcomes ``("t", "f")`` and prior
    ``(prior_true, 1 - prior_true)``, appended as the node's last parent.
    Rows with the rebuttal true use the straw distribution for every parent
    configuration; rows with it false keep the assessed rows. The input net
    is never mutated, and no directed loops can be introduced.
    """
    _check_spec(net, spec)
    rname = rebuttal_variable_name(spec.node)
    node = net.node(spec.node)
    if rname in net.names:
        if rname in node.parents:
            raise NetworkError(f"node {spec.node!r} already has a rebuttal attached")
        raise NetworkError(f"rebuttal name {rname!r} collides with an existing variable")

    k = net.variable(spec.node).cardinality
    assessed = net.cpt_nd(spec.node)
    augmented = np.empty(assessed.shape[:-1] + (2, k))
    augmented[..., 0, :] = spec.straw_distribution
    augmented[..., 1, :] = assessed

    variables = net.variables + (Variable(rname, REBUTTAL_OUTCOMES),)
    nodes = []
    for n in net.nodes:
        if n.variable == spec.node:
            nodes.append(
                NodeModel(
                    variable=spec.node,
                    parents=node.parents + (rname,),
                    cpt=augmented.reshape(-1, k),
                )
            )
        else:
            nodes.append(n)
    nodes.append(
        NodeModel(
            variable=rname,
            parents=(),
            cpt=np.array([[spec.prior_true, 1.0 - spec.prior_true]]),
        )
    )
    return build_network(variables, nodes)


def _family_cells(net: BayesNet, node: str):
    """Family configurations in canonical order: parent rows, outcome fastest."""
    outcomes = net.variable(node).outcomes
    for row, cfg in enumerate(parent_configurations(net, node)):
        for o_idx, o_label in enumerate(outcomes):
            yield row, cfg, o_idx, o_label


def _ratio_sum(
    net: BayesNet,
    spec: RebuttalSpec,
    session: EvidenceSession,
    cells: Sequence[tuple[int, int]] | None,
) -> float:
    """Sum of family-posterior times straw-to-assessed ratio over cells.

    ``cells`` is a sequence of (parent row, outcome index) pairs, or None
    for all of them; summation runs in canonical cell order so a full
    selection reproduces the unrestricted sum exactly. Returns ``inf`` when
    a zero assessed conditional carries posterior mass (that configuration
    alone is decisive evidence for the rebuttal).
    """
    node = net.node(spec.node)
    k = net.variable(spec.node).cardinality
    posterior = session.family_posterior(spec.node).table().reshape(-1, k)
    cpt = node.cpt
    straw = spec.straw_distribution
    if cells is None:
        wanted = None
    else:
        wanted = sorted(set(cells))
    total = 0.0
    iterator = wanted if wanted is not None else (
        (row, o) for row in range(cpt.shape[0]) for o in range(k)
    )
    for row, o in iterator:
        mass = float(posterior[row, o])
        if mass == 0.0:
            continue
        assessed = float(cpt[row, o])
        if assessed == 0.0:
            return math.inf
        total += mass * float(straw[o]) / assessed
    return total


def rebuttal_likelihood_ratio(session: EvidenceSession, spec: RebuttalSpec) -> float:
    """Likelihood ratio of the evidence given the rebuttal true vs false.

    Computed as the family-posterior-weighted sum of straw-to-assessed
    conditional ratios on the unaugmented net. Exact when this is the only
    rebuttal; a close approximation otherwise, provided the other rebuttals'
    posteriors are small. With no evidence absorbed the sum telescopes to 1.
    """
    _check_spec(session.net, spec)
    return _ratio_sum(session.net, spec, session, None)


def rebuttal_posterior_odds(likelihood_ratio: float, spec: RebuttalSpec) -> float:
    """Posterior odds of the rebuttal: likelihood ratio times prior odds."""
    if likelihood_ratio < 0.0:
        raise ValueError("likelihood ratio must be non-negative")
    return likelihood_ratio * spec.prior_odds


@dataclass(frozen=True)
class MonitoredConfigSet:
    """Family configurations pre-selected for cheap rebuttal monitoring.

    Each entry pairs an outcome label with a parent-configuration label
    tuple whose straw-to-assessed ratio reached ``ratio_floor``.
    """

    node: str
    configs: tuple[tuple[str, tuple[str, ...]], ...]
    ratio_floor: float


def select_monitored_configs(
    net: BayesNet, spec: RebuttalSpec, ratio_floor: float = DEFAULT_RATIO_FLOOR
) -> MonitoredConfigSet:
    """Family configurations whose straw-to-assessed ratio reaches the floor.

    Sorted by descending ratio; ties break lexicographically on (outcome,
    parent configuration) in declaration order. A zero assessed conditional
    with positive straw mass counts as an infinite ratio and sorts first.
    """
    if not ratio_floor > 1.0:
        raise ValueError(f"ratio floor must exceed 1, got {ratio_floor}")
    _check_spec(net, spec)
    cpt = net.node(spec.node).cpt
    straw = spec.straw_distribution
    selected = []
    for row, cfg, o_idx, o_label in _family_cells(net, spec.node):
        s = float(straw[o_idx])
        a = float(cpt[row, o_idx])
        if s == 0.0:
            continue
        ratio = math.inf if a == 0.0 else s / a
        if ratio >= ratio_floor:
            selected.append((ratio, o_idx, row, o_label, cfg))
    selected.sort(key=lambda e: (-e[0], e[1], e[2]))
    return MonitoredConfigSet(
        node=spec.node,
        configs=tuple((o_label, cfg) for _, _, _, o_label, cfg in selected),
        ratio_floor=ratio_floor,
    )


def monitored_likelihood_ratio(
    session: EvidenceSession, spec: RebuttalSpec, configs: MonitoredConfigSet
) -> float:
    """The likelihood-ratio sum restricted to pre-selected configurations.

    A lower bound on the full ratio; covering every configuration reproduces
    it exactly.
    """
    _check_spec(session.net, spec)
    if configs.node != spec.node:
        raise ScopeError(
            f"monitored set is for node {configs.node!r}, spec is for {spec.node!r}"
        )
    net = session.net
    node = net.node(spec.node)
    rows = {cfg: i for i, cfg in enumerate(parent_configurations(net, spec.node))}
    outcomes = net.variable(spec.node).outcomes
    cells = []
    for o_label, cfg in configs.configs:
        try:
            cells.append((rows[tuple(cfg)], outcomes.index(o_label)))
        except (KeyError, ValueError):
            raise ScopeError(
                f"monitored configuration ({o_label!r}, {cfg!r}) does not exist "
                f"for node {spec.node!r}"
            ) from None
    return _ratio_sum(net, spec, session, cells)


@dataclass(frozen=True)
class RebuttalAssessment:
    """One rebuttal's monitoring result for a given evidence state."""

    node: str
    likelihood_ratio: float
    posterior_odds: float
    posterior_probability: float
    infinite_ratio: bool
    approximate: bool
    other_rebuttals: int


def monitor_rebuttals(
    session: EvidenceSession, specs: Sequence[RebuttalSpec]
) -> tuple[RebuttalAssessment, ...]:
    """Assess every rebuttal against the session's current evidence.

    When more than one rebuttal is supplied each ratio is flagged as
    approximate (it ignores the others); callers needing exact values can
    fall back to :func:`attach_rebuttal` plus explicit inference.
    """
    results = []
    for spec in specs:
        ratio = rebuttal_likelihood_ratio(session, spec)
        odds = rebuttal_posterior_odds(ratio, spec)
        prob = 1.0 if math.isinf(odds) else odds / (1.0 + odds)
        results.append(
            RebuttalAssessment(
                node=spec.node,
                likelihood_ratio=ratio,
                posterior_odds=odds,
                posterior_probability=prob,
                infinite_ratio=math.isinf(ratio),
                approximate=len(specs) > 1,
                other_rebuttals=len(specs) - 1,
            )
        )
    return tuple(results)
