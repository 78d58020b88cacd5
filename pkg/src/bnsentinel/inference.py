"""Exact inference: log-space factors, variable elimination, and sessions.

An :class:`EvidenceSession` absorbs observations one at a time, keeping the
running joint evidence probability as a sum of per-item conditional
log-probabilities; posteriors and family posteriors are computed on demand
by variable elimination. All probability mass moves in natural-log space
with ``-inf`` standing for exact zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from ._kernels import ancestral_codes, compile_net
from .errors import (
    ConflictingEvidenceError,
    ImpossibleEvidenceError,
    ScopeError,
    UnknownVariableError,
)
from .network import BayesNet


@dataclass(frozen=True, eq=False)
class Factor:
    """A non-negative table over a tuple of variables, stored as logs.

    ``log_values`` has one axis per scope variable (so a scalar factor has
    an empty scope and a 0-d array); zero probability is an explicit
    ``-inf``, never a large negative stand-in.
    """

    scope: tuple[str, ...]
    outcome_labels: tuple[tuple[str, ...], ...]
    log_values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", tuple(self.scope))
        object.__setattr__(self, "outcome_labels", tuple(tuple(o) for o in self.outcome_labels))
        arr = np.asarray(self.log_values, dtype=np.float64)
        object.__setattr__(self, "log_values", arr)
        if len(self.scope) != len(self.outcome_labels) or arr.shape != tuple(
            len(o) for o in self.outcome_labels
        ):
            raise ScopeError("factor table shape does not match its scope")
        if np.any(np.isnan(arr)) or np.any(arr == np.inf):
            raise ScopeError("factor values must be finite or -inf")

    # -- algebra ----------------------------------------------------------

    def multiply(self, other: "Factor") -> "Factor":
        scope = self.scope + tuple(v for v in other.scope if v not in self.scope)
        labels = dict(zip(self.scope, self.outcome_labels))
        labels.update(zip(other.scope, other.outcome_labels))
        out_labels = tuple(labels[v] for v in scope)
        a = _aligned(self, scope, out_labels)
        b = _aligned(other, scope, out_labels)
        return Factor(scope, out_labels, a + b)

    def marginalize_out(self, names: Iterable[str]) -> "Factor":
        names = tuple(names)
        for v in names:
            if v not in self.scope:
                raise ScopeError(f"cannot marginalize {v!r}: not in scope {self.scope}")
        axes = tuple(self.scope.index(v) for v in names)
        keep = tuple(v for v in self.scope if v not in names)
        labels = tuple(self.outcome_labels[self.scope.index(v)] for v in keep)
        summed = logsumexp(self.log_values, axis=axes) if axes else self.log_values
        return Factor(keep, labels, np.asarray(summed))

    def normalize(self) -> "Factor":
        total = float(logsumexp(self.log_values)) if self.log_values.size else -math.inf
        if total == -math.inf:
            raise ImpossibleEvidenceError("factor has zero total mass")
        return Factor(self.scope, self.outcome_labels, self.log_values - total)

    def reorder(self, scope: Sequence[str]) -> "Factor":
        scope = tuple(scope)
        if sorted(scope) != sorted(self.scope):
            raise ScopeError(f"{scope} is not a permutation of {self.scope}")
        perm = tuple(self.scope.index(v) for v in scope)
        labels = tuple(self.outcome_labels[i] for i in perm)
        return Factor(scope, labels, self.log_values.transpose(perm))

    def reduce(self, evidence: Mapping[str, str]) -> "Factor":
        """Slice the table at observed outcomes, dropping those axes."""
        f = self
        for var, label in evidence.items():
            if var not in f.scope:
                continue
            axis = f.scope.index(var)
            idx = f.outcome_labels[axis].index(label)
            values = np.take(f.log_values, idx, axis=axis)
            scope = f.scope[:axis] + f.scope[axis + 1 :]
            labels = f.outcome_labels[:axis] + f.outcome_labels[axis + 1 :]
            f = Factor(scope, labels, values)
        return f

    # -- lookups ----------------------------------------------------------

    def log_value(self, assignment: Mapping[str, str]) -> float:
        idx = []
        for v, labels in zip(self.scope, self.outcome_labels):
            try:
                idx.append(labels.index(assignment[v]))
            except KeyError:
                raise ScopeError(f"assignment does not bind {v!r}") from None
            except ValueError:
                raise UnknownVariableError(f"{assignment[v]!r} is not an outcome of {v!r}") from None
        return float(self.log_values[tuple(idx)])

    def value(self, assignment: Mapping[str, str]) -> float:
        return math.exp(self.log_value(assignment))

    def table(self) -> np.ndarray:
        """Linear-space copy of the table."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)


def _aligned(factor: Factor, scope: tuple[str, ...], labels) -> np.ndarray:
    """Transpose/reshape the factor's table for broadcasting over ``scope``."""
    positions = [scope.index(v) for v in factor.scope]
    perm = sorted(range(len(factor.scope)), key=positions.__getitem__)
    arr = factor.log_values.transpose(perm)
    shape = []
    sizes = iter(arr.shape)
    present = set(factor.scope)
    for v, lab in zip(scope, labels):
        shape.append(next(sizes) if v in present else 1)
    return arr.reshape(shape)


def _unit_factor() -> Factor:
    return Factor((), (), np.float64(0.0))


def _point_mass(net: BayesNet, variable: str, label: str) -> Factor:
    var = net.variable(variable)
    logs = np.full(var.cardinality, -math.inf)
    logs[var.index_of(label)] = 0.0
    return Factor((variable,), (var.outcomes,), logs)


def cpt_factor(net: BayesNet, name: str) -> Factor:
    """The node's CPT as a factor over (parents..., variable)."""
    node = net.node(name)
    scope = node.parents + (name,)
    labels = tuple(net.variable(v).outcomes for v in scope)
    with np.errstate(divide="ignore"):
        logs = np.log(net.cpt_nd(name))
    return Factor(scope, labels, logs)


def _min_fill_order(scopes: list[set[str]], hidden: Iterable[str]) -> list[str]:
    neighbors: dict[str, set[str]] = {}
    for s in scopes:
        for v in s:
            neighbors.setdefault(v, set()).update(s - {v})
    remaining = set(hidden)
    for v in remaining:
        neighbors.setdefault(v, set())
    order: list[str] = []

    def fill_count(v: str) -> int:
        nb = sorted(neighbors[v])
        return sum(
            1
            for i, a in enumerate(nb)
            for b in nb[i + 1 :]
            if b not in neighbors[a]
        )

    while remaining:
        best = min(remaining, key=lambda v: (fill_count(v), v))
        order.append(best)
        remaining.discard(best)
        nb = neighbors.pop(best)
        for a in nb:
            if a in neighbors:
                neighbors[a] |= nb - {a}
                neighbors[a].discard(best)
    return order


def eliminate(
    net: BayesNet, query: Sequence[str], evidence: Mapping[str, str]
) -> Factor:
    """Sum out everything but ``query`` with ``evidence`` fixed.

    Returns the unnormalized factor over query configurations whose entries
    are the joint probabilities of (query assignment, evidence); normalizing
    it yields the posterior over the query. Elimination order is greedy
    min-fill with lexicographic tie-breaks.
    """
    query = tuple(query)
    if len(set(query)) != len(query):
        raise ScopeError("query lists a variable twice")
    for v in query:
        net.variable(v)
    net.check_assignment(evidence)
    overlap = set(query) & set(evidence)
    if overlap:
        raise ScopeError(f"query and evidence overlap on {sorted(overlap)}")

    factors = [cpt_factor(net, name).reduce(evidence) for name in net.topological_order()]
    hidden = [v for v in net.names if v not in query and v not in evidence]
    order = _min_fill_order([set(f.scope) for f in factors], hidden)
    for h in order:
        group = [f for f in factors if h in f.scope]
        factors = [f for f in factors if h not in f.scope]
        if not group:
            continue
        prod = group[0]
        for f in group[1:]:
            prod = prod.multiply(f)
        factors.append(prod.marginalize_out((h,)))

    result = _unit_factor()
    for f in factors:
        result = result.multiply(f)
    return result.reorder(query)


@dataclass(frozen=True, eq=False)
class PosteriorTable:
    """A normalized distribution over one variable's outcomes."""

    variable: str
    outcomes: tuple[str, ...]
    distribution: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        dist = np.asarray(self.distribution, dtype=np.float64)
        object.__setattr__(self, "distribution", dist)
        if dist.shape != (len(self.outcomes),):
            raise ScopeError("distribution length does not match outcomes")
        if abs(float(dist.sum()) - 1.0) > 1e-9:
            raise ScopeError(
                f"posterior for {self.variable!r} sums to {dist.sum():.12g}, not 1"
            )

    def probability(self, label: str) -> float:
        return float(self.distribution[self.outcomes.index(label)])


@dataclass(frozen=True, eq=False)
class EvidenceSession:
    """An ordered evidence log with the running joint evidence probability.

    Sessions are immutable; :meth:`absorb` returns a new session, so a failed
    absorption never corrupts the original. ``log_evidence_probability`` is
    the natural log of P(all absorbed evidence) and always equals the sum of
    the logs of ``per_item_conditionals``.
    """

    net: BayesNet
    log: tuple[tuple[str, str], ...] = ()
    log_evidence_probability: float = 0.0
    per_item_conditionals: tuple[float, ...] = ()

    @property
    def evidence_probability(self) -> float:
        return math.exp(self.log_evidence_probability)

    def evidence(self) -> dict[str, str]:
        return dict(self.log)

    def observed(self, variable: str) -> str | None:
        self.net.variable(variable)
        return self.evidence().get(variable)

    def absorb(self, variable: str, outcome: str) -> "EvidenceSession":
        """Observe ``variable = outcome``; returns the extended session.

        Re-observing the same outcome is a no-op; a different outcome raises
        :class:`ConflictingEvidenceError`; a zero-probability observation
        raises :class:`ImpossibleEvidenceError` and leaves this session as
        it was.
        """
        idx = self.net.outcome_index(variable, outcome)
        seen = self.observed(variable)
        if seen is not None:
            if seen == outcome:
                return self
            raise ConflictingEvidenceError(
                f"{variable!r} already observed as {seen!r}, cannot absorb {outcome!r}"
            )
        conditional = float(self.posterior(variable).distribution[idx])
        if conditional == 0.0:
            raise ImpossibleEvidenceError(
                f"observation {variable}={outcome} has zero probability "
                f"given the current evidence"
            )
        return EvidenceSession(
            net=self.net,
            log=self.log + ((variable, outcome),),
            log_evidence_probability=self.log_evidence_probability + math.log(conditional),
            per_item_conditionals=self.per_item_conditionals + (conditional,),
        )

    def posterior(self, variable: str) -> PosteriorTable:
        """P(variable | absorbed evidence); a point mass if observed."""
        var = self.net.variable(variable)
        seen = self.observed(variable)
        if seen is not None:
            dist = np.zeros(var.cardinality)
            dist[var.index_of(seen)] = 1.0
            return PosteriorTable(variable, var.outcomes, dist)
        f = eliminate(self.net, (variable,), self.evidence()).normalize()
        return PosteriorTable(variable, var.outcomes, f.table())

    def posterior_factor(self, variables: Sequence[str]) -> Factor:
        """Normalized joint posterior over ``variables`` given the evidence.

        Observed members of ``variables`` appear as point-mass axes, so the
        result is always a table over the full requested scope.
        """
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ScopeError("posterior scope lists a variable twice")
        evid = self.evidence()
        unobserved = tuple(v for v in variables if v not in evid)
        f = eliminate(self.net, unobserved, evid).normalize()
        for v in variables:
            if v in evid:
                f = f.multiply(_point_mass(self.net, v, evid[v]))
        return f.reorder(variables)

    def family_posterior(self, node: str) -> Factor:
        """Joint posterior of a node and its parents given the evidence."""
        family = self.net.node(node).parents + (node,)
        return self.posterior_factor(family)


def new_session(net: BayesNet) -> EvidenceSession:
    """A session with no evidence (evidence probability 1)."""
    return EvidenceSession(net=net)


def forward_sample_codes(
    net: BayesNet, seed: int, n: int, backend: str | None = None
) -> np.ndarray:
    """Ancestral samples as an (n, len(variables)) array of outcome indices.

    Columns follow the network's variable declaration order; results are a
    deterministic function of the seed.
    """
    if n < 0:
        raise ValueError("sample count must be non-negative")
    compiled = compile_net(net)
    rng = np.random.default_rng(seed)
    uniforms = rng.random((n, len(net.variables)))
    codes_topo = ancestral_codes(compiled, uniforms, backend=backend)
    codes = np.empty_like(codes_topo)
    codes[:, compiled.decl_pos] = codes_topo
    return codes


def forward_sample(net: BayesNet, seed: int, n: int) -> list[dict[str, str]]:
    """Draw ``n`` full assignments ancestrally, in topological order."""
    codes = forward_sample_codes(net, seed, n)
    outcome_lists = [v.outcomes for v in net.variables]
    names = net.names
    return [
        {name: outcome_lists[j][codes[i, j]] for j, name in enumerate(names)}
        for i in range(codes.shape[0])
    ]
