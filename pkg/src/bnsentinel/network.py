"""Discrete Bayesian networks: variables, node CPTs, and validation.

A network is a DAG of categorical variables, each carrying a conditional
probability table (CPT) with one row per configuration of its parents.
Row order follows a fixed convention: parent configurations are enumerated
with the last declared parent varying fastest. Outcomes within a row follow
the variable's declared outcome order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NetworkError, UnknownVariableError

# Rows whose sum is off by more than this are rejected outright.
ROW_SUM_REJECT_TOL = 1e-6
# Rows already within this of unit sum are kept bit-for-bit (makes
# serialize/parse round trips exact); anything between the two tolerances
# is renormalized.
ROW_SUM_SKIP_TOL = 1e-9


@dataclass(frozen=True)
class Variable:
    """A categorical variable with at least two named outcomes."""

    name: str
    outcomes: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if not self.name:
            raise NetworkError("variable name must be non-empty")
        if len(self.outcomes) < 2:
            raise NetworkError(
                f"variable {self.name!r} needs at least 2 outcomes, "
                f"got {len(self.outcomes)}"
            )
        if len(set(self.outcomes)) != len(self.outcomes):
            raise NetworkError(f"variable {self.name!r} has duplicate outcome labels")

    @property
    def cardinality(self) -> int:
        return len(self.outcomes)

    def index_of(self, label: str) -> int:
        try:
            return self.outcomes.index(label)
        except ValueError:
            raise UnknownVariableError(
                f"variable {self.name!r} has no outcome {label!r}"
            ) from None


@dataclass(frozen=True, eq=False)
class NodeModel:
    """A variable's parents and CPT.

    ``cpt`` is a 2-D array of shape (number of parent configurations,
    number of outcomes); a parentless node has a single row. Rows are
    validated and, if slightly off unit sum, renormalized by
    :func:`build_network`.
    """

    variable: str
    parents: tuple[str, ...]
    cpt: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        arr = np.asarray(self.cpt, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise NetworkError(
                f"CPT for {self.variable!r} must be a list of rows, "
                f"got a {arr.ndim}-dimensional table"
            )
        object.__setattr__(self, "cpt", arr)
        if len(set(self.parents)) != len(self.parents):
            raise NetworkError(f"node {self.variable!r} lists a parent twice")


@dataclass(frozen=True, eq=False)
class BayesNet:
    """An immutable, validated Bayesian network.

    Construct through :func:`build_network`, which normalizes CPT rows;
    direct construction validates but does not renormalize.
    """

    variables: tuple[Variable, ...]
    nodes: tuple[NodeModel, ...]
    _by_name: dict[str, Variable] = field(init=False, repr=False)
    _node_by_name: dict[str, NodeModel] = field(init=False, repr=False)
    _topo: tuple[str, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if not self.variables or not self.nodes:
            raise NetworkError("network needs at least one variable and one node")
        by_name = {}
        for v in self.variables:
            if v.name in by_name:
                raise NetworkError(f"duplicate variable name {v.name!r}")
            by_name[v.name] = v
        node_by_name = {}
        for node in self.nodes:
            if node.variable not in by_name:
                raise NetworkError(
                    f"node refers to undeclared variable {node.variable!r}"
                )
            if node.variable in node_by_name:
                raise NetworkError(f"two node models for variable {node.variable!r}")
            node_by_name[node.variable] = node
        missing = set(by_name) - set(node_by_name)
        if missing:
            raise NetworkError(f"variables without a node model: {sorted(missing)}")
        for node in self.nodes:
            for p in node.parents:
                if p not in by_name:
                    raise NetworkError(
                        f"node {node.variable!r} has dangling parent {p!r}"
                    )
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "_node_by_name", node_by_name)
        object.__setattr__(self, "_topo", _topological_order(self))
        for node in self.nodes:
            _check_cpt_shape(self, node)

    # -- lookups ---------------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownVariableError(f"unknown variable {name!r}") from None

    def node(self, name: str) -> NodeModel:
        self.variable(name)
        return self._node_by_name[name]

    def topological_order(self) -> tuple[str, ...]:
        return self._topo

    def cpt_nd(self, name: str) -> np.ndarray:
        """The node's CPT reshaped to (parent cardinalities..., cardinality)."""
        node = self.node(name)
        shape = tuple(self.variable(p).cardinality for p in node.parents)
        return node.cpt.reshape(shape + (self.variable(name).cardinality,))

    def parent_config_count(self, name: str) -> int:
        node = self.node(name)
        return int(np.prod([self.variable(p).cardinality for p in node.parents], dtype=np.int64))

    def outcome_index(self, name: str, label: str) -> int:
        return self.variable(name).index_of(label)

    def check_assignment(self, assignment: Mapping[str, str], full: bool = False) -> None:
        """Validate that bindings name real variables and outcomes."""
        for name, label in assignment.items():
            self.variable(name).index_of(label)
        if full:
            unbound = set(self._by_name) - set(assignment)
            if unbound:
                raise UnknownVariableError(
                    f"assignment leaves variables unbound: {sorted(unbound)}"
                )


def _check_cpt_shape(net: BayesNet, node: NodeModel) -> None:
    expected_rows = net.parent_config_count(node.variable)
    k = net.variable(node.variable).cardinality
    rows, cols = node.cpt.shape
    if rows != expected_rows or cols != k:
        raise NetworkError(
            f"CPT for {node.variable!r} must be {expected_rows} x {k}, "
            f"got {rows} x {cols}"
        )
    if not np.all(np.isfinite(node.cpt)):
        raise NetworkError(f"CPT for {node.variable!r} has non-finite entries")
    if np.any(node.cpt < 0.0) or np.any(node.cpt > 1.0 + ROW_SUM_REJECT_TOL):
        raise NetworkError(f"CPT for {node.variable!r} has entries outside [0, 1]")
    sums = node.cpt.sum(axis=1)
    worst = np.max(np.abs(sums - 1.0))
    if worst > ROW_SUM_REJECT_TOL:
        bad = int(np.argmax(np.abs(sums - 1.0)))
        raise NetworkError(
            f"CPT row {bad} for {node.variable!r} sums to {sums[bad]:.9g}, "
            f"off by more than {ROW_SUM_REJECT_TOL}"
        )


def _topological_order(net: BayesNet) -> tuple[str, ...]:
    """Kahn's algorithm; declaration order breaks ties, cycles are an error."""
    indeg = {v.name: 0 for v in net.variables}
    children: dict[str, list[str]] = {v.name: [] for v in net.variables}
    for node in net.nodes:
        indeg[node.variable] += len(node.parents)
        for p in node.parents:
            children[p].append(node.variable)
    decl = {v.name: i for i, v in enumerate(net.variables)}
    order: list[str] = []
    ready = [v.name for v in net.variables if indeg[v.name] == 0]
    while ready:
        name = ready.pop(0)
        order.append(name)
        newly = []
        for child in children[name]:
            indeg[child] -= 1
            if indeg[child] == 0:
                newly.append(child)
        # keep declaration order among newly ready nodes
        ready = sorted(ready + newly, key=decl.__getitem__)
    if len(order) != len(net.variables):
        stuck = sorted(set(indeg) - set(order))
        raise NetworkError(f"parent references form a cycle involving {stuck}")
    return tuple(order)


def _normalize_rows(node: NodeModel, variable: Variable) -> NodeModel:
    cpt = node.cpt.copy()
    sums = cpt.sum(axis=1)
    off = np.abs(sums - 1.0)
    fix = off > ROW_SUM_SKIP_TOL
    if np.any(fix):
        cpt[fix] = cpt[fix] / sums[fix, None]
    cpt.setflags(write=False)
    return NodeModel(variable=node.variable, parents=node.parents, cpt=cpt)


def build_network(
    variables: Iterable[Variable], nodes: Iterable[NodeModel]
) -> BayesNet:
    """Validate and assemble a network, renormalizing slightly-off CPT rows.

    Rows whose sums deviate from 1 by at most ``ROW_SUM_REJECT_TOL`` are
    renormalized; worse rows raise :class:`NetworkError`, as do cycles,
    dangling parent references, and malformed tables.
    """
    variables = tuple(variables)
    nodes = tuple(nodes)
    # first pass validates structure against the raw tables
    raw = BayesNet(variables=variables, nodes=nodes)
    fixed = tuple(_normalize_rows(n, raw.variable(n.variable)) for n in raw.nodes)
    return BayesNet(variables=variables, nodes=fixed)


def joint_probability(net: BayesNet, full: Mapping[str, str]) -> float:
    """Probability of a full assignment: product of CPT entries along the DAG.

    Accumulated in log space and exponentiated; any zero CPT entry on the
    path annihilates the product.
    """
    net.check_assignment(full, full=True)
    log_p = 0.0
    for node in net.nodes:
        row = _row_index(net, node, full)
        o = net.outcome_index(node.variable, full[node.variable])
        p = float(node.cpt[row, o])
        if p == 0.0:
            return 0.0
        log_p += math.log(p)
    return math.exp(log_p)


def _row_index(net: BayesNet, node: NodeModel, assignment: Mapping[str, str]) -> int:
    """CPT row for the parent configuration; last parent varies fastest."""
    row = 0
    for p in node.parents:
        row = row * net.variable(p).cardinality + net.outcome_index(p, assignment[p])
    return row


def parent_configurations(net: BayesNet, name: str) -> list[tuple[str, ...]]:
    """All parent-outcome label tuples of a node, in CPT row order."""
    node = net.node(name)
    configs: list[tuple[str, ...]] = [()]
    for p in node.parents:
        configs = [c + (o,) for c in configs for o in net.variable(p).outcomes]
    return configs
