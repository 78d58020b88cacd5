"""Brute-force reference implementations used as test oracles.

Everything here enumerates full assignments in plain linear-space Python,
deliberately independent of the library's log-space variable-elimination
path: factor products, marginals, conditionals, KL divergences, mixture
joints, and rebuttal odds are all recomputed from first principles.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def all_assignments(net):
    """Every full assignment as a dict, in declaration-order product order."""
    names = [v.name for v in net.variables]
    outcome_lists = [v.outcomes for v in net.variables]
    for combo in itertools.product(*outcome_lists):
        yield dict(zip(names, combo))


def joint_of(net, assignment):
    """Direct product of CPT entries, no logs."""
    p = 1.0
    for node in net.nodes:
        row = 0
        for parent in node.parents:
            row = row * len(net.variable(parent).outcomes) + net.variable(
                parent
            ).outcomes.index(assignment[parent])
        col = net.variable(node.variable).outcomes.index(assignment[node.variable])
        p *= float(node.cpt[row, col])
    return p


def enumerate_joint(net):
    """{full assignment (tuple of outcomes, declaration order): probability}."""
    names = [v.name for v in net.variables]
    return {
        tuple(a[n] for n in names): joint_of(net, a) for a in all_assignments(net)
    }


def evidence_probability(net, evidence):
    """Marginal probability of a partial assignment by full enumeration."""
    total = 0.0
    for a in all_assignments(net):
        if all(a[v] == o for v, o in evidence.items()):
            total += joint_of(net, a)
    return total


def marginal_table(net, variables, evidence=None):
    """Unnormalized table over ``variables`` consistent with ``evidence``."""
    evidence = evidence or {}
    shape = tuple(len(net.variable(v).outcomes) for v in variables)
    table = np.zeros(shape)
    for a in all_assignments(net):
        if all(a[v] == o for v, o in evidence.items()):
            idx = tuple(
                net.variable(v).outcomes.index(a[v]) for v in variables
            )
            table[idx] += joint_of(net, a)
    return table


def conditional_table(net, variables, evidence):
    table = marginal_table(net, variables, evidence)
    total = table.sum()
    if total == 0.0:
        raise ZeroDivisionError("evidence has zero probability")
    return table / total


def kl_bits(p, q):
    """KL(p || q) in bits over flat arrays; inf when supports differ."""
    total = 0.0
    for pi, qi in zip(np.asarray(p).ravel(), np.asarray(q).ravel()):
        if pi == 0.0:
            continue
        if qi == 0.0:
            return math.inf
        total += pi * math.log2(pi / qi)
    return total


def mixture_joint(net_a, net_o, epsilon):
    """Enumerated joint of the two-component mixture, keyed like enumerate_joint."""
    ja = enumerate_joint(net_a)
    jo = enumerate_joint(net_o)
    assert ja.keys() == jo.keys()
    return {k: (1.0 - epsilon) * ja[k] + epsilon * jo[k] for k in ja}


def straw_replaced_net(net, spec):
    """A copy of the net whose node CPT is the straw in every row.

    This is the model conditioned on the rebuttal being true; the original
    net is the model conditioned on it being false.
    """
    from bnsentinel.network import NodeModel, build_network

    nodes = []
    for node in net.nodes:
        if node.variable == spec.node:
            rows = np.tile(spec.straw_distribution, (node.cpt.shape[0], 1))
            nodes.append(
                NodeModel(variable=node.variable, parents=node.parents, cpt=rows)
            )
        else:
            nodes.append(node)
    return build_network(net.variables, nodes)


def rebuttal_odds(net, spec, evidence):
    """Posterior odds of the rebuttal from the two conditioned models.

    Likelihood ratio = P(evidence | rebuttal true) / P(evidence | false),
    each side enumerated on its own net, times the prior odds.
    """
    p_true = evidence_probability(straw_replaced_net(net, spec), evidence)
    p_false = evidence_probability(net, evidence)
    prior_odds = spec.prior_true / (1.0 - spec.prior_true)
    if p_false == 0.0:
        return math.inf if p_true > 0.0 else math.nan
    return (p_true / p_false) * prior_odds
