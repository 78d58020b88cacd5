"""The two-variable worked example behind the ``reproduce-figure1`` command.

A 3x3 joint over variables x and y, chosen so the conflict index is
positive with probability .55 even though the model is correct: mild
dependence makes most cells slightly better explained by the
product-of-marginals straw. Factored as x -> y (any factorization
reproducing the joint would do).
"""

from __future__ import annotations

import numpy as np

from .inference import eliminate, new_session
from .network import BayesNet, NodeModel, Variable, build_network
from .straw import LN2, independence_straw

X_PRIOR = (0.3325, 0.3325, 0.335)
JOINT = (
    (0.1125, 0.11, 0.11),
    (0.1125, 0.11, 0.11),
    (0.11, 0.1125, 0.1125),
)

# Four cells of the conflict table evaluate to -0.0143; the originally
# published rendering of this table shows -.0413 for them, a suspected
# digit transposition.
MISPRINT_NOTE = (
    "note: the four conflict cells equal to -0.0143 here appear as -.0413 "
    "in the originally published table (suspected digit transposition; "
    "direct evaluation of the conflict log-ratio gives -0.0143)"
)


def worked_example_network() -> BayesNet:
    joint = np.array(JOINT)
    x_marginal = np.array(X_PRIOR)
    variables = (
        Variable("x", ("x1", "x2", "x3")),
        Variable("y", ("y1", "y2", "y3")),
    )
    nodes = (
        NodeModel(variable="x", parents=(), cpt=x_marginal.reshape(1, -1)),
        NodeModel(variable="y", parents=("x",), cpt=joint / x_marginal[:, None]),
    )
    return build_network(variables, nodes)


def worked_example_tables() -> dict:
    """Joint, product-of-marginals, and conflict tables plus the tail mass.

    Everything is computed through the inference engine rather than pasted
    in, so the command doubles as an end-to-end exercise of the library.
    """
    net = worked_example_network()
    joint = eliminate(net, ("x", "y"), {}).normalize()
    straw = independence_straw(net, ("x", "y"))
    product = np.exp(straw.log2_scope_table(("x", "y")) * LN2)
    with np.errstate(invalid="ignore"):
        conflict_bits = straw.log2_scope_table(("x", "y")) - joint.log_values / LN2
    joint_table = joint.table()
    p_positive = float(np.sum(joint_table[conflict_bits > 0.0]))
    session = new_session(net)
    return {
        "x_outcomes": list(net.variable("x").outcomes),
        "y_outcomes": list(net.variable("y").outcomes),
        "joint": joint_table,
        "marginal_product": product,
        "conflict_bits": conflict_bits,
        "p_conflict_positive": p_positive,
        "x_marginal": session.posterior("x").distribution,
        "y_marginal": session.posterior("y").distribution,
        "note": MISPRINT_NOTE,
    }
