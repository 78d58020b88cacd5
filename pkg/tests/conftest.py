import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bnsentinel.network import NodeModel, Variable, build_network
from bnsentinel.worked_example import worked_example_network


@pytest.fixture(scope="session")
def demo_net():
    """The 3x3 two-variable worked example (x -> y)."""
    return worked_example_network()


def make_disease_net():
    """Rare disease with three noisy symptoms and a gold-standard test.

    P(sick) = .001; each symptom is present with .95 when sick, .05
    otherwise; the test is positive with .99 when sick, .01 otherwise.
    """
    variables = (
        Variable("disease", ("present", "absent")),
        Variable("s1", ("present", "absent")),
        Variable("s2", ("present", "absent")),
        Variable("s3", ("present", "absent")),
        Variable("test", ("pos", "neg")),
    )
    symptom = [[0.95, 0.05], [0.05, 0.95]]
    nodes = (
        NodeModel("disease", (), np.array([[0.001, 0.999]])),
        NodeModel("s1", ("disease",), np.array(symptom)),
        NodeModel("s2", ("disease",), np.array(symptom)),
        NodeModel("s3", ("disease",), np.array(symptom)),
        NodeModel("test", ("disease",), np.array([[0.99, 0.01], [0.01, 0.99]])),
    )
    return build_network(variables, nodes)


@pytest.fixture(scope="session")
def disease_net():
    return make_disease_net()


def make_chain_net():
    """A 4-node binary chain a -> b -> c -> d with asymmetric links."""
    variables = tuple(Variable(n, ("0", "1")) for n in "abcd")
    link = [[0.8, 0.2], [0.3, 0.7]]
    nodes = (
        NodeModel("a", (), np.array([[0.6, 0.4]])),
        NodeModel("b", ("a",), np.array(link)),
        NodeModel("c", ("b",), np.array([[0.9, 0.1], [0.25, 0.75]])),
        NodeModel("d", ("c",), np.array([[0.7, 0.3], [0.4, 0.6]])),
    )
    return build_network(variables, nodes)


@pytest.fixture(scope="session")
def chain_net():
    return make_chain_net()
