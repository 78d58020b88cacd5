"""The numba and numpy kernel paths must agree bit for bit."""

import numpy as np
import pytest

from bnsentinel._kernels import (
    ancestral_codes,
    compile_net,
    numba_enabled,
    surprise_scores,
)
from bnsentinel.diagnostics import random_network
from bnsentinel.straw import LN2, independence_straw
from bnsentinel.inference import eliminate


@pytest.mark.parametrize("seed", range(4))
def test_ancestral_codes_backends_agree_exactly(seed):
    net = random_network(seed + 9000)
    compiled = compile_net(net)
    rng = np.random.default_rng(seed)
    uniforms = rng.random((5000, len(net.variables)))
    via_numpy = ancestral_codes(compiled, uniforms, backend="numpy")
    via_numba = ancestral_codes(compiled, uniforms, backend="numba")
    np.testing.assert_array_equal(via_numpy, via_numba)


@pytest.mark.parametrize("seed", range(4))
def test_surprise_scores_backends_agree_exactly(seed):
    net = random_network(seed + 9100)
    scope = net.names
    compiled = compile_net(net)
    rng = np.random.default_rng(seed)
    uniforms = rng.random((5000, len(net.variables)))
    codes = np.empty((5000, len(net.variables)), dtype=np.int64)
    codes[:, compiled.decl_pos] = ancestral_codes(compiled, uniforms, backend="numpy")

    cards = [net.variable(v).cardinality for v in scope]
    strides = np.ones(len(scope), dtype=np.int64)
    for i in range(len(scope) - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]
    log2_pa = (eliminate(net, scope, {}).normalize().log_values / LN2).ravel()
    log2_ps = independence_straw(net, scope).log2_scope_table(scope).ravel()

    a = surprise_scores(codes, strides, log2_ps.copy(), log2_pa.copy(), backend="numpy")
    b = surprise_scores(codes, strides, log2_ps.copy(), log2_pa.copy(), backend="numba")
    np.testing.assert_array_equal(a, b)


def test_env_flag_disables_numba(monkeypatch):
    monkeypatch.setenv("BNSENTINEL_NUMBA", "0")
    assert not numba_enabled()
    monkeypatch.setenv("BNSENTINEL_NUMBA", "1")
    assert numba_enabled()


def test_unknown_backend_rejected():
    net = random_network(1)
    compiled = compile_net(net)
    with pytest.raises(ValueError, match="backend"):
        ancestral_codes(compiled, np.zeros((1, len(net.variables))), backend="cuda")


def test_sampling_distribution_matches_marginals():
    net = random_network(7, min_vars=4, max_vars=4)
    compiled = compile_net(net)
    rng = np.random.default_rng(0)
    uniforms = rng.random((200_000, len(net.variables)))
    codes = ancestral_codes(compiled, uniforms, backend="numpy")
    for j, name in enumerate(compiled.topo_names):
        marginal = eliminate(net, (name,), {}).normalize().table()
        for o, p in enumerate(marginal):
            freq = float(np.mean(codes[:, j] == o))
            assert freq == pytest.approx(p, abs=0.01)
