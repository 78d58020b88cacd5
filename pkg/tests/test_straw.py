"""Straw models, conflict/surprise indices, expected conflict, mixtures."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from bnsentinel import (
    EnumerationCapError,
    EvidenceError,
    ImpossibleEvidenceError,
    MixtureConfig,
    ScopeError,
    conflict_cj,
    expected_conflict,
    explicit_straw,
    independence_straw,
    mixture_posterior,
    mixture_posterior_weight,
    new_session,
    surprise_cs,
)
from bnsentinel.diagnostics import random_network
from bnsentinel.inference import PosteriorTable
from bnsentinel.straw import KIND_EXPLICIT, KIND_INDEPENDENCE


def _full_session(net, key):
    s = new_session(net)
    for v, o in zip(net.names, key):
        s = s.absorb(v, o)
    return s


class TestIndependenceStraw:
    def test_demo_point_is_product_of_marginals(self, demo_net):
        straw = independence_straw(demo_net, ("x", "y"))
        assert straw.kind == KIND_INDEPENDENCE
        p = straw.evidence_probability({"x": "x1", "y": "y1"})
        assert p == pytest.approx(0.3325 * 0.335, rel=1e-12)
        assert p == pytest.approx(0.1114, abs=5e-5)

    def test_single_variable_scope_equals_prior(self, demo_net):
        straw = independence_straw(demo_net, ("x",))
        for label, prior in zip(("x1", "x2", "x3"), (0.3325, 0.3325, 0.335)):
            assert straw.evidence_probability({"x": label}) == pytest.approx(
                prior, rel=1e-12
            )

    def test_equals_joint_when_scope_is_independent(self):
        net = random_network(11, edge_prob=0.0)
        straw = independence_straw(net, net.names)
        for a in oracles.all_assignments(net):
            assert straw.evidence_probability(a) == pytest.approx(
                oracles.joint_of(net, a), rel=1e-12
            )

    def test_unknown_scope_variable_rejected(self, demo_net):
        with pytest.raises(Exception):
            independence_straw(demo_net, ("ghost",))


class TestExplicitStraw:
    def test_table_must_sum_to_one(self, demo_net):
        bad = np.full((3, 3), 0.1)
        with pytest.raises(ScopeError, match="sums to"):
            explicit_straw(demo_net, ("x", "y"), bad)

    def test_partial_assignment_marginalizes(self, demo_net):
        table = oracles.marginal_table(demo_net, ("x", "y"))
        straw = explicit_straw(demo_net, ("x", "y"), table)
        assert straw.kind == KIND_EXPLICIT
        assert straw.evidence_probability({"x": "x3"}) == pytest.approx(0.335, rel=1e-12)
        assert straw.evidence_probability({}) == pytest.approx(1.0, rel=1e-12)


class TestSurprise:
    def test_zero_against_itself(self, demo_net):
        table = oracles.marginal_table(demo_net, ("x", "y"))
        straw = explicit_straw(demo_net, ("x", "y"), table)
        for x in ("x1", "x2", "x3"):
            for y in ("y1", "y2", "y3"):
                s = _full_session(demo_net, (x, y))
                assert surprise_cs(straw, s) == pytest.approx(0.0, abs=1e-10)

    def test_demo_cells_match_published_values(self, demo_net):
        straw = independence_straw(demo_net, ("x", "y"))
        s = _full_session(demo_net, ("x3", "y1"))
        assert surprise_cs(straw, s) == pytest.approx(0.0289, abs=5e-5)
        s = _full_session(demo_net, ("x1", "y2"))
        assert surprise_cs(straw, s) == pytest.approx(0.0073, abs=5e-5)

    def test_minus_infinity_when_straw_excludes_evidence(self, demo_net):
        table = np.zeros((3, 3))
        table[0, 0] = 1.0
        straw = explicit_straw(demo_net, ("x", "y"), table)
        s = _full_session(demo_net, ("x2", "y2"))
        assert surprise_cs(straw, s) == -math.inf

    def test_evidence_outside_scope_rejected(self, demo_net):
        straw = independence_straw(demo_net, ("x",))
        s = _full_session(demo_net, ("x1", "y1"))
        with pytest.raises(ScopeError, match="outside"):
            surprise_cs(straw, s)

    @pytest.mark.parametrize("seed", range(5))
    def test_antisymmetric_under_role_swap(self, seed):
        net_a = random_network(seed + 7000)
        net_b = random_network(seed + 7500, variables=net_a.variables)
        ja = oracles.enumerate_joint(net_a)
        jb = oracles.enumerate_joint(net_b)
        key = max(ja, key=lambda k: min(ja[k], jb[k]))
        shape = tuple(v.cardinality for v in net_a.variables)
        straw_b = explicit_straw(
            net_a, net_a.names, np.array(list(jb.values())).reshape(shape)
        )
        straw_a = explicit_straw(
            net_b, net_b.names, np.array(list(ja.values())).reshape(shape)
        )
        forward = surprise_cs(straw_b, _full_session(net_a, key))
        backward = surprise_cs(straw_a, _full_session(net_b, key))
        assert forward == pytest.approx(-backward, abs=1e-10)


class TestConflict:
    def test_demo_cell_x1_y1_is_minus_0_0143(self, demo_net):
        s = _full_session(demo_net, ("x1", "y1"))
        value = conflict_cj(s)
        assert value == pytest.approx(math.log2(0.1113875 / 0.1125), rel=1e-9)
        assert value == pytest.approx(-0.0143, abs=5e-5)

    def test_single_item_has_zero_conflict(self, demo_net):
        s = new_session(demo_net).absorb("y", "y2")
        assert conflict_cj(s) == pytest.approx(0.0, abs=1e-12)

    def test_independent_evidence_has_zero_conflict(self):
        net = random_network(13, edge_prob=0.0)
        sample = oracles.enumerate_joint(net)
        key = max(sample, key=sample.get)
        s = _full_session(net, key)
        assert conflict_cj(s) == pytest.approx(0.0, abs=1e-10)

    def test_empty_session_rejected(self, demo_net):
        with pytest.raises(EvidenceError):
            conflict_cj(new_session(demo_net))

    def test_identical_to_surprise_with_independence_straw(self, demo_net):
        s = _full_session(demo_net, ("x3", "y2"))
        straw = independence_straw(demo_net, ("x", "y"))
        assert conflict_cj(s) == surprise_cs(straw, s)

    @pytest.mark.parametrize("seed", range(5))
    def test_incremental_value_matches_oracle_recomputation(self, seed):
        net = random_network(seed + 8000)
        joint = oracles.enumerate_joint(net)
        key = max(joint, key=joint.get)
        s = new_session(net)
        evidence = {}
        for v, o in zip(net.names, key):
            s = s.absorb(v, o)
            evidence[v] = o
            priors = math.prod(
                oracles.evidence_probability(net, {w: q}) for w, q in evidence.items()
            )
            expected = math.log2(priors) - math.log2(
                oracles.evidence_probability(net, evidence)
            )
            assert conflict_cj(s) == pytest.approx(expected, abs=1e-10)


class TestExpectedConflict:
    def test_zero_for_independent_scope(self):
        net = random_network(17, edge_prob=0.0)
        assert expected_conflict(net, net.names) == pytest.approx(0.0, abs=1e-10)

    def test_demo_value_is_probability_weighted_cell_sum(self, demo_net):
        joint = oracles.marginal_table(demo_net, ("x", "y"))
        priors = np.outer([0.3325, 0.3325, 0.335], [0.335, 0.3325, 0.3325])
        cells = np.log2(priors / joint)
        expected = float(np.sum(joint * cells))
        got = expected_conflict(demo_net, ("x", "y"))
        assert got == pytest.approx(expected, abs=1e-12)
        assert got <= 0.0

    @pytest.mark.parametrize("seed", range(10))
    def test_equals_negative_kl_oracle(self, seed):
        net = random_network(seed + 9000)
        scope = net.names
        joint = oracles.marginal_table(net, scope)
        indep = np.ones(joint.shape)
        for axis, v in enumerate(scope):
            shape = [1] * len(scope)
            shape[axis] = net.variable(v).cardinality
            indep = indep * oracles.marginal_table(net, (v,)).reshape(shape)
        kl = oracles.kl_bits(joint, indep)
        value = expected_conflict(net, scope)
        assert value == pytest.approx(-kl, abs=1e-10)
        assert value <= 0.0

    def test_cap_is_enforced(self, demo_net):
        with pytest.raises(EnumerationCapError):
            expected_conflict(demo_net, ("x", "y"), cap=8)


class TestMixtureWeight:
    def test_zero_epsilon_stays_zero(self):
        cfg = MixtureConfig(0.0)
        assert mixture_posterior_weight(cfg, 0.5, 0.9) == 0.0

    def test_equal_evidence_probabilities_return_epsilon(self):
        cfg = MixtureConfig(0.07)
        assert mixture_posterior_weight(cfg, 0.25, 0.25) == pytest.approx(0.07, rel=1e-12)

    def test_ratio_100_at_epsilon_001(self):
        cfg = MixtureConfig(0.01)
        got = mixture_posterior_weight(cfg, 0.001, 0.1)
        assert got == pytest.approx(0.502513, abs=5e-7)
        odds = got / (1 - got)
        assert odds == pytest.approx((0.01 / 0.99) * 100.0, rel=1e-12)

    def test_both_zero_rejected(self):
        with pytest.raises(ImpossibleEvidenceError):
            mixture_posterior_weight(MixtureConfig(0.1), 0.0, 0.0)

    def test_epsilon_range_enforced(self):
        with pytest.raises(ValueError):
            MixtureConfig(1.0)
        with pytest.raises(ValueError):
            MixtureConfig(-0.1)

    @settings(max_examples=60, deadline=None)
    @given(
        eps=st.floats(1e-6, 1 - 1e-6),
        pa=st.floats(1e-12, 1.0),
        ratio_lo=st.floats(0.0, 1e6),
        bump=st.floats(1e-9, 1e6),
    )
    def test_weight_monotone_in_likelihood_ratio(self, eps, pa, ratio_lo, bump):
        cfg = MixtureConfig(eps)
        lo = mixture_posterior_weight(cfg, pa, pa * ratio_lo)
        hi = mixture_posterior_weight(cfg, pa, pa * (ratio_lo + bump))
        assert hi >= lo


class TestMixturePosterior:
    def _tables(self):
        pa = PosteriorTable("v", ("0", "1"), np.array([0.8, 0.2]))
        po = PosteriorTable("v", ("0", "1"), np.array([0.1, 0.9]))
        return pa, po

    def test_weight_zero_keeps_assessed(self):
        pa, po = self._tables()
        np.testing.assert_allclose(
            mixture_posterior(0.0, pa, po).distribution, pa.distribution
        )

    def test_weight_one_keeps_alternative(self):
        pa, po = self._tables()
        np.testing.assert_allclose(
            mixture_posterior(1.0, pa, po).distribution, po.distribution
        )

    def test_mismatched_outcomes_rejected(self):
        pa = PosteriorTable("v", ("0", "1"), np.array([0.8, 0.2]))
        po = PosteriorTable("v", ("a", "b"), np.array([0.1, 0.9]))
        with pytest.raises(ScopeError, match="mismatched"):
            mixture_posterior(0.5, pa, po)

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("eps", [0.001, 0.01, 0.1])
    def test_matches_enumerated_mixture_joint(self, seed, eps):
        net_a = random_network(seed + 10_000)
        net_o = random_network(seed + 10_500, variables=net_a.variables)
        mixture = oracles.mixture_joint(net_a, net_o, eps)
        names = net_a.names
        target = names[0]
        observed = names[1:3]
        joint = oracles.enumerate_joint(net_a)
        key = max(joint, key=joint.get)
        evidence = {v: key[names.index(v)] for v in observed}

        pa_e = oracles.evidence_probability(net_a, evidence)
        po_e = oracles.evidence_probability(net_o, evidence)
        weight = mixture_posterior_weight(MixtureConfig(eps), pa_e, po_e)
        session_a = new_session(net_a)
        session_o = new_session(net_o)
        for v, o in evidence.items():
            session_a = session_a.absorb(v, o)
            session_o = session_o.absorb(v, o)
        combined = mixture_posterior(
            weight, session_a.posterior(target), session_o.posterior(target)
        )

        outcomes = net_a.variable(target).outcomes
        exact = np.zeros(len(outcomes))
        for k, p in mixture.items():
            if all(k[names.index(v)] == o for v, o in evidence.items()):
                exact[outcomes.index(k[0])] += p
        exact = exact / exact.sum()
        np.testing.assert_allclose(combined.distribution, exact, atol=1e-10)
