import numpy as np
import pytest

from src.artmap import ArtmapNetwork, ArtmapParams, MatchRule, OutcomeKind, activation, match_ratio
from src.utils.errors import ConfigError, DimensionError, NodeNotFoundError

A = np.array([0.2, 0.7, 0.8, 0.3])


def _oracle_classify(net: ArtmapNetwork, A: np.ndarray, rho: float):
    """Exhaustive scan: highest activation among nodes passing both thresholds, lowest index on ties."""
    best = None
    for j in range(net.node_count):
        T = activation(A, net.weights[j], net.params.alpha)
        if T <= net.params.alpha * net.M:
            continue
        if match_ratio(A, net.weights[j]) < rho:
            continue
        if best is None or T > best[0]:
            best = (T, j)
    return None if best is None else int(net.labels[best[1]])


@pytest.mark.unit
class TestParams:
    def test_defaults(self):
        params = ArtmapParams()
        assert params.alpha == 0.01
        assert params.beta == 1.0
        assert params.epsilon == -0.001
        assert params.match_rule is MatchRule.RATIO

    @pytest.mark.parametrize("field,value", [("alpha", 0.0), ("beta", 0.0), ("beta", 1.5), ("rho_baseline", 1.2)])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ConfigError):
            ArtmapParams(**{field: value})

    def test_from_config(self):
        params = ArtmapParams.from_config({"beta": 0.5, "match_rule": "raw_activation"})
        assert params.beta == 0.5
        assert params.match_rule is MatchRule.RAW_ACTIVATION


@pytest.mark.unit
class TestLearning:
    def test_fast_learning_is_fuzzy_and(self, network):
        j = network.commit_new_node(np.array([0.3, 0.5, 0.9, 0.3]), label=1)
        assert network.learn_into(j, A) == pytest.approx([0.2, 0.5, 0.8, 0.3])

    def test_slow_learning(self):
        net = ArtmapNetwork(2, ArtmapParams(beta=0.5))
        j = net.commit_new_node(np.array([0.3, 0.5, 0.9, 0.3]), label=1)
        assert net.learn_into(j, A) == pytest.approx([0.25, 0.5, 0.85, 0.3])

    def test_fast_learning_idempotent(self, network):
        j = network.commit_new_node(np.array([0.3, 0.5, 0.9, 0.3]), label=1)
        first = network.learn_into(j, A)
        assert np.array_equal(network.learn_into(j, A), first)

    def test_weights_never_increase(self):
        rng = np.random.default_rng(7)
        for beta in (1.0, 0.5, 0.1):
            net = ArtmapNetwork(6, ArtmapParams(beta=beta))
            j = net.commit_new_node(net.complement_code(rng.random(6)), label=1)
            for _ in range(50):
                before = net.weights[j].copy()
                net.learn_into(j, net.complement_code(rng.random(6)))
                assert np.all(net.weights[j] <= before)

    def test_learning_increments_support(self, network):
        j = network.commit_new_node(A, label=1)
        network.learn_into(j, A)
        assert network.node(j).support_count == 2

    def test_template_is_min_fold_of_learned_samples(self):
        rng = np.random.default_rng(5)
        net = ArtmapNetwork(4)
        learned = {}
        for _ in range(200):
            a = net.complement_code(rng.random(4))
            outcome = net.resonance_search(a, 0.6)
            if outcome.kind is OutcomeKind.UPDATED_EXISTING:
                learned[outcome.node].append(a)
            else:
                learned[net.commit_new_node(a, label=1)] = [a]
        assert len(learned) == net.node_count
        for j, samples in learned.items():
            np.testing.assert_array_equal(net.weights[j], np.minimum.reduce(samples))
            assert all(np.all(net.weights[j] <= s) for s in samples)

    def test_unknown_node(self, network):
        with pytest.raises(NodeNotFoundError):
            network.learn_into(0, A)


@pytest.mark.unit
class TestCommit:
    def test_commit_stores_input(self, network):
        j = network.commit_new_node(A, label=1, frame=4)
        node = network.node(j)
        assert j == 0
        assert network.node_count == 1
        assert np.array_equal(node.weights, A)
        assert node.internal_label == 1
        assert node.created_frame == 4

    def test_commits_are_independent(self, network):
        network.commit_new_node(A, label=1)
        other = network.complement_code([0.9, 0.1])
        network.commit_new_node(other, label=2)
        assert network.node_count == 2
        assert np.array_equal(network.weights[0], A)
        assert network.label_count == 2

    def test_recall_after_commit(self, network):
        network.commit_new_node(A, label=2)
        result = network.classify(A)
        assert result.label == 2
        assert result.match_value == pytest.approx(1.0)

    def test_rejects_wrong_width(self, network):
        with pytest.raises(DimensionError):
            network.commit_new_node(np.ones(6), label=1)

    def test_rejects_label_zero(self, network):
        with pytest.raises(ValueError):
            network.commit_new_node(A, label=0)


@pytest.mark.unit
class TestResonanceSearch:
    def test_perfect_match_resonates(self, network):
        network.commit_new_node(A, label=1)
        outcome = network.resonance_search(A, 0.75, supervised_label=1)
        assert outcome.kind is OutcomeKind.UPDATED_EXISTING
        assert outcome.node == 0
        assert outcome.match_value == pytest.approx(1.0)
        assert outcome.resets == 0

    def test_label_mismatch_tracks_then_exhausts(self, network):
        network.commit_new_node(A, label=1)
        outcome = network.resonance_search(A, 0.75, supervised_label=2)
        assert outcome.kind is OutcomeKind.SEARCH_EXHAUSTED
        assert outcome.match_tracked == 1
        assert outcome.final_rho == pytest.approx(0.999)

    def test_runner_up_after_one_reset(self, network):
        a = network.complement_code([0.5, 0.5])
        # high activation but match 0.2
        network.commit_new_node(np.full(4, 0.1), label=1)
        # lower activation, match 1.0
        network.commit_new_node(np.array([0.5, 0.5, 1.0, 1.0]), label=2)
        assert network.ranked_candidates(network.activations(a)) == [0, 1]

        outcome = network.resonance_search(a, 0.75)
        assert outcome.kind is OutcomeKind.UPDATED_EXISTING
        assert outcome.node == 1
        assert outcome.label == 2
        assert outcome.resets == 1

    def test_empty_network_exhausts(self, network):
        outcome = network.resonance_search(A, 0.75)
        assert outcome.kind is OutcomeKind.SEARCH_EXHAUSTED
        assert outcome.ranked == []

    def test_disabled_learning_leaves_weights(self, network):
        network.commit_new_node(np.array([0.3, 0.5, 0.9, 0.3]), label=1)
        before = network.weights.copy()
        outcome = network.resonance_search(A, 0.5, learning_enabled=False)
        assert outcome.kind is OutcomeKind.UPDATED_EXISTING
        assert np.array_equal(network.weights, before)
        assert network.support[0] == 1

    def test_match_tracking_never_lowers_vigilance(self):
        rng = np.random.default_rng(3)
        net = ArtmapNetwork(4)
        for label in (1, 2, 1, 2, 1):
            net.commit_new_node(net.complement_code(rng.random(4)), label=label)
        for _ in range(100):
            a = net.complement_code(rng.random(4))
            outcome = net.resonance_search(a, 0.6, supervised_label=2, learning_enabled=False)
            assert outcome.final_rho >= 0.6
            assert outcome.resets + outcome.match_tracked <= net.node_count

    def test_winner_selections_bounded_by_candidate_set(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            dim = int(rng.integers(1, 9))
            net = ArtmapNetwork(dim)
            for j in range(int(rng.integers(1, 21))):
                net.commit_new_node(net.complement_code(rng.random(dim)), label=1 + j % 3)
            a = net.complement_code(rng.random(dim))
            candidates = net.candidate_subset(net.activations(a))
            outcome = net.resonance_search(
                a, float(rng.random()), supervised_label=int(rng.integers(1, 4)), learning_enabled=False
            )
            selections = outcome.resets + outcome.match_tracked
            selections += int(outcome.kind is OutcomeKind.UPDATED_EXISTING)
            assert selections <= len(candidates)
            assert set(outcome.ranked) == candidates

    def test_rho_start_out_of_range(self, network):
        with pytest.raises(ValueError):
            network.resonance_search(A, 1.5)


@pytest.mark.unit
class TestClassify:
    def test_empty_network_is_unknown(self, network):
        assert network.classify(A).is_unknown

    def test_classify_is_read_only(self, network):
        network.commit_new_node(np.array([0.3, 0.5, 0.9, 0.3]), label=1)
        before = network.weights.copy()
        network.classify(A, rho=0.5)
        assert np.array_equal(network.weights, before)

    def test_eligibility_mask_excludes_nodes(self, network):
        network.commit_new_node(A, label=1)
        assert network.classify(A, eligible=np.array([False])).is_unknown

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            dim = int(rng.integers(1, 9))
            net = ArtmapNetwork(dim)
            for j in range(int(rng.integers(1, 21))):
                net.commit_new_node(net.complement_code(rng.random(dim)), label=1 + j % 4)
                if rng.random() < 0.5:
                    net.learn_into(j, net.complement_code(rng.random(dim)))
            a = net.complement_code(rng.random(dim))
            rho = float(rng.random())
            assert net.classify(a, rho=rho).label == _oracle_classify(net, a, rho)

    def test_raw_activation_rule(self):
        net = ArtmapNetwork(2, ArtmapParams(match_rule="raw_activation"))
        net.commit_new_node(A, label=1)
        result = net.classify(A, rho=0.9)
        assert result.match_value == pytest.approx(3.98 / 4)
