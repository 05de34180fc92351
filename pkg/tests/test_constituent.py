import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointparse import tensor as T
from jointparse.constituent import (SpanScorer, augment_scores, cky_decode, hamming_delta, hinge_loss, hinge_value,
                                    loss_augmented_decode, tree_score, with_empty_column)
from jointparse.gradcheck import check_entrywise
from jointparse.oracles import brute_force_constituent, random_gold, random_span_scores
from jointparse.trees import enumerate_bracketings, enumerate_constituent_trees


def full_enumeration_max(scores, gold=None):
    """Max of s(T) (+ Hamming) over every labelled tree, with no shortcuts."""
    n, L = scores.shape[0] - 1, scores.shape[2]
    gold_map = {(i, j): l for i, j, l in gold or []}
    best = -np.inf
    for tree in enumerate_constituent_trees(n, list(range(L))):
        if tree[0][2] == 0:
            continue
        v = sum(scores[i, j, l] for i, j, l in tree)
        if gold is not None:
            v += sum(1 for i, j, l in tree if l != gold_map.get((i, j), 0))
        best = max(best, v)
    return best


# cky ----------------------------------------------------------------------

def test_single_span_example():
    s = with_empty_column(np.array([[[0.0], [2.0]], [[0.0], [0.0]]]))
    assert cky_decode(s) == (((0, 1, 1),), 2.0)


def test_zero_scores_give_tie_break_tree():
    n = 4
    spans, value = cky_decode(np.zeros((n + 1, n + 1, 3)))
    assert value == 0.0
    # smallest split everywhere -> right-branching, lowest labels (root must be non-empty)
    assert spans == ((0, 4, 1), (0, 1, 0), (1, 4, 0), (1, 2, 0), (2, 4, 0), (2, 3, 0), (3, 4, 0))


def test_root_label_never_empty():
    s = np.full((4, 4, 3), -3.0)
    s[..., 0] = 0.0
    spans, value = cky_decode(s)
    assert spans[0][:2] == (0, 3) and spans[0][2] != 0
    assert value == -3.0


@pytest.mark.parametrize("n", range(1, 5))
def test_cky_matches_full_labelled_enumeration(n):
    for seed in range(25):
        s = random_span_scores(np.random.default_rng([n, seed, 99]), n, 3)
        assert cky_decode(s)[1] == full_enumeration_max(s)


@pytest.mark.parametrize("n", range(1, 7))
def test_cky_matches_bracketing_enumeration(n):
    for seed in range(100):
        s = random_span_scores(np.random.default_rng([n, seed, 5]), n, 4)
        spans, value = cky_decode(s)
        ref_spans, ref_value = brute_force_constituent(s)
        assert value == ref_value and spans == ref_spans
        assert tree_score(s, spans) == value


def test_brute_force_modes_agree():
    for seed in range(20):
        s = random_span_scores(np.random.default_rng(seed), 3, 3)
        assert brute_force_constituent(s) == brute_force_constituent(s, full=True)
        g = random_gold(np.random.default_rng(seed), 3, 3)
        assert brute_force_constituent(s, g)[1] == brute_force_constituent(s, g, full=True)[1]


@settings(max_examples=60)
@given(st.integers(1, 10), st.integers(2, 5), st.integers(0, 2**31))
def test_cky_output_is_a_full_binary_tree(n, L, seed):
    s = np.random.default_rng(seed).standard_normal((n + 1, n + 1, L))
    spans, value = cky_decode(s)
    assert len(spans) == 2 * n - 1
    assert spans[0][:2] == (0, n) and spans[0][2] != 0
    assert sorted((i, j) for i, j, _ in spans if j - i == 1) == [(k, k + 1) for k in range(n)]
    assert np.isclose(tree_score(s, spans), value)


# hamming ---------------------------------------------------------------------

def test_hamming_examples():
    gold = [(0, 3, "S"), (0, 2, "NP"), (2, 3, "VP")]
    assert hamming_delta(gold, gold, empty="") == 0
    assert hamming_delta([(0, 3, "S"), (0, 2, "VP"), (2, 3, "VP")], gold, empty="") == 1


@pytest.mark.parametrize("seed", range(20))
def test_hamming_matches_set_difference(seed):
    rng = np.random.default_rng(seed)
    n = 3
    pred, gold = random_gold(rng, n, 3), random_gold(rng, n, 3)
    gold_positions = {(i, j) for i, j, _ in gold}
    reference = set(gold) | {(i, j, 0) for i in range(n) for j in range(i + 1, n + 1) if (i, j) not in gold_positions}
    assert hamming_delta(pred, gold) == len(set(pred) - reference)


def test_augment_scores_adds_unit_cost_off_gold():
    s = np.zeros((3, 3, 2))
    aug = augment_scores(s, {(0, 2): 1})
    assert aug[0, 2, 1] == 0 and aug[0, 2, 0] == 1
    assert aug[0, 1, 0] == 0 and aug[0, 1, 1] == 1


# loss-augmented decoding -----------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 6))
def test_loss_augmented_matches_enumeration(n):
    for seed in range(100):
        rng = np.random.default_rng([n, seed, 3])
        s = random_span_scores(rng, n, 3)
        gold = random_gold(rng, n, 3)
        spans, value = loss_augmented_decode(s, gold)
        assert value == brute_force_constituent(s, gold)[1]
        assert value == tree_score(s, spans) + hamming_delta(spans, gold)
        assert value >= tree_score(s, gold)


@pytest.mark.parametrize("n", range(1, 4))
def test_loss_augmented_matches_full_enumeration(n):
    for seed in range(10):
        rng = np.random.default_rng([n, seed, 8])
        s = random_span_scores(rng, n, 3)
        gold = random_gold(rng, n, 3)
        assert loss_augmented_decode(s, gold)[1] == full_enumeration_max(s, gold)


def test_dominant_gold_is_returned():
    n, L = 5, 3
    M = float(n * n + 1)
    rng = np.random.default_rng(0)
    gold = [(i, j, int(rng.integers(1, L))) for i, j in next(iter(enumerate_bracketings(n)))]
    s = np.full((n + 1, n + 1, L), -M)
    s[..., 0] = 0.0
    for i, j, l in gold:
        s[i, j, l] = M
    # any other tree loses at least one gold span (M) and gains at most 2n - 1 < M in Hamming cost
    spans, value = loss_augmented_decode(s, gold)
    assert sorted(spans) == sorted(gold)
    assert value == tree_score(s, gold)


@pytest.mark.parametrize("n", range(1, 6))
def test_zero_scores_maximize_hamming(n):
    s = np.zeros((n + 1, n + 1, 3))
    for seed in range(5):
        gold = random_gold(np.random.default_rng([n, seed]), n, 3)
        best_delta = 0
        for structure in enumerate_bracketings(n):
            # every span can take a label different from gold's
            best_delta = max(best_delta, len(structure))
        spans, value = loss_augmented_decode(s, gold)
        assert value == best_delta == 2 * n - 1
        assert hamming_delta(spans, gold) == value


# hinge ------------------------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 6))
def test_hinge_value_matches_brute_force(n):
    for seed in range(40):
        rng = np.random.default_rng([n, seed, 17])
        s = random_span_scores(rng, n, 3)
        gold = random_gold(rng, n, 3)
        expected = max(0.0, brute_force_constituent(s, gold)[1] - tree_score(s, gold))
        assert hinge_value(s, gold) == expected >= 0.0
        if expected == 0.0:
            # zero loss: gold is an unaugmented argmax as well
            assert brute_force_constituent(s)[1] == tree_score(s, gold)


def test_hinge_zero_when_margin_satisfied():
    n = 3
    gold = [(0, 3, 1), (0, 1, 0), (1, 3, 2), (1, 2, 0), (2, 3, 0)]
    s = np.zeros((n + 1, n + 1, 3))
    s[..., 1:] = -10.0
    s[0, 3, 1] = 10.0
    s[1, 3, 2] = 10.0
    assert hinge_value(s, gold) == 0.0
    loss, _ = hinge_loss(T.parameter(s[None, :, :, 1:]), [gold], [n])
    assert float(loss.data) == 0.0


def test_hinge_tensor_value_and_gradient_match_oracle():
    n, L = 4, 3
    for seed in range(30):
        rng = np.random.default_rng([seed, 23])
        s = random_span_scores(rng, n, L)
        gold = random_gold(rng, n, L)
        x = T.parameter(s[None, :, :, 1:])
        loss, (pred,) = hinge_loss(x, [gold], [n])
        value = float(loss.data)
        assert value == hinge_value(s, gold)
        loss.backward()
        expected = np.zeros_like(s)
        if value > 0:
            for i, j, l in pred:
                expected[i, j, l] += 1
            for i, j, l in gold:
                expected[i, j, l] -= 1
        np.testing.assert_array_equal(x.grad[0], expected[..., 1:])


def test_hinge_loss_batches_sentences_independently():
    rng = np.random.default_rng(4)
    F = 5
    data = rng.standard_normal((2, F, F, 2))
    golds = [random_gold(rng, 4, 3), random_gold(rng, 2, 3)]
    loss, _ = hinge_loss(T.parameter(data), golds, [4, 2])
    parts = [hinge_value(with_empty_column(data[b, :n + 1, :n + 1]), g) for b, (g, n) in enumerate(zip(golds, [4, 2]))]
    assert np.isclose(float(loss.data), sum(parts))


def test_gradient_step_reduces_positive_hinge():
    rng = np.random.default_rng(12)
    n = 5
    s = random_span_scores(rng, n, 3)
    gold = random_gold(rng, n, 3)
    x = T.parameter(s[None, :, :, 1:])
    loss, _ = hinge_loss(x, [gold], [n])
    before = float(loss.data)
    assert before > 0
    loss.backward()
    x.data = x.data - 0.5 * x.grad
    after = float(hinge_loss(x, [gold], [n])[0].data)
    assert after < before


# span scorer --------------------------------------------------------------------

def test_span_scorer_shapes_and_empty_column():
    rng = np.random.default_rng(0)
    scorer = SpanScorer(8, 6, 4, rng, np.float64)
    H = T.Tensor(rng.standard_normal((2, 5, 8)))
    out = scorer(H, 3)
    assert out.shape == (2, 4, 4, 3)
    full = with_empty_column(out.data)
    assert np.all(full[..., 0] == 0)
    # a one-token sentence has exactly one span to decode
    spans, _ = cky_decode(with_empty_column(scorer(T.Tensor(rng.standard_normal((1, 3, 8))), 1).data[0]))
    assert [s[:2] for s in spans] == [(0, 1)]


def test_span_features_are_fencepost_differences():
    rng = np.random.default_rng(1)
    scorer = SpanScorer(8, 6, 3, rng, np.float64)
    H = rng.standard_normal((1, 5, 8))
    feats = scorer.span_features(T.Tensor(H), 3).data[0]
    fwd = np.concatenate([H[0, :, 0:2], H[0, :, 4:6]], -1)
    bwd = np.concatenate([H[0, :, 2:4], H[0, :, 6:8]], -1)
    for i in range(4):
        for j in range(i + 1, 4):
            np.testing.assert_allclose(feats[i, j], np.concatenate([fwd[j] - fwd[i], bwd[i + 1] - bwd[j + 1]]))


@pytest.mark.parametrize("seed", range(5))
def test_span_scorer_gradients(seed):
    rng = np.random.default_rng(seed)
    scorer = SpanScorer(8, 6, 4, rng, np.float64)
    H = T.parameter(rng.standard_normal((1, 5, 8)))
    # only i < j spans are meaningful; i == j rows sit exactly on the ReLU kink
    w = rng.standard_normal((1, 4, 4, 3)) * np.triu(np.ones((4, 4)), 1)[None, :, :, None]
    fn = lambda: T.sum_(scorer(H, 3) * w)
    errs = check_entrywise(fn, [H] + scorer.parameters())
    assert max(errs) < 1e-4
