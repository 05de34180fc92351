"""Brute-force reference answers for the decoders, and the oracle-check suites.

The references enumerate trees explicitly and never share a recurrence
with the dynamic programs they check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import tensor as T
from .constituent import cky_decode, hamming_delta, loss_augmented_decode, tree_score
from .dependency import eisner
from .trees import EMPTY, enumerate_bracketings, enumerate_constituent_trees, enumerate_projective_trees


@lru_cache(maxsize=None)
def _bracketings(n: int):
    return tuple(enumerate_bracketings(n))


@lru_cache(maxsize=None)
def _projective(n: int) -> np.ndarray:
    return np.array([t.heads for t in enumerate_projective_trees(n)], dtype=np.int64)


def brute_force_constituent(scores: np.ndarray, gold=None, full: bool = False):
    """Best tree by enumeration, maximizing s(T) (+ Hamming to ``gold`` if given).

    ``full=True`` walks every labelled tree; otherwise every bracketing is
    enumerated and each span takes its best label (exact because the
    objective is a sum over spans). Ties go to the lexicographically
    smallest preorder span sequence. Returns (spans, value).
    """
    n = scores.shape[0] - 1
    L = scores.shape[2]
    gold_map = {(i, j): l for i, j, l in gold} if gold is not None else None

    def value(tree):
        v = tree_score(scores, tree)
        if gold is not None:
            v += hamming_delta(tree, gold)
        return v

    best_val, best_tree = -np.inf, None
    if full:
        candidates = enumerate_constituent_trees(n, [EMPTY] + list(range(1, L)))
        for labelled in candidates:
            tree = tuple((i, j, 0 if l == EMPTY else l) for i, j, l in labelled)
            v = value(tree)
            if v > best_val or (v == best_val and tree < best_tree):
                best_val, best_tree = v, tree
        return best_tree, best_val
    for structure in _bracketings(n):
        tree = []
        for i, j in structure:
            row = scores[i, j].astype(np.float64).copy()
            if gold_map is not None:
                row += 1.0
                row[gold_map.get((i, j), 0)] -= 1.0
            if (i, j) == (0, n):
                row[0] = -np.inf
            tree.append((i, j, int(np.argmax(row))))
        tree = tuple(tree)
        v = value(tree)
        if v > best_val or (v == best_val and tree < best_tree):
            best_val, best_tree = v, tree
    return best_tree, best_val


def brute_force_dependency(scores: np.ndarray) -> tuple[list[int], float]:
    """Best single-root projective tree by enumeration; ``scores[d, h]``."""
    n = scores.shape[0] - 1
    trees = _projective(n)
    deps = np.arange(1, n + 1)
    totals = scores[deps[None, :], trees].sum(axis=1)
    k = int(np.argmax(totals))
    return trees[k].tolist(), float(totals[k])


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.cases} cases, {len(self.failures)} failures, {self.seconds:.1f}s"


def random_span_scores(rng: np.random.Generator, n: int, num_labels: int) -> np.ndarray:
    """Integer scores in [-5, 5] with the empty-label column fixed at zero."""
    s = rng.integers(-5, 6, size=(n + 1, n + 1, num_labels)).astype(np.float64)
    s[..., 0] = 0.0
    return s


def random_gold(rng: np.random.Generator, n: int, num_labels: int):
    structure = _bracketings(n)[rng.integers(len(_bracketings(n)))]
    spans = []
    for i, j in structure:
        lo = 1 if (i, j) == (0, n) else 0
        spans.append((i, j, int(rng.integers(lo, num_labels))))
    return spans


def cky_suite(seeds: int = 200, max_n: int = 6, label_counts=(2, 4), decode=cky_decode) -> SuiteResult:
    res = SuiteResult("cky-vs-enumeration")
    t0 = time.perf_counter()
    for n in range(1, max_n + 1):
        for L in label_counts:
            for seed in range(seeds):
                rng = np.random.default_rng([n, L, seed])
                s = random_span_scores(rng, n, L)
                tree, val = decode(s)
                ref_tree, ref_val = brute_force_constituent(s)
                res.cases += 1
                if val != ref_val or tuple(tree) != ref_tree or tree_score(s, tree) != val:
                    res.failures.append((n, L, seed, val, ref_val))
    res.seconds = time.perf_counter() - t0
    return res


def loss_augmented_suite(seeds: int = 100, max_n: int = 6, label_counts=(2, 4),
                         decode=loss_augmented_decode) -> SuiteResult:
    res = SuiteResult("loss-augmented-vs-enumeration")
    t0 = time.perf_counter()
    for n in range(1, max_n + 1):
        for L in label_counts:
            for seed in range(seeds):
                rng = np.random.default_rng([n, L, seed, 7])
                s = random_span_scores(rng, n, L)
                gold = random_gold(rng, n, L)
                tree, val = decode(s, gold)
                _, ref_val = brute_force_constituent(s, gold)
                res.cases += 1
                if val != ref_val or tree_score(s, tree) + hamming_delta(tree, gold) != val:
                    res.failures.append((n, L, seed, val, ref_val))
    res.seconds = time.perf_counter() - t0
    return res


def eisner_suite(seeds: int = 200, max_n: int = 6, decode=eisner) -> SuiteResult:
    from .trees import DependencyTree, validate_projective

    res = SuiteResult("eisner-vs-enumeration")
    t0 = time.perf_counter()
    for n in range(1, max_n + 1):
        for seed in range(seeds):
            rng = np.random.default_rng([n, seed, 11])
            s = rng.standard_normal((n + 1, n + 1))
            heads, val = decode(s)
            _, ref_val = brute_force_dependency(s)
            tree = DependencyTree(list(heads))
            own = float(sum(s[d, h] for d, h in enumerate(heads, start=1)))
            res.cases += 1
            if (abs(val - ref_val) > 1e-9 or abs(own - val) > 1e-9
                    or not tree.is_tree() or not validate_projective(tree)):
                res.failures.append((n, seed, val, ref_val))
    res.seconds = time.perf_counter() - t0
    return res


def primitive_cases(rng: np.random.Generator) -> dict:
    """Scalar test functions over every differentiable primitive, with their parameters."""
    p = lambda x: T.parameter(np.asarray(x, dtype=np.float64))
    a = p(rng.standard_normal((4, 5)))
    b = p(rng.standard_normal((5, 3)))
    v = p(rng.standard_normal(7))
    g, bias = p(rng.standard_normal(5)), p(rng.standard_normal(5))
    pos = p(rng.uniform(0.5, 2.0, (3, 4)))
    w45, w53, w7 = rng.standard_normal((4, 5)), rng.standard_normal((5, 3)), rng.standard_normal(7)
    mask = rng.random((4, 5)) < 0.3
    cond = rng.random((4, 5)) < 0.5
    ids = rng.integers(0, 4, size=(2, 3))
    return {
        "matmul": (lambda: T.sum_(T.matmul(a, b)), [a, b]),
        "softmax": (lambda: T.sum_(T.softmax(v) * w7), [v]),
        "log_softmax": (lambda: T.sum_(T.log_softmax(a, 0) * w45), [a]),
        "layer_norm": (lambda: T.sum_(T.layer_norm(a, g, bias) * w45), [a, g, bias]),
        "add_mul_bcast": (lambda: T.sum_((a + g) * (a * bias) * w45), [a, g, bias]),
        "div": (lambda: T.sum_(a[:3, :4] / pos), [a, pos]),
        "relu_tanh_sigmoid": (lambda: T.sum_(T.relu(a) * T.tanh(a) + T.sigmoid(a) * w45), [a]),
        "exp_log": (lambda: T.sum_(T.log(pos) * T.exp(pos * 0.5)), [pos]),
        "concat_stack": (lambda: T.sum_(T.stack([T.concat([a, a * 2.0], 1), T.concat([a * a, a], 1)])
                                        * np.arange(80.0).reshape(2, 4, 10)), [a]),
        "slice_fancy": (lambda: T.sum_(a[1:3, ::2] * 3.0) + T.sum_(a[[0, 0, 2], [1, 1, 4]] * w7[:3]), [a]),
        "embedding": (lambda: T.sum_(T.embedding(b, ids[..., :2] % 5) * w53[0, :3]), [b]),
        "sum_mean": (lambda: T.sum_(T.mean(a * a, axis=1) * w45[:, 0]) + T.sum_(T.sum_(a, 0) * w45[0]), [a]),
        "transpose_reshape": (lambda: T.sum_(T.reshape(T.transpose(a), (20,)) * w45.reshape(-1)), [a]),
        "max": (lambda: T.sum_(T.max_(a, 1) * w45[:, 0]), [a]),
        "masked_where": (lambda: T.sum_(T.masked_fill(a, mask, 0.0) * w45)
                         + T.sum_(T.where(cond, a, a * a) * w45), [a]),
        # a fresh generator per call keeps the mask fixed across perturbations
        "dropout": (lambda: T.sum_(T.dropout(a, 0.4, np.random.default_rng(5), True) * w45), [a]),
    }


def gradient_suite(seeds: int = 20, tol: float = 1e-6) -> SuiteResult:
    """Entrywise finite-difference checks of every primitive at 64-bit."""
    from .gradcheck import check_entrywise

    res = SuiteResult("primitive-gradients")
    t0 = time.perf_counter()
    for seed in range(seeds):
        for name, (fn, params) in primitive_cases(np.random.default_rng(seed)).items():
            err = max(check_entrywise(fn, params))
            res.cases += 1
            if err >= tol:
                res.failures.append((name, seed, err))
    res.seconds = time.perf_counter() - t0
    return res


def model_gradient_suite(seeds: int = 20, tol: float = 1e-4, directions: int = 2) -> SuiteResult:
    """Directional finite differences of J1 + J2 for every parameter tensor of a small joint model.

    One 3-token sentence, 64-bit, dropout off. Seeds alternate the character
    encoder and the composition so both variants are covered.
    """
    from .config import ModelConfig
    from .gradcheck import check_directional
    from .model import JointParser, make_batch
    from .treebank import Example, build_vocab
    from .trees import DependencyTree, Leaf, Sentence, Tree

    sent = Sentence(["the", "cat", "sat"], ["DT", "NN", "VBD"])
    tree = Tree("S", [Tree("NP", [Leaf("DT", "the", 0), Leaf("NN", "cat", 1)]), Tree("VP", [Leaf("VBD", "sat", 2)])])
    example = Example(sent, tree, DependencyTree([2, 3, 0], ["det", "nsubj", "root"]))
    vocab = build_vocab([example])
    res = SuiteResult("joint-model-gradients")
    t0 = time.perf_counter()
    for seed in range(seeds):
        cfg = ModelConfig(d_model=8, heads=2, d_ff=6, total_layers=2, shared_layers=1, d_word=4, d_pos=4,
                          d_char_emb=3, d_char_out=4, d_span_hidden=5, d_arc=4, d_rel=3, max_len=8,
                          use_pos=True, char_encoder=("lstm", "cnn")[seed % 2],
                          composition=("sum", "concat")[(seed // 2) % 2], dtype="float64",
                          embedding_dropout=0.0, attention_dropout=0.0, residual_dropout=0.0, relu_dropout=0.0)
        if cfg.composition == "concat":
            cfg.d_word, cfg.d_pos, cfg.d_char_out = 2, 2, 4
        model = JointParser(cfg.validate(), vocab, seed=seed)
        batch = make_batch([example], vocab, need_const=True, need_dep=True)
        named = list(model.named_parameters())
        rng = np.random.default_rng([seed, 3])
        loss_fn = lambda: model.losses(batch, "joint", 1.0).loss
        worst = np.zeros(len(named))
        for _ in range(directions):
            worst = np.maximum(worst, check_directional(loss_fn, [p for _, p in named], rng))
        res.cases += len(named)
        for (name, _), err in zip(named, worst):
            if err >= tol:
                res.failures.append((seed, name, float(err)))
    res.seconds = time.perf_counter() - t0
    return res


def run_all(seeds: int = 200, max_n: int = 6, decoders: Optional[dict] = None) -> list[SuiteResult]:
    decoders = decoders or {}
    return [
        cky_suite(seeds, max_n, decode=decoders.get("cky", cky_decode)),
        loss_augmented_suite(max(1, seeds // 2), min(max_n, 6),
                             decode=decoders.get("loss_augmented", loss_augmented_decode)),
        eisner_suite(seeds, max_n, decode=decoders.get("eisner", eisner)),
        gradient_suite(),
    ]
