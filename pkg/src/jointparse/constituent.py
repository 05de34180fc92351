"""Span scoring, CKY decoding and the margin-based constituency loss.

Label id 0 is the empty label. Its score is a constant zero, so the
scorer only produces the L-1 genuine label columns; decoding routines
take the full [n+1, n+1, L] array with the zero column in place.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from . import tensor as T
from .nn import LayerNorm, Linear, Module
from .tensor import Tensor

SpanList = tuple[tuple[int, int, int], ...]


def with_empty_column(scores: np.ndarray) -> np.ndarray:
    """Prepend the constant-zero empty-label column to genuine label scores."""
    zero = np.zeros(scores.shape[:-1] + (1,), dtype=scores.dtype)
    return np.concatenate([zero, scores], axis=-1)


def cky_decode(scores: np.ndarray) -> tuple[SpanList, float]:
    """Best binary labelled tree for ``scores[i, j, label]`` over n tokens.

    Returns preorder spans ``(i, j, label_id)`` and the tree score. The
    root takes a non-empty label. Ties go to the smaller split point, then
    to the lower label id.
    """
    n = scores.shape[0] - 1
    if n < 1:
        raise ValueError("need at least one token")
    best_label = np.argmax(scores, axis=-1)
    best_score = np.take_along_axis(scores, best_label[..., None], axis=-1)[..., 0]
    root_label = 1 + int(np.argmax(scores[0, n, 1:]))
    root_score = scores[0, n, root_label]

    chart = np.zeros((n + 1, n + 1), dtype=np.float64)
    split = np.zeros((n + 1, n + 1), dtype=np.int64)
    for length in range(1, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            label_score = root_score if length == n else best_score[i, j]
            if length == 1:
                chart[i, j] = label_score
                continue
            cand = chart[i, i + 1:j] + chart[i + 1:j, j]
            k = int(np.argmax(cand))
            split[i, j] = i + 1 + k
            chart[i, j] = label_score + cand[k]

    out: list[tuple[int, int, int]] = []
    stack = [(0, n)]
    while stack:
        i, j = stack.pop()
        label = root_label if (i, j) == (0, n) else int(best_label[i, j])
        out.append((i, j, label))
        if j - i > 1:
            k = int(split[i, j])
            stack.append((k, j))
            stack.append((i, k))
    return tuple(out), float(chart[0, n])


def tree_score(scores: np.ndarray, spans: Sequence[tuple[int, int, int]]) -> float:
    return float(sum(scores[i, j, l] for i, j, l in spans))


def hamming_delta(pred_spans, gold_spans, empty=0) -> int:
    """Predicted spans whose label differs from gold's label at that position.

    Positions gold leaves unbracketed carry the empty label. ``empty`` is
    the empty-label value used by both arguments (0 for ids, "" for strings).
    """
    gold = {(i, j): l for i, j, l in gold_spans}
    return sum(1 for i, j, l in pred_spans if l != gold.get((i, j), empty))


def augment_scores(scores: np.ndarray, gold_labels: Mapping[tuple[int, int], int]) -> np.ndarray:
    """Add a unit cost to every (span, label) that disagrees with gold."""
    n = scores.shape[0] - 1
    aug = scores + 1.0
    ii, jj = np.triu_indices(n + 1, k=1)
    gold = np.array([gold_labels.get((i, j), 0) for i, j in zip(ii, jj)], dtype=np.int64)
    aug[ii, jj, gold] -= 1.0
    return aug


def loss_augmented_decode(scores: np.ndarray, gold_spans) -> tuple[SpanList, float]:
    """Argmax of s(T) + Hamming(T, gold) over the decoder's tree space."""
    gold_labels = {(i, j): l for i, j, l in gold_spans}
    return cky_decode(augment_scores(scores, gold_labels))


def hinge_value(scores: np.ndarray, gold_spans) -> float:
    """max(0, max_T[s(T) + Hamming(T, gold)] - s(gold)) on plain arrays."""
    _, best = loss_augmented_decode(scores, gold_spans)
    return max(0.0, best - tree_score(scores, gold_spans))


def hinge_loss(label_scores: Tensor, gold: Sequence[Sequence[tuple[int, int, int]]],
               lengths: Sequence[int]) -> tuple[Tensor, list[SpanList]]:
    """Summed margin loss over a batch.

    ``label_scores`` is [B, F, F, L-1] (genuine labels only). ``gold`` holds
    each sentence's binarized gold spans with label ids. Gradient reaches
    the spans of the cost-augmented best tree (+1) and of the gold tree (-1)
    for sentences whose loss is positive.
    """
    idx_b, idx_i, idx_j, idx_l, sign = [], [], [], [], []
    margin = 0.0
    predicted: list[SpanList] = []
    data = label_scores.data.astype(np.float64)
    for b, (gold_spans, n) in enumerate(zip(gold, lengths)):
        scores = with_empty_column(data[b, :n + 1, :n + 1])
        pred, aug = loss_augmented_decode(scores, gold_spans)
        predicted.append(pred)
        if aug - tree_score(scores, gold_spans) <= 0.0:
            continue
        margin += hamming_delta(pred, gold_spans)
        for spans, s in ((pred, 1.0), (gold_spans, -1.0)):
            for i, j, l in spans:
                if l != 0:
                    idx_b.append(b)
                    idx_i.append(i)
                    idx_j.append(j)
                    idx_l.append(l - 1)
                    sign.append(s)
    if not sign:
        return T.sum_(T.mul(label_scores, 0.0)), predicted
    picked = T.getitem(label_scores, (np.array(idx_b), np.array(idx_i), np.array(idx_j), np.array(idx_l)))
    loss = T.sum_(T.mul(picked, np.array(sign, dtype=label_scores.dtype))) + margin
    return loss, predicted


class SpanScorer(Module):
    """Maps encoder outputs to label scores for every fencepost pair.

    Each encoder row is split into forward and backward feature halves
    (taken from both the content and the position channel). A span
    (i, j) is represented by [f_j - f_i ; b_i - b_j], where f_k reads row
    k and b_k reads row k+1 of the boundary-padded sequence.
    """

    def __init__(self, d_model: int, d_hidden: int, num_labels: int, rng, dtype=np.float32):
        if d_model % 4:
            raise ValueError("d_model must be divisible by 4 for span features")
        self.d_model = d_model
        self.hidden = Linear(d_model, d_hidden, rng, dtype)
        self.norm = LayerNorm(d_hidden, dtype)
        self.out = Linear(d_hidden, num_labels - 1, rng, dtype)

    def span_features(self, H: Tensor, max_len: int) -> Tensor:
        q = self.d_model // 4
        fwd = T.concat([H[:, :, 0:q], H[:, :, 2 * q:3 * q]], axis=-1)
        bwd = T.concat([H[:, :, q:2 * q], H[:, :, 3 * q:4 * q]], axis=-1)
        F = max_len + 1
        f = fwd[:, 0:F]
        bk = bwd[:, 1:F + 1]
        B, _, dh = f.shape
        f_i = T.reshape(f, (B, F, 1, dh))
        f_j = T.reshape(f, (B, 1, F, dh))
        b_i = T.reshape(bk, (B, F, 1, dh))
        b_j = T.reshape(bk, (B, 1, F, dh))
        return T.concat([f_j - f_i, b_i - b_j], axis=-1)

    def __call__(self, H: Tensor, max_len: int) -> Tensor:
        spans = self.span_features(H, max_len)
        return self.out(T.relu(self.norm(self.hidden(spans))))
