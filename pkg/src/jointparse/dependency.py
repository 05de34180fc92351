"""Biaffine arc/label scoring, head cross-entropy and Eisner decoding."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import tensor as T
from .nn import Linear, Module, uniform_init, zeros
from .tensor import Tensor

NEG_INF = -np.inf


class HeadProjection(Module):
    """Two separate one-layer perceptrons: dependent role and head role."""

    def __init__(self, d_model: int, d_out: int, rng, dtype=np.float32):
        self.dep_mlp = Linear(d_model, d_out, rng, dtype)
        self.head_mlp = Linear(d_model, d_out, rng, dtype)

    def __call__(self, H: Tensor) -> tuple[Tensor, Tensor]:
        return T.relu(self.dep_mlp(H)), T.relu(self.head_mlp(H))


class Biaffine(Module):
    """score[d, h] = h_d^T W g_h + U^T h_d + V^T g_h + b."""

    def __init__(self, d: int, rng, dtype=np.float32):
        self.W = T.parameter(np.zeros((d, d), dtype=dtype))
        self.U = uniform_init(rng, (d, 1), d, 1, dtype)
        self.V = uniform_init(rng, (d, 1), d, 1, dtype)
        self.b = zeros((1,), dtype)

    def __call__(self, h: Tensor, g: Tensor) -> Tensor:
        bilinear = T.matmul(T.matmul(h, self.W), T.transpose(g, (0, 2, 1)))
        dep_term = T.matmul(h, self.U)                       # [B, N, 1]
        head_term = T.transpose(T.matmul(g, self.V), (0, 2, 1))  # [B, 1, N]
        return bilinear + dep_term + head_term + self.b


class LabelBiaffine(Module):
    """Per-relation biaffine over (dependent, chosen head) pairs."""

    def __init__(self, d: int, num_rels: int, rng, dtype=np.float32):
        self.num_rels = num_rels
        self.W = uniform_init(rng, (d, num_rels * d), d, d, dtype)
        self.U = uniform_init(rng, (d, num_rels), d, num_rels, dtype)
        self.V = uniform_init(rng, (d, num_rels), d, num_rels, dtype)
        self.b = zeros((num_rels,), dtype)

    def __call__(self, h: Tensor, g_head: Tensor) -> Tensor:
        B, N, d = h.shape
        hw = T.reshape(T.matmul(h, self.W), (B, N, self.num_rels, d))
        bilinear = T.sum_(hw * T.reshape(g_head, (B, N, 1, d)), axis=-1)
        return bilinear + T.matmul(h, self.U) + T.matmul(g_head, self.V) + self.b


def arc_mask(lengths: Sequence[int], size: int) -> np.ndarray:
    """True where (dependent row, head column) is NOT a legal arc."""
    lengths = np.asarray(lengths)
    pos = np.arange(size)
    head_ok = pos[None, None, :] <= lengths[:, None, None]
    mask = ~np.broadcast_to(head_ok, (len(lengths), size, size))
    return mask | np.eye(size, dtype=bool)[None]


class DependencyScorer(Module):
    def __init__(self, d_model: int, d_arc: int, d_rel: int, num_rels: int, rng, dtype=np.float32):
        self.arc_proj = HeadProjection(d_model, d_arc, rng, dtype)
        self.arc = Biaffine(d_arc, rng, dtype)
        self.rel_proj = HeadProjection(d_model, d_rel, rng, dtype)
        self.rel = LabelBiaffine(d_rel, num_rels, rng, dtype)

    def arc_scores(self, H: Tensor, lengths: Sequence[int]) -> Tensor:
        """Masked [B, N, N] scores, N = max length + 1 (position 0 is ROOT)."""
        N = max(lengths) + 1
        Hn = H[:, 0:N]
        h, g = self.arc_proj(Hn)
        alpha = self.arc(h, g)
        return T.masked_fill(alpha, arc_mask(lengths, N), NEG_INF)

    def label_scores(self, H: Tensor, heads: np.ndarray) -> Tensor:
        """[B, N, R] relation scores for each position given its head."""
        N = heads.shape[1]
        Hn = H[:, 0:N]
        h, g = self.rel_proj(Hn)
        B = heads.shape[0]
        g_head = T.getitem(g, (np.arange(B)[:, None], heads))
        return self.rel(h, g_head)


def dep_loss(arc_scores: Tensor, label_scores: Tensor, gold_heads: np.ndarray,
             gold_rels: np.ndarray, lengths: Sequence[int], mean: bool = False) -> Tensor:
    """Sum over tokens of -log P(gold head) - log P(gold relation | gold head).

    ``gold_heads``/``gold_rels`` are [B, N] with position 0 unused;
    ``label_scores`` must have been computed from the gold heads.
    """
    b_idx, d_idx = [], []
    for b, n in enumerate(lengths):
        b_idx.extend([b] * n)
        d_idx.extend(range(1, n + 1))
    b_idx = np.array(b_idx)
    d_idx = np.array(d_idx)
    arc_lp = T.log_softmax(arc_scores, axis=-1)
    rel_lp = T.log_softmax(label_scores, axis=-1)
    head_term = T.getitem(arc_lp, (b_idx, d_idx, gold_heads[b_idx, d_idx]))
    rel_term = T.getitem(rel_lp, (b_idx, d_idx, gold_rels[b_idx, d_idx]))
    loss = -(T.sum_(head_term) + T.sum_(rel_term))
    if mean:
        loss = loss * (1.0 / len(b_idx))
    return loss


def row_log_softmax(scores: np.ndarray) -> np.ndarray:
    m = np.max(scores, axis=-1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    z = scores - m
    with np.errstate(divide="ignore"):
        return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def eisner(scores: np.ndarray, *, _split_offset: int = 0) -> tuple[list[int], float]:
    """Highest-scoring projective tree with exactly one ROOT dependent.

    ``scores[d, h]`` scores head h for dependent d, positions 0..n with 0
    as ROOT (row 0 is ignored). Returns heads for tokens 1..n and the
    total score. O(n^3) time, O(n^2) space. ``_split_offset`` deliberately
    drops split points and exists only for mutation testing of the oracles.
    """
    n = scores.shape[0] - 1
    if n < 1:
        raise ValueError("need at least one token")
    arc = np.asarray(scores, dtype=np.float64).T  # arc[h, d]
    N = n + 1
    # complete / incomplete charts, direction 0 = head on the right, 1 = head on the left
    C = np.full((N, N, 2), NEG_INF)
    I = np.full((N, N, 2), NEG_INF)
    Cb = np.zeros((N, N, 2), dtype=np.int64)
    Ib = np.zeros((N, N, 2), dtype=np.int64)
    for s in range(N):
        C[s, s, 0] = C[s, s, 1] = 0.0
    for length in range(1, N):
        for s in range(0, N - length):
            t = s + length
            # incomplete: split r in [s, t)
            if s == 0:
                cand = np.array([C[0, 0, 1] + C[1, t, 0]])  # ROOT takes one child only
            else:
                hi = t - _split_offset if t - _split_offset > s else t
                cand = C[s, s:hi, 1] + C[s + 1:hi + 1, t, 0]
            r = int(np.argmax(cand))
            best = cand[r]
            Ib[s, t, 0] = Ib[s, t, 1] = s + r
            I[s, t, 0] = best + arc[t, s] if s > 0 else NEG_INF
            I[s, t, 1] = best + arc[s, t]
            # complete, head on the right: C[s, r, 0] + I[r, t, 0]
            cand = C[s, s:t, 0] + I[s:t, t, 0]
            r = int(np.argmax(cand))
            C[s, t, 0] = cand[r]
            Cb[s, t, 0] = s + r
            # complete, head on the left: I[s, r, 1] + C[r, t, 1]
            cand = I[s, s + 1:t + 1, 1] + C[s + 1:t + 1, t, 1]
            r = int(np.argmax(cand))
            C[s, t, 1] = cand[r]
            Cb[s, t, 1] = s + 1 + r

    heads = [0] * (n + 1)

    def walk(s, t, complete, direction):
        if s == t:
            return
        if complete:
            r = Cb[s, t, direction]
            if direction == 0:
                walk(s, r, True, 0)
                walk(r, t, False, 0)
            else:
                walk(s, r, False, 1)
                walk(r, t, True, 1)
        else:
            r = Ib[s, t, direction]
            if direction == 0:
                heads[s] = t
            else:
                heads[t] = s
            walk(s, r, True, 1)
            walk(r + 1, t, True, 0)

    walk(0, n, True, 1)
    return heads[1:], float(C[0, n, 1])


def eisner_decode(arc_scores: np.ndarray) -> list[int]:
    """Test-time decoding over per-dependent head log-probabilities."""
    return eisner(row_log_softmax(np.asarray(arc_scores, dtype=np.float64)))[0]


def assign_labels(label_scores: np.ndarray) -> list[int]:
    """Per-token argmax relation id (lowest id wins ties)."""
    return [int(i) for i in np.argmax(label_scores, axis=-1)]
