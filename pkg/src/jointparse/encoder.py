"""Token representation and the content/position-factored self-attention stack."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import tensor as T
from .config import ConfigError, ModelConfig
from .nn import Embedding, LayerNorm, Linear, Module, uniform_init, zeros
from .tensor import Tensor

NEG_INF = -np.inf


@dataclass
class EncoderInput:
    """Index arrays for a padded batch; position 0 is START (also ROOT), n+1 is STOP."""

    word_ids: np.ndarray  # [B, T]
    pos_ids: np.ndarray  # [B, T]
    char_ids: np.ndarray  # [B, T, C]
    char_lengths: np.ndarray  # [B, T], >= 1 everywhere
    lengths: list[int]  # tokens per sentence, without markers
    pretrained_ids: Optional[np.ndarray] = None

    @property
    def valid(self) -> np.ndarray:
        """[B, T] true on START, tokens and STOP."""
        T_ = self.word_ids.shape[1]
        return np.arange(T_)[None, :] < (np.asarray(self.lengths)[:, None] + 2)


class CharLSTM(Module):
    """Bidirectional LSTM over characters; returns both final states concatenated.

    Both directions run in one batched loop: the backward direction reads
    each token's characters reversed, padded at the end like the forward one.
    """

    def __init__(self, num_chars: int, d_emb: int, d_out: int, rng, dtype=np.float32):
        self.d_hidden = d_out // 2
        dh = self.d_hidden
        self.embed = Embedding(num_chars, d_emb, rng, dtype)
        self.W_in = uniform_init(rng, (2, d_emb, 4 * dh), d_emb, 4 * dh, dtype)
        self.W_rec = uniform_init(rng, (2, dh, 4 * dh), dh, 4 * dh, dtype)
        bias = np.zeros((2, 1, 4 * dh), dtype=dtype)
        bias[:, :, dh:2 * dh] = 1.0  # forget gate
        self.bias = T.parameter(bias)

    def __call__(self, char_ids: np.ndarray, char_lengths: np.ndarray) -> Tensor:
        M, C = char_ids.shape
        dh = self.d_hidden
        steps = np.arange(C)[None, :]
        rev_index = np.where(steps < char_lengths[:, None], char_lengths[:, None] - 1 - steps, steps)
        rev_ids = np.take_along_axis(char_ids, rev_index, axis=1)
        ids = np.stack([char_ids, rev_ids])  # [2, M, C]
        emb = self.embed(ids)  # [2, M, C, d_emb]
        x = T.reshape(T.matmul(T.reshape(emb, (2, M * C, -1)), self.W_in), (2, M, C, 4 * dh))
        x = x + T.reshape(self.bias, (2, 1, 1, 4 * dh))
        dtype = self.W_in.dtype
        h = T.Tensor(np.zeros((2, M, dh), dtype=dtype))
        c = T.Tensor(np.zeros((2, M, dh), dtype=dtype))
        for t in range(C):
            gates = x[:, :, t] + T.matmul(h, self.W_rec)
            sig = T.sigmoid(gates[:, :, 0:3 * dh])
            i, f, o = sig[:, :, 0:dh], sig[:, :, dh:2 * dh], sig[:, :, 2 * dh:3 * dh]
            g = T.tanh(gates[:, :, 3 * dh:])
            c_new = f * c + i * g
            h_new = o * T.tanh(c_new)
            live = (t < char_lengths)[None, :, None]
            c = T.where(live, c_new, c)
            h = T.where(live, h_new, h)
        return T.reshape(T.transpose(h, (1, 0, 2)), (M, 2 * dh))


class CharCNN(Module):
    """Multi-width convolutions over characters, max-pooled over positions."""

    def __init__(self, num_chars: int, d_emb: int, d_out: int, widths, rng, dtype=np.float32):
        self.widths = tuple(widths)
        sizes = [d_out // len(self.widths)] * len(self.widths)
        sizes[0] += d_out - sum(sizes)
        self.embed = Embedding(num_chars, d_emb, rng, dtype)
        self.filters = [Linear(w * d_emb, s, rng, dtype) for w, s in zip(self.widths, sizes)]

    def __call__(self, char_ids: np.ndarray, char_lengths: np.ndarray) -> Tensor:
        M, C = char_ids.shape
        outs = []
        for w, conv in zip(self.widths, self.filters):
            padded = np.pad(char_ids, ((0, 0), (w - 1, w - 1)), constant_values=0)
            P = C + w - 1
            windows = np.arange(P)[:, None] + np.arange(w)[None, :]  # [P, w]
            emb = self.embed(padded[:, windows])  # [M, P, w, d]
            feats = T.relu(conv(T.reshape(emb, (M, P, -1))))  # [M, P, f]
            invalid = np.arange(P)[None, :] > (char_lengths[:, None] + w - 2)
            feats = T.masked_fill(feats, invalid[:, :, None], NEG_INF)
            outs.append(T.max_(feats, axis=1))
        return T.concat(outs, axis=-1) if len(outs) > 1 else outs[0]


class TokenRepresentation(Module):
    def __init__(self, cfg: ModelConfig, sizes: dict[str, int], rng,
                 pretrained: Optional[np.ndarray] = None):
        dtype = cfg.np_dtype
        self.cfg = cfg
        dc = cfg.d_content
        if cfg.use_word:
            self.word = Embedding(sizes["word"], cfg.d_word, rng, dtype)
            if pretrained is not None:
                # frozen pretrained table alongside the trained one, merged by a projection
                self.pretrained = T.Tensor(pretrained.astype(dtype))
                self.word_merge = Linear(cfg.d_word + pretrained.shape[1], cfg.d_word, rng, dtype)
        if cfg.use_pos:
            self.pos = Embedding(sizes["pos"], cfg.d_pos, rng, dtype)
        if cfg.use_char:
            if cfg.char_encoder == "lstm":
                self.chars = CharLSTM(sizes["char"], cfg.d_char_emb, cfg.d_char_out, rng, dtype)
            else:
                self.chars = CharCNN(sizes["char"], cfg.d_char_emb, cfg.d_char_out,
                                     cfg.char_cnn_widths, rng, dtype)
        if cfg.composition == "concat":
            width = ((cfg.d_word if cfg.use_word else 0) + (cfg.d_pos if cfg.use_pos else 0)
                     + (cfg.d_char_out if cfg.use_char else 0))
            self.project = Linear(width, dc, rng, dtype, bias=False)

    def sources(self, batch: EncoderInput) -> dict[str, Tensor]:
        B, T_ = batch.word_ids.shape
        out: dict[str, Tensor] = {}
        if self.cfg.use_char:
            flat = self.chars(batch.char_ids.reshape(B * T_, -1), batch.char_lengths.reshape(-1))
            out["char"] = T.reshape(flat, (B, T_, -1))
        if self.cfg.use_word:
            x = self.word(batch.word_ids)
            if hasattr(self, "pretrained"):
                pre_ids = batch.pretrained_ids if batch.pretrained_ids is not None else batch.word_ids
                pre = T.embedding(self.pretrained, pre_ids)
                x = self.word_merge(T.concat([x, pre], axis=-1))
            out["word"] = x
        if self.cfg.use_pos:
            out["pos"] = self.pos(batch.pos_ids)
        return out

    def __call__(self, batch: EncoderInput) -> Tensor:
        return compose_token(self.sources(batch), self.cfg, getattr(self, "project", None))


def compose_token(sources: dict[str, Tensor], cfg: ModelConfig, project: Optional[Linear] = None) -> Tensor:
    """Sum or concatenate (then project) the enabled token sources."""
    parts = [sources[k] for k in ("char", "word", "pos") if k in sources]
    if not parts:
        raise ConfigError("no token sources enabled")
    if cfg.composition == "sum":
        widths = {p.shape[-1] for p in parts}
        if len(widths) != 1:
            raise ConfigError(f"sum composition needs equal source widths, got {sorted(widths)}")
        out = parts[0]
        for p in parts[1:]:
            out = out + p
        return out
    if project is None:
        raise ConfigError("concat composition needs a projection")
    return project(T.concat(parts, axis=-1) if len(parts) > 1 else parts[0])


class FactoredAttentionLayer(Module):
    """Self-attention + feed-forward with separate content and position channels.

    Queries, keys and values are projected separately from each half; the
    attention logits add the content and position dot products. Each half
    keeps its own output projection, feed-forward net and layer norms.
    """

    def __init__(self, d_model: int, heads: int, d_ff: int, rng, dtype=np.float32):
        self.half = d_model // 2
        self.heads = heads
        self.d_kv = self.half // heads
        hk = heads * self.d_kv
        self.qkv_content = Linear(self.half, 3 * hk, rng, dtype, bias=False)
        self.qkv_position = Linear(self.half, 3 * hk, rng, dtype, bias=False)
        self.out_content = Linear(hk, self.half, rng, dtype, bias=False)
        self.out_position = Linear(hk, self.half, rng, dtype, bias=False)
        self.norm_att_content = LayerNorm(self.half, dtype)
        self.norm_att_position = LayerNorm(self.half, dtype)
        d_hidden = d_ff // 2
        self.ff1_content = Linear(self.half, d_hidden, rng, dtype)
        self.ff2_content = Linear(d_hidden, self.half, rng, dtype)
        self.ff1_position = Linear(self.half, d_hidden, rng, dtype)
        self.ff2_position = Linear(d_hidden, self.half, rng, dtype)
        self.norm_ff_content = LayerNorm(self.half, dtype)
        self.norm_ff_position = LayerNorm(self.half, dtype)

    def attend(self, X: Tensor, valid: np.ndarray, rng=None, dropout: float = 0.0) -> tuple[Tensor, Tensor]:
        """Returns per-half attention outputs [B, T, 2*H*d_kv] and weights [B, H, T, T]."""
        B, T_, _ = X.shape
        H, dk = self.heads, self.d_kv
        c, p = X[:, :, :self.half], X[:, :, self.half:]

        def split(t: Tensor) -> Tensor:  # [B, T, 3*H*dk] -> [3, B, H, T, dk]
            return T.transpose(T.reshape(t, (B, T_, 3, H, dk)), (2, 0, 3, 1, 4))

        qkv = T.concat([split(self.qkv_content(c)), split(self.qkv_position(p))], axis=-1)
        q, k, v = qkv[0], qkv[1], qkv[2]  # [B, H, T, 2dk]
        logits = T.matmul(q, T.transpose(k, (0, 1, 3, 2))) * (1.0 / np.sqrt(2 * dk))
        logits = T.masked_fill(logits, ~valid[:, None, None, :], NEG_INF)
        weights = T.softmax(logits, axis=-1)
        att = T.dropout(weights, dropout, rng, self.training)
        out = T.matmul(att, v)  # [B, H, T, 2dk]
        out = T.reshape(T.transpose(out, (0, 2, 1, 3)), (B, T_, H, 2, dk))
        return out, weights

    def __call__(self, X: Tensor, valid: np.ndarray, rng=None, cfg: Optional[ModelConfig] = None) -> Tensor:
        att_p = cfg.attention_dropout if cfg else 0.0
        res_p = cfg.residual_dropout if cfg else 0.0
        relu_p = cfg.relu_dropout if cfg else 0.0
        B, T_, _ = X.shape
        hk = self.heads * self.d_kv
        out, _ = self.attend(X, valid, rng, att_p)
        oc = T.reshape(out[:, :, :, 0], (B, T_, hk))
        op = T.reshape(out[:, :, :, 1], (B, T_, hk))
        c, p = X[:, :, :self.half], X[:, :, self.half:]
        c = self.norm_att_content(c + T.dropout(self.out_content(oc), res_p, rng, self.training))
        p = self.norm_att_position(p + T.dropout(self.out_position(op), res_p, rng, self.training))

        def ff(x, l1, l2, norm):
            hidden = T.dropout(T.relu(l1(x)), relu_p, rng, self.training)
            return norm(x + T.dropout(l2(hidden), res_p, rng, self.training))

        c = ff(c, self.ff1_content, self.ff2_content, self.norm_ff_content)
        p = ff(p, self.ff1_position, self.ff2_position, self.norm_ff_position)
        return T.concat([c, p], axis=-1)


class Encoder(Module):
    """Token representation, position table, then k shared layers and
    (total - k) private layers per decoder path."""

    def __init__(self, cfg: ModelConfig, sizes: dict[str, int], rng, pretrained=None):
        dtype = cfg.np_dtype
        self.cfg = cfg
        self.tokens = TokenRepresentation(cfg, sizes, rng, pretrained)
        self.position = T.parameter((rng.standard_normal((cfg.max_len + 2, cfg.d_content)) * 0.1).astype(dtype))

        def stack(count):
            return [FactoredAttentionLayer(cfg.d_model, cfg.heads, cfg.d_ff, rng, dtype) for _ in range(count)]

        private = cfg.total_layers - cfg.shared_layers
        self.shared = stack(cfg.shared_layers)
        self.const_layers = stack(private)
        self.dep_layers = stack(private)

    def embed(self, batch: EncoderInput, rng=None) -> Tensor:
        B, T_ = batch.word_ids.shape
        if T_ > self.cfg.max_len + 2:
            raise ValueError(f"sentence longer than max_len={self.cfg.max_len}")
        content = T.dropout(self.tokens(batch), self.cfg.embedding_dropout, rng, self.training)
        pos = T.reshape(self.position[0:T_], (1, T_, self.cfg.d_content))
        pos = pos + T.Tensor(np.zeros((B, 1, 1), dtype=pos.dtype))
        return T.concat([content, pos], axis=-1)

    def __call__(self, batch: EncoderInput, rng=None, paths=("const", "dep")) -> dict[str, Tensor]:
        valid = batch.valid
        X = self.embed(batch, rng)
        for layer in self.shared:
            X = layer(X, valid, rng, self.cfg)
        out = {}
        for name, layers in (("const", self.const_layers), ("dep", self.dep_layers)):
            if name not in paths:
                continue
            H = X
            for layer in layers:
                H = layer(H, valid, rng, self.cfg)
            out[name] = H
        return out
