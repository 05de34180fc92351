"""The joint parser: shared encoder, span decoder and biaffine decoder."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import tensor as T
from .config import ModelConfig
from .constituent import SpanScorer, cky_decode, hinge_loss, with_empty_column
from .dependency import DependencyScorer, assign_labels, dep_loss, eisner_decode
from .encoder import Encoder, EncoderInput
from .nn import Module
from .tensor import Tensor
from .treebank import PAD, START, STOP, UNK, Example, Vocabulary
from .trees import DependencyTree, Sentence, Tree, binarize_spans, spans_to_tree


class DataError(ValueError):
    pass


@dataclass
class Batch:
    inputs: EncoderInput
    examples: list[Example]
    gold_spans: Optional[list[list[tuple[int, int, int]]]] = None
    gold_heads: Optional[np.ndarray] = None  # [B, N]
    gold_rels: Optional[np.ndarray] = None  # [B, N]

    @property
    def lengths(self) -> list[int]:
        return self.inputs.lengths


@dataclass
class LossBreakdown:
    j1: float
    j2: float
    total: float
    loss: Optional[Tensor] = field(default=None, repr=False)


def encode_inputs(sentences: Sequence[Sentence], vocab: Vocabulary, rng: Optional[np.random.Generator] = None,
                  unk_replace_prob: float = 0.0) -> EncoderInput:
    """Index a list of sentences, wrapping each in START/STOP markers.

    With ``rng`` and a positive ``unk_replace_prob``, training singletons
    are replaced by UNK at that rate.
    """
    B = len(sentences)
    lengths = [len(s) for s in sentences]
    T_ = max(lengths) + 2
    max_chars = max([1] + [len(w) for s in sentences for w in s.words])
    word_ids = np.full((B, T_), vocab.index("word", PAD), dtype=np.int64)
    pre_ids = word_ids.copy()
    pos_ids = np.full((B, T_), vocab.index("pos", PAD), dtype=np.int64)
    char_ids = np.full((B, T_, max_chars), vocab.index("char", PAD), dtype=np.int64)
    char_lengths = np.ones((B, T_), dtype=np.int64)
    for b, sent in enumerate(sentences):
        n = len(sent)
        word_ids[b, 0] = pre_ids[b, 0] = vocab.index("word", START)
        word_ids[b, n + 1] = pre_ids[b, n + 1] = vocab.index("word", STOP)
        pos_ids[b, 0] = vocab.index("pos", START)
        pos_ids[b, n + 1] = vocab.index("pos", STOP)
        char_ids[b, 0, 0] = vocab.index("char", START)
        char_ids[b, n + 1, 0] = vocab.index("char", STOP)
        for i, (w, t) in enumerate(zip(sent.words, sent.tags), start=1):
            wid = vocab.index("word", w)
            pre_ids[b, i] = wid
            if (rng is not None and unk_replace_prob > 0 and vocab.word_counts.get(w, 0) == 1
                    and rng.random() < unk_replace_prob):
                wid = vocab.index("word", UNK)
            word_ids[b, i] = wid
            pos_ids[b, i] = vocab.index("pos", t)
            chars = w or " "
            char_lengths[b, i] = len(chars)
            for k, ch in enumerate(chars):
                char_ids[b, i, k] = vocab.index("char", ch)
    return EncoderInput(word_ids, pos_ids, char_ids, char_lengths, lengths, pre_ids)


def make_batch(examples: Sequence[Example], vocab: Vocabulary, rng=None, unk_replace_prob: float = 0.0,
               need_const: bool = False, need_dep: bool = False) -> Batch:
    inputs = encode_inputs([ex.sentence for ex in examples], vocab, rng, unk_replace_prob)
    batch = Batch(inputs, list(examples))
    if need_const:
        batch.gold_spans = []
        for k, ex in enumerate(examples):
            if ex.tree is None:
                raise DataError(f"sentence {k} ({' '.join(ex.sentence.words[:8])} ...) has no constituency tree")
            batch.gold_spans.append([(i, j, vocab.label_id(l)) for i, j, l in binarize_spans(ex.tree)])
    if need_dep:
        N = max(inputs.lengths) + 1
        heads = np.zeros((len(examples), N), dtype=np.int64)
        rels = np.zeros((len(examples), N), dtype=np.int64)
        for k, ex in enumerate(examples):
            if ex.dep is None:
                raise DataError(f"sentence {k} ({' '.join(ex.sentence.words[:8])} ...) has no dependency tree")
            n = len(ex.dep)
            heads[k, 1:n + 1] = ex.dep.heads
            rels[k, 1:n + 1] = [vocab.index("rel", r) for r in ex.dep.labels]
        batch.gold_heads, batch.gold_rels = heads, rels
    return batch


class JointParser(Module):
    def __init__(self, cfg: ModelConfig, vocab: Vocabulary, seed: int = 0,
                 pretrained: Optional[np.ndarray] = None):
        cfg.validate()
        self.cfg = cfg
        self.vocab = vocab
        rng = np.random.default_rng(seed)
        dtype = cfg.np_dtype
        sizes = {ns: vocab.size(ns) for ns in ("word", "char", "pos")}
        self.encoder = Encoder(cfg, sizes, rng, pretrained)
        self.span_scorer = SpanScorer(cfg.d_model, cfg.d_span_hidden, max(vocab.size("label"), 2), rng, dtype)
        self.dep_scorer = DependencyScorer(cfg.d_model, cfg.d_arc, cfg.d_rel, max(vocab.size("rel"), 1), rng, dtype)

    # losses ---------------------------------------------------------------
    def losses(self, batch: Batch, mode: str = "joint", lambda_: float = 1.0, rng=None) -> LossBreakdown:
        """J1, J2 and total = J1 + lambda * J2 for a batch (graph kept on ``loss``)."""
        paths = {"joint": ("const", "dep"), "const": ("const",), "dep": ("dep",)}[mode]
        H = self.encoder(batch.inputs, rng, paths)
        max_len = max(batch.lengths)
        total = None
        j1 = j2 = 0.0
        if "const" in paths:
            if batch.gold_spans is None:
                raise DataError("batch has no constituency gold")
            scores = self.span_scorer(H["const"], max_len)
            loss1, _ = hinge_loss(scores, batch.gold_spans, batch.lengths)
            j1 = float(loss1.data)
            total = loss1
        if "dep" in paths:
            if batch.gold_heads is None:
                raise DataError("batch has no dependency gold")
            arcs = self.dep_scorer.arc_scores(H["dep"], batch.lengths)
            labels = self.dep_scorer.label_scores(H["dep"], batch.gold_heads)
            loss2 = dep_loss(arcs, labels, batch.gold_heads, batch.gold_rels, batch.lengths, self.cfg.mean_dep_loss)
            j2 = float(loss2.data)
            weighted = loss2 * lambda_ if mode == "joint" else loss2
            total = weighted if total is None else total + weighted
        return LossBreakdown(j1, j2, float(total.data), total)

    # decoding -------------------------------------------------------------
    def parse(self, sentences: Sequence[Sentence], mode: str = "joint",
              batch_size: int = 64) -> list[tuple[Optional[Tree], Optional[DependencyTree]]]:
        """Decode constituency and dependency trees from one shared encode per batch."""
        self.eval()
        paths = {"joint": ("const", "dep"), "const": ("const",), "dep": ("dep",)}[mode]
        labels = self.vocab.labels()
        rels = self.vocab.relations()
        out = []
        for start in range(0, len(sentences), batch_size):
            chunk = list(sentences[start:start + batch_size])
            inputs = encode_inputs(chunk, self.vocab)
            H = self.encoder(inputs, None, paths)
            lengths = inputs.lengths
            trees: list[Optional[Tree]] = [None] * len(chunk)
            deps: list[Optional[DependencyTree]] = [None] * len(chunk)
            if "const" in paths:
                scores = self.span_scorer(H["const"], max(lengths)).data.astype(np.float64)
                for b, (sent, n) in enumerate(zip(chunk, lengths)):
                    spans, _ = cky_decode(with_empty_column(scores[b, :n + 1, :n + 1]))
                    trees[b] = spans_to_tree([(i, j, labels[l]) for i, j, l in spans], sent)
            if "dep" in paths:
                arcs = self.dep_scorer.arc_scores(H["dep"], lengths).data
                N = arcs.shape[1]
                heads = np.zeros((len(chunk), N), dtype=np.int64)
                for b, n in enumerate(lengths):
                    heads[b, 1:n + 1] = eisner_decode(arcs[b, :n + 1, :n + 1])
                rel_scores = self.dep_scorer.label_scores(H["dep"], heads).data
                for b, n in enumerate(lengths):
                    rel_ids = assign_labels(rel_scores[b, 1:n + 1])
                    deps[b] = DependencyTree(heads[b, 1:n + 1].tolist(), [rels[r] for r in rel_ids])
            out.extend(zip(trees, deps))
        return out

    # persistence ------------------------------------------------------------
    def state_arrays(self) -> list[tuple[str, np.ndarray]]:
        items = [(name, p.data) for name, p in self.named_parameters()]
        pre = getattr(self.encoder.tokens, "pretrained", None)
        if pre is not None:
            items.append(("buffer/pretrained", pre.data))
        return items

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, p in self.named_parameters():
            if name not in arrays:
                raise KeyError(f"checkpoint lacks parameter {name}")
            if arrays[name].shape != p.shape:
                raise ValueError(f"{name}: checkpoint shape {arrays[name].shape} != model {p.shape}")
            p.data = arrays[name].astype(p.dtype, copy=True)


def text_array(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-8"), dtype=np.uint8).copy()


def array_text(arr: np.ndarray) -> str:
    return arr.tobytes().decode("utf-8")


def model_metadata(model: JointParser) -> list[tuple[str, np.ndarray]]:
    return [("meta/model_config", text_array(json.dumps(asdict(model.cfg), sort_keys=True))),
            ("meta/vocab", text_array(model.vocab.save()))]


def model_from_arrays(arrays: dict[str, np.ndarray]) -> JointParser:
    raw = json.loads(array_text(arrays["meta/model_config"]))
    raw["char_cnn_widths"] = tuple(raw["char_cnn_widths"])
    cfg = ModelConfig(**raw)
    vocab = Vocabulary.load(array_text(arrays["meta/vocab"]))
    pretrained = arrays.get("buffer/pretrained")
    model = JointParser(cfg, vocab, seed=0, pretrained=pretrained)
    model.load_state_arrays(arrays)
    return model


def save_model(model: JointParser, path) -> None:
    T.save_arrays(path, model_metadata(model) + model.state_arrays())


def load_model(path) -> JointParser:
    return model_from_arrays(T.load_arrays(path))
