"""Labelled bracket scoring with evalb semantics, and UAS/LAS without punctuation."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .trees import DependencyTree, Leaf, Sentence, Tree


class EvalError(ValueError):
    pass


ENGLISH_PUNCT = frozenset({"``", "''", ":", ",", ".", "SYM"})
CHINESE_PUNCT = frozenset({"PU"})


@dataclass(frozen=True)
class EvalConfig:
    punct_tags: frozenset = ENGLISH_PUNCT
    # evalb (COLLINS.prm) deletes these preterminals from bracket boundaries
    bracket_delete_tags: frozenset = frozenset({"``", "''", ":", ",", "."})
    delete_labels: frozenset = frozenset({"TOP", "ROOT", "-NONE-"})
    equivalent_labels: tuple = (("ADVP", "PRT"),)
    include_root: bool = True

    def canonical(self, label: str) -> str:
        for group in self.equivalent_labels:
            if label in group:
                return group[0]
        return label


PROFILES = {
    "english": EvalConfig(),
    "chinese": EvalConfig(punct_tags=CHINESE_PUNCT, bracket_delete_tags=CHINESE_PUNCT),
    "none": EvalConfig(punct_tags=frozenset(), bracket_delete_tags=frozenset(), delete_labels=frozenset(),
                       equivalent_labels=()),
}


def get_profile(name: str) -> EvalConfig:
    try:
        return PROFILES[name]
    except KeyError:
        raise EvalError(f"unknown evaluation profile {name!r}; choose from {sorted(PROFILES)}") from None


def evalb_brackets(tree: Tree, cfg: EvalConfig = EvalConfig()) -> tuple[Counter, list[str]]:
    """Multiset of (label, start, end) brackets plus the kept words.

    Preterminals are not brackets. Words whose tag is in
    ``bracket_delete_tags`` or ``delete_labels`` (traces) are removed
    before boundaries are computed; brackets left covering no words, or
    labelled with a deleted label, are dropped.
    """
    brackets: Counter = Counter()
    words: list[str] = []

    def visit(node, depth: int) -> tuple[int, int]:
        if isinstance(node, Leaf):
            start = len(words)
            if node.tag not in cfg.bracket_delete_tags and node.tag not in cfg.delete_labels:
                words.append(node.word)
            return start, len(words)
        start = len(words)
        for child in node.children:
            visit(child, depth + 1)
        end = len(words)
        if end > start and node.label not in cfg.delete_labels and (cfg.include_root or depth > 0):
            brackets[(cfg.canonical(node.label), start, end)] += 1
        return start, end

    visit(tree, 0)
    return brackets, words


@dataclass
class BracketScore:
    recall: float
    precision: float
    f1: float
    matched: int
    gold: int
    test: int
    sentences: int
    per_sentence: list = field(default_factory=list, repr=False)

    def as_tuple(self) -> tuple[float, float, float]:
        return self.recall, self.precision, self.f1


def _prf(matched: int, gold: int, test: int) -> tuple[float, float, float]:
    recall = 100.0 * matched / gold if gold else 0.0
    precision = 100.0 * matched / test if test else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return recall, precision, f1


def bracket_prf(pred: Sequence[Tree], gold: Sequence[Tree], cfg: EvalConfig = EvalConfig()) -> BracketScore:
    """Micro-averaged labelled recall, precision and F1 (as percentages)."""
    if len(pred) != len(gold):
        raise EvalError(f"{len(pred)} predicted trees but {len(gold)} gold trees")
    matched = n_gold = n_test = 0
    rows = []
    for k, (p, g) in enumerate(zip(pred, gold)):
        gb, gw = evalb_brackets(g, cfg)
        pb, pw = evalb_brackets(p, cfg)
        if len(gw) != len(pw):
            raise EvalError(f"sentence {k + 1}: length mismatch ({len(pw)} predicted vs {len(gw)} gold words)")
        if gw != pw:
            raise EvalError(f"sentence {k + 1}: words differ between predicted and gold trees")
        m = sum((gb & pb).values())
        matched += m
        n_gold += sum(gb.values())
        n_test += sum(pb.values())
        rows.append((k + 1, len(gw), m, sum(gb.values()), sum(pb.values())))
    return BracketScore(*_prf(matched, n_gold, n_test), matched, n_gold, n_test, len(gold), rows)


@dataclass
class AttachmentScore:
    uas: float
    las: float
    tokens: int
    correct_heads: int
    correct_labelled: int
    sentences: int = 0


def uas_las(pred: Sequence[DependencyTree], gold: Sequence[DependencyTree], sentences: Sequence[Sentence],
            cfg: EvalConfig = EvalConfig()) -> AttachmentScore:
    """Attachment scores over tokens whose gold tag is not punctuation."""
    if not (len(pred) == len(gold) == len(sentences)):
        raise EvalError(f"corpus sizes differ: {len(pred)} predicted, {len(gold)} gold, {len(sentences)} sentences")
    total = heads_ok = both_ok = 0
    for k, (p, g, s) in enumerate(zip(pred, gold, sentences)):
        if not (len(p) == len(g) == len(s)):
            raise EvalError(f"sentence {k + 1}: length mismatch ({len(p)} predicted vs {len(g)} gold tokens)")
        for i, tag in enumerate(s.tags):
            if tag in cfg.punct_tags:
                continue
            total += 1
            if p.heads[i] == g.heads[i]:
                heads_ok += 1
                if p.labels and g.labels and p.labels[i] == g.labels[i]:
                    both_ok += 1
    uas = 100.0 * heads_ok / total if total else 0.0
    las = 100.0 * both_ok / total if total else 0.0
    return AttachmentScore(uas, las, total, heads_ok, both_ok, len(gold))


def format_report(brackets: Optional[BracketScore] = None, attachment: Optional[AttachmentScore] = None) -> str:
    """Evalb-style summary; bracket columns in LR, LP, F1 order."""
    lines = []
    if brackets is not None:
        lines += [
            "-- Constituency (evalb) --",
            f"Number of sentence        = {brackets.sentences:6d}",
            f"Bracketing Recall         = {brackets.recall:6.2f}",
            f"Bracketing Precision      = {brackets.precision:6.2f}",
            f"Bracketing FMeasure       = {brackets.f1:6.2f}",
            f"Matched brackets          = {brackets.matched:6d}",
            f"Gold brackets             = {brackets.gold:6d}",
            f"Test brackets             = {brackets.test:6d}",
            "",
            f"{'LR':>8}{'LP':>8}{'F1':>8}",
            f"{brackets.recall:8.2f}{brackets.precision:8.2f}{brackets.f1:8.2f}",
        ]
    if attachment is not None:
        if lines:
            lines.append("")
        lines += [
            "-- Dependency (punctuation excluded) --",
            f"Scored tokens             = {attachment.tokens:6d}",
            f"{'UAS':>8}{'LAS':>8}",
            f"{attachment.uas:8.2f}{attachment.las:8.2f}",
        ]
    return "\n".join(lines) + "\n"


def metric_record(brackets: Optional[BracketScore] = None, attachment: Optional[AttachmentScore] = None) -> dict:
    rec: dict = {}
    if brackets is not None:
        rec.update(LR=brackets.recall, LP=brackets.precision, F1=brackets.f1,
                   matched=brackets.matched, gold_brackets=brackets.gold, test_brackets=brackets.test,
                   sentences=brackets.sentences)
    if attachment is not None:
        rec.update(UAS=attachment.uas, LAS=attachment.las, tokens=attachment.tokens)
        rec.setdefault("sentences", attachment.sentences)
    return rec
