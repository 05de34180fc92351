"""Bracketed and CoNLL treebank readers/writers, vocabularies, word vectors."""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .trees import EMPTY, DependencyTree, Leaf, Sentence, Tree, to_labeled_spans, validate_tree

log = logging.getLogger(__name__)


class TreebankFormatError(ValueError):
    pass


# bracketed trees ---------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def read_bracketed(text: str) -> list[tuple[Sentence, Tree]]:
    """Parse whitespace-separated PTB-style trees.

    An unlabelled outer wrapper around a single tree, as in ``( (S ...))``,
    is stripped.
    """
    tokens = [(m.group(), m.start()) for m in _TOKEN.finditer(text)]
    pos = 0
    out: list[tuple[Sentence, Tree]] = []

    def fail(msg: str, offset: int):
        line, col = _line_col(text, offset)
        raise TreebankFormatError(f"{msg} at line {line}, column {col}")

    def parse_node(counter: list[int]):
        nonlocal pos
        tok, off = tokens[pos]
        if tok != "(":
            fail(f"expected '(' but found {tok!r}", off)
        pos += 1
        if pos >= len(tokens):
            fail("unexpected end of input", len(text))
        label = ""
        if tokens[pos][0] not in "()":
            label = tokens[pos][0]
            pos += 1
        if pos >= len(tokens):
            fail("unexpected end of input", len(text))
        # preterminal: (TAG word)
        if tokens[pos][0] not in "()":
            word = tokens[pos][0]
            pos += 1
            if pos >= len(tokens) or tokens[pos][0] != ")":
                fail("expected ')' after word", tokens[pos][1] if pos < len(tokens) else len(text))
            pos += 1
            leaf = Leaf(label, word, counter[0])
            counter[0] += 1
            return leaf
        children = []
        while pos < len(tokens) and tokens[pos][0] == "(":
            children.append(parse_node(counter))
        if pos >= len(tokens):
            fail("unbalanced parentheses: unexpected end of input", len(text))
        if tokens[pos][0] != ")":
            fail(f"unexpected token {tokens[pos][0]!r}", tokens[pos][1])
        if not children:
            fail("empty tree", tokens[pos][1])
        pos += 1
        return Tree(label, children)

    while pos < len(tokens):
        tok, off = tokens[pos]
        if tok != "(":
            fail(f"expected '(' but found {tok!r}", off)
        node = parse_node([0])
        while isinstance(node, Tree) and node.label == "" and len(node.children) == 1:
            node = node.children[0]
        if isinstance(node, Leaf):
            fail("tree has no constituent above the preterminal", off)
        validate_tree(node)
        out.append((node.sentence(), node))
    return out


def write_bracketed(tree: Tree) -> str:
    def render(node) -> str:
        if isinstance(node, Leaf):
            return f"({node.tag} {node.word})"
        return f"({node.label} " + " ".join(render(c) for c in node.children) + ")"

    return render(tree)


def write_bracketed_corpus(trees: Iterable[Tree]) -> str:
    return "".join(write_bracketed(t) + "\n" for t in trees)


# CoNLL ------------------------------------------------------------------

def read_conll(text: str) -> list[tuple[Sentence, DependencyTree]]:
    """Read dependency blocks.

    Column layout is chosen per line by count: 10 or more columns is
    CoNLL-X (id form lemma cpos pos feats head rel ...), 6-9 columns is
    id form lemma pos head rel, 5 columns is id form pos head rel.
    """
    out: list[tuple[Sentence, DependencyTree]] = []
    block: list[tuple[int, list[str]]] = []

    def flush():
        if not block:
            return
        words, tags, heads, rels = [], [], [], []
        for lineno, cols in block:
            if len(cols) >= 10:
                form, pos, head, rel = cols[1], cols[4], cols[6], cols[7]
            elif len(cols) >= 6:
                form, pos, head, rel = cols[1], cols[3], cols[4], cols[5]
            elif len(cols) == 5:
                form, pos, head, rel = cols[1], cols[2], cols[3], cols[4]
            else:
                raise TreebankFormatError(f"line {lineno}: expected at least 5 columns, got {len(cols)}")
            try:
                heads.append(int(head))
            except ValueError:
                raise TreebankFormatError(f"line {lineno}: head {head!r} is not an integer") from None
            words.append(form)
            tags.append(pos)
            rels.append(rel)
        n = len(words)
        for (lineno, _), h in zip(block, heads):
            if not 0 <= h <= n:
                raise TreebankFormatError(
                    f"sentence {len(out) + 1}, line {lineno}: head {h} out of range [0, {n}]")
        out.append((Sentence(words, tags), DependencyTree(heads, rels)))
        block.clear()

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            flush()
            continue
        if stripped.startswith("#"):
            continue
        cols = stripped.split("\t") if "\t" in stripped else stripped.split()
        # multiword-token and empty-node lines (1-2, 1.1) are skipped
        if "-" in cols[0] or "." in cols[0]:
            continue
        block.append((lineno, cols))
    flush()
    return out


def write_conll(sentence: Sentence, tree: DependencyTree) -> str:
    lines = []
    for i, (w, t, h) in enumerate(zip(sentence.words, sentence.tags, tree.heads), start=1):
        rel = tree.labels[i - 1] if tree.labels else "_"
        lines.append("\t".join([str(i), w, "_", t, t, "_", str(h), rel, "_", "_"]))
    return "\n".join(lines) + "\n"


def write_conll_corpus(pairs: Iterable[tuple[Sentence, DependencyTree]]) -> str:
    return "".join(write_conll(s, t) + "\n" for s, t in pairs)


# corpus -----------------------------------------------------------------

@dataclass
class Example:
    sentence: Sentence
    tree: Optional[Tree] = None
    dep: Optional[DependencyTree] = None


def align_corpus(trees: Optional[list[tuple[Sentence, Tree]]],
                 deps: Optional[list[tuple[Sentence, DependencyTree]]]) -> list[Example]:
    """Zip constituency and dependency readings of the same sentences."""
    if trees is None and deps is None:
        return []
    if trees is None:
        return [Example(s, None, d) for s, d in deps]
    if deps is None:
        return [Example(s, t, None) for s, t in trees]
    if len(trees) != len(deps):
        raise TreebankFormatError(f"{len(trees)} trees but {len(deps)} dependency blocks")
    out = []
    for k, ((s1, t), (s2, d)) in enumerate(zip(trees, deps)):
        if s1.words != s2.words:
            raise TreebankFormatError(f"sentence {k + 1}: token sequences differ between files")
        out.append(Example(s1, t, d))
    return out


def load_corpus(trees_path=None, conll_path=None) -> list[Example]:
    trees = read_bracketed(Path(trees_path).read_text(encoding="utf-8")) if trees_path else None
    deps = read_conll(Path(conll_path).read_text(encoding="utf-8")) if conll_path else None
    return align_corpus(trees, deps)


# vocabulary -------------------------------------------------------------

PAD, UNK, START, STOP = "<pad>", "<unk>", "<root>", "<stop>"
EMPTY_LABEL = "<empty>"  # serialised form of the EMPTY constituent label
RESERVED = (PAD, UNK, START, STOP)
NAMESPACES = ("word", "char", "pos", "label", "rel")
VOCAB_HEADER = "#jointparse-vocab\tv1"


@dataclass
class Vocabulary:
    maps: dict[str, dict[str, int]] = field(default_factory=lambda: {ns: {} for ns in NAMESPACES})
    word_counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self._inverse: dict[str, list[str]] = {}

    def add(self, ns: str, token: str) -> int:
        table = self.maps[ns]
        if token not in table:
            table[token] = len(table)
            self._inverse.pop(ns, None)
        return table[token]

    def index(self, ns: str, token: str) -> int:
        table = self.maps[ns]
        if token in table:
            return table[token]
        if ns in ("word", "char", "pos"):
            return table[UNK]
        raise KeyError(f"{token!r} not in {ns} vocabulary")

    def token(self, ns: str, idx: int) -> str:
        inv = self._inverse.get(ns)
        if inv is None:
            inv = [""] * len(self.maps[ns])
            for tok, i in self.maps[ns].items():
                inv[i] = tok
            self._inverse[ns] = inv
        return inv[idx]

    def size(self, ns: str) -> int:
        return len(self.maps[ns])

    def labels(self) -> list[str]:
        """Constituent labels by id, EMPTY first."""
        return [EMPTY if t == EMPTY_LABEL else t for t in (self.token("label", i) for i in range(self.size("label")))]

    def label_id(self, label: str) -> int:
        return self.maps["label"][EMPTY_LABEL if label == EMPTY else label]

    def relations(self) -> list[str]:
        return [self.token("rel", i) for i in range(self.size("rel"))]

    def save(self) -> str:
        lines = [VOCAB_HEADER]
        for ns in NAMESPACES:
            for tok, i in sorted(self.maps[ns].items(), key=lambda kv: kv[1]):
                lines.append(f"{ns}\t{tok}\t{i}")
        for tok, c in sorted(self.word_counts.items()):
            lines.append(f"count\t{tok}\t{c}")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "Vocabulary":
        lines = text.split("\n")
        if not lines or lines[0] != VOCAB_HEADER:
            raise TreebankFormatError("missing vocabulary header")
        vocab = cls()
        for lineno, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            ns, tok, val = line.split("\t")
            if ns == "count":
                vocab.word_counts[tok] = int(val)
                continue
            if int(val) != len(vocab.maps[ns]):
                raise TreebankFormatError(f"line {lineno}: ids in {ns} are not dense")
            vocab.maps[ns][tok] = int(val)
        return vocab


def build_vocab(corpus: list[Example], min_word_freq: int = 1) -> Vocabulary:
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    vocab = Vocabulary()
    for ns in ("word", "char", "pos"):
        for tok in RESERVED:
            vocab.add(ns, tok)
    vocab.add("label", EMPTY_LABEL)
    counts = Counter(w for ex in corpus for w in ex.sentence.words)
    for ex in corpus:
        for w in ex.sentence.words:
            if counts[w] >= min_word_freq:
                vocab.add("word", w)
            for ch in w:
                vocab.add("char", ch)
        for t in ex.sentence.tags:
            vocab.add("pos", t)
    # labels and relations are sorted so ids do not depend on corpus order
    labels = {l for ex in corpus if ex.tree is not None for _, _, l in to_labeled_spans(ex.tree)}
    for l in sorted(labels):
        vocab.add("label", l)
    rels = {r for ex in corpus if ex.dep is not None for r in ex.dep.labels}
    for r in sorted(rels):
        vocab.add("rel", r)
    vocab.word_counts = {w: c for w, c in counts.items() if w in vocab.maps["word"]}
    return vocab


def load_pretrained_vectors(path, vocab: Vocabulary, dtype=np.float32) -> np.ndarray:
    """Fill a |V| x d matrix from a text vector file; misses stay zero.

    Lookup tries the exact form first, then its lowercase.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue  # word2vec-style header
            vec = np.asarray([float(x) for x in parts[1:]], dtype=dtype)
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise TreebankFormatError(f"{path}, line {lineno}: expected {dim} values, got {len(vec)}")
            vectors[parts[0]] = vec
    if dim is None:
        raise TreebankFormatError(f"{path}: no vectors found")
    out = np.zeros((vocab.size("word"), dim), dtype=dtype)
    hits = 0
    for word, idx in vocab.maps["word"].items():
        vec = vectors.get(word)
        if vec is None:
            vec = vectors.get(word.lower())
        if vec is not None:
            out[idx] = vec
            hits += 1
    log.info("pretrained vectors: %d/%d vocabulary words covered", hits, vocab.size("word"))
    return out
