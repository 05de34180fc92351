"""Generate the bundled toy treebanks from a small head-annotated grammar.

Writes bracketed trees and CoNLL files derived from the same trees by head
percolation, so both annotations are token-aligned. Attachment of PPs is
lexically biased but ambiguous, which keeps the held-out task from being
trivially solvable.

    python scripts/make_toy_treebank.py [--out src/jointparse/data]
"""

import argparse
import random
from pathlib import Path

from jointparse.treebank import write_bracketed, write_conll
from jointparse.trees import DependencyTree, Leaf, Tree

LEX = {
    "DT": ["the", "a", "every", "this", "some"],
    "NN": ["cat", "dog", "man", "woman", "telescope", "park", "book", "table", "bird",
           "child", "garden", "city", "letter", "friend", "house", "hill", "river"],
    "NNS": ["cats", "dogs", "books", "birds", "children", "letters", "friends", "trees"],
    "NNP": ["John", "Mary", "Paris", "London", "Alice", "Bob"],
    "PRP": ["he", "she", "they", "we"],
    "JJ": ["big", "small", "old", "red", "happy", "quiet", "green"],
    "RB": ["very", "quite", "really"],
    "ADV": ["quickly", "slowly", "yesterday", "today"],
    "VT": ["saw", "liked", "found", "took", "watched", "read", "wrote", "visited"],
    "VI": ["slept", "laughed", "arrived", "smiled"],
    "VS": ["said", "thought", "knew"],
    "VB": ["read", "take", "watch", "find"],
    "VBZ": ["is", "seems"],
    "IN": ["with", "in", "on", "near", "under"],
}

# relation of a dependent child given (parent label, child label)
RELS = {
    ("S", "NP"): "nsubj", ("S", "."): "punct", ("S", ","): "punct",
    ("VP", "NP"): "dobj", ("VP", "PP"): "prep", ("VP", "SBAR"): "ccomp", ("VP", "ADJP"): "acomp",
    ("VP", "ADVP"): "advmod",
    ("NP", "DT"): "det", ("NP", "JJ"): "amod", ("NP", "PP"): "prep", ("NP", "CC"): "cc", ("NP", "NP"): "conj",
    ("PP", "NP"): "pobj", ("SBAR", "IN"): "mark", ("ADJP", "RB"): "advmod",
}


class Grammar:
    def __init__(self, rng: random.Random, max_depth: int):
        self.rng = rng
        self.max_depth = max_depth

    def word(self, cls):
        return self.rng.choice(LEX[cls])

    def pre(self, tag, cls=None):
        return (tag, self.word(cls or tag))

    # nodes are (label, children, head_index); leaves are (tag, word)
    def np(self, depth, allow_pp=True):
        r = self.rng.random()
        if r < 0.35:
            node = ("NP", [self.pre("DT"), self.pre("NN")], 1)
        elif r < 0.5:
            node = ("NP", [self.pre("DT"), self.pre("JJ"), self.pre("NN")], 2)
        elif r < 0.6:
            node = ("NP", [self.pre("NNP")], 0)
        elif r < 0.7:
            node = ("NP", [self.pre("PRP")], 0)
        elif r < 0.8:
            node = ("NP", [self.pre("NNS")], 0)
        elif r < 0.88:
            node = ("NP", [self.pre("DT"), self.pre("NNS")], 1)
        elif depth < self.max_depth:
            node = ("NP", [self.np(depth + 1, False), ("CC", "and"), self.np(depth + 1, False)], 0)
        else:
            node = ("NP", [self.pre("DT"), self.pre("NN")], 1)
        if allow_pp and depth < self.max_depth and self.rng.random() < 0.2:
            node = ("NP", [node, self.pp(depth + 1)], 0)
        return node

    def pp(self, depth):
        return ("PP", [self.pre("IN"), self.np(depth + 1)], 0)

    def vp(self, depth, imperative=False):
        if imperative:
            return ("VP", [self.pre("VB"), self.np(depth + 1)], 0)
        r = self.rng.random()
        if r < 0.35:
            verb = self.pre("VBD", "VT")
            # watching/seeing verbs prefer a VP-attached instrument
            p_pp = 0.5 if verb[1] in ("saw", "watched") else 0.2
            kids = [verb, self.np(depth + 1)]
            if depth < self.max_depth and self.rng.random() < p_pp:
                kids.append(self.pp(depth + 1))
            return ("VP", kids, 0)
        if r < 0.5:
            return ("VP", [self.pre("VBD", "VI")], 0)
        if r < 0.6:
            return ("VP", [self.pre("VBD", "VI"), self.pp(depth + 1)], 0)
        if r < 0.7:
            return ("VP", [self.pre("VBD", "VI"), ("ADVP", [self.pre("RB", "ADV")], 0)], 0)
        if r < 0.82:
            if self.rng.random() < 0.5:
                adjp = ("ADJP", [self.pre("JJ")], 0)
            else:
                adjp = ("ADJP", [self.pre("RB"), self.pre("JJ")], 1)
            return ("VP", [self.pre("VBZ"), adjp], 0)
        if depth < self.max_depth:
            sbar = ("SBAR", [("IN", "that"), self.s(depth + 1, top=False)], 1)
            return ("VP", [self.pre("VBD", "VS"), sbar], 0)
        return ("VP", [self.pre("VBD", "VI")], 0)

    def s(self, depth=0, top=True):
        if top and self.rng.random() < 0.08:
            kids = [self.vp(depth + 1, imperative=True)]
            if self.rng.random() < 0.5:
                kids.append((".", "."))
            return ("S", kids, 0)
        kids = [self.np(depth + 1), self.vp(depth + 1)]
        if top:
            kids.append((".", "."))
        return ("S", kids, 1)


def to_tree(node, counter):
    if len(node) == 2:
        tag, word = node
        leaf = Leaf(tag, word, counter[0])
        counter[0] += 1
        return leaf
    label, kids, _ = node
    return Tree(label, [to_tree(k, counter) for k in kids])


def dependencies(node, heads, rels, counter):
    """Returns the token index (1-based) heading ``node``; fills heads/rels."""
    if len(node) == 2:
        counter[0] += 1
        return counter[0]
    label, kids, head = node
    child_heads = [dependencies(k, heads, rels, counter) for k in kids]
    h = child_heads[head]
    for k, (kid, ch) in enumerate(zip(kids, child_heads)):
        if k == head:
            continue
        heads[ch] = h
        rels[ch] = RELS.get((label, kid[0]), "dep")
    return h


def generate(rng, count, max_len, max_depth):
    out = []
    seen = set()
    while len(out) < count:
        node = Grammar(rng, max_depth).s()
        tree = to_tree(node, [0])
        words = tuple(l.word for l in tree.leaves())
        if len(words) > max_len or words in seen:
            continue
        seen.add(words)
        heads, rels = {}, {}
        root = dependencies(node, heads, rels, [0])
        heads[root], rels[root] = 0, "root"
        n = len(words)
        dep = DependencyTree([heads[i] for i in range(1, n + 1)], [rels[i] for i in range(1, n + 1)])
        out.append((tree, dep))
    return out


def write(path: Path, stem: str, items):
    (path / f"{stem}.trees").write_text("".join(write_bracketed(t) + "\n" for t, _ in items), encoding="utf-8")
    (path / f"{stem}.conll").write_text(
        "".join(write_conll(t.sentence(), d) + "\n" for t, d in items), encoding="utf-8")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="src/jointparse/data")
    ap.add_argument("--seed", type=int, default=2019)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    write(out, "toy32", generate(rng, 32, 12, 2))
    mini = generate(rng, 500, 20, 4)
    write(out, "mini_train", mini[:400])
    write(out, "mini_dev", mini[400:])


if __name__ == "__main__":
    main()
