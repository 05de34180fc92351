"""Syntactic tree types, span decomposition and brute-force enumerators."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

EMPTY = ""  # the implicit-binarization label; id 0 in every label inventory
UNARY_JOIN = "+"


@dataclass
class Sentence:
    words: list[str]
    tags: list[str]

    def __post_init__(self):
        if len(self.words) != len(self.tags):
            raise ValueError("words and tags differ in length")

    def __len__(self) -> int:
        return len(self.words)

    @property
    def chars(self) -> list[list[str]]:
        return [list(w) or [" "] for w in self.words]


@dataclass
class Leaf:
    tag: str
    word: str
    index: int

    @property
    def span(self) -> tuple[int, int]:
        return self.index, self.index + 1


@dataclass
class Tree:
    label: str
    children: list[Union["Tree", Leaf]] = field(default_factory=list)

    @property
    def span(self) -> tuple[int, int]:
        return self.children[0].span[0], self.children[-1].span[1]

    def leaves(self) -> list[Leaf]:
        out: list[Leaf] = []
        stack: list[Tree | Leaf] = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                out.append(node)
            else:
                stack.extend(reversed(node.children))
        return out

    def sentence(self) -> Sentence:
        leaves = self.leaves()
        return Sentence([l.word for l in leaves], [l.tag for l in leaves])

    def internal_nodes(self) -> Iterator["Tree"]:
        stack: list[Tree | Leaf] = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Tree):
                yield node
                stack.extend(reversed(node.children))


ConstituentTree = Tree


def validate_tree(tree: Tree) -> None:
    """Check that leaves are numbered 0..n-1 left to right and nodes are nonempty."""
    for node in tree.internal_nodes():
        if not node.children:
            raise ValueError(f"empty constituent {node.label!r}")
    idx = [leaf.index for leaf in tree.leaves()]
    if idx != list(range(len(idx))):
        raise ValueError(f"leaf indices {idx} are not 0..n-1 in order")


def to_labeled_spans(tree: Tree) -> set[tuple[int, int, str]]:
    """One span per internal node; unary chains collapse into a "+"-joined label."""
    spans: set[tuple[int, int, str]] = set()

    def visit(node: Tree) -> None:
        labels = [node.label]
        while len(node.children) == 1 and isinstance(node.children[0], Tree):
            node = node.children[0]
            labels.append(node.label)
        i, j = node.span
        spans.add((i, j, UNARY_JOIN.join(labels)))
        for child in node.children:
            if isinstance(child, Tree):
                visit(child)

    visit(tree)
    return spans


def span_label_map(tree: Tree) -> dict[tuple[int, int], str]:
    return {(i, j): label for i, j, label in to_labeled_spans(tree)}


def binarize_spans(tree: Tree) -> list[tuple[int, int, str]]:
    """Spans of a binary tree in the decoder's space that yields ``tree``.

    Every n-ary node is right-factored with EMPTY-labelled intermediate
    spans, and every single-token position gets a span (EMPTY unless a
    constituent covers exactly that token).
    """
    labels = span_label_map(tree)
    n = len(tree.leaves())
    if (0, n) not in labels:
        raise ValueError("tree has no constituent over the whole sentence")
    out: list[tuple[int, int, str]] = []

    def children_spans(i: int, j: int) -> list[tuple[int, int]]:
        # maximal labelled sub-spans strictly inside (i, j), padded with single tokens
        inner = sorted(((a, b) for (a, b) in labels if i <= a and b <= j and (a, b) != (i, j)),
                       key=lambda s: (s[0], -s[1]))
        parts: list[tuple[int, int]] = []
        pos = i
        for a, b in inner:
            if a < pos:
                continue
            while pos < a:
                parts.append((pos, pos + 1))
                pos += 1
            parts.append((a, b))
            pos = b
        while pos < j:
            parts.append((pos, pos + 1))
            pos += 1
        return parts

    def emit(i: int, j: int, label: str) -> None:
        out.append((i, j, label))
        if j - i == 1:
            return
        parts = children_spans(i, j)
        first = parts[0]
        emit(first[0], first[1], labels.get(first, EMPTY))
        rest = parts[1:]
        if len(rest) == 1:
            a, b = rest[0]
            emit(a, b, labels.get((a, b), EMPTY))
        else:
            emit(rest[0][0], rest[-1][1], EMPTY)

    # EMPTY intermediate spans reuse emit; their children come from children_spans too
    emit(0, n, labels[(0, n)])
    return out


def spans_to_tree(spans: Sequence[tuple[int, int, str]], sentence: Sentence) -> Tree:
    """Build a tree from nested spans: drop EMPTY spans and expand "+" chains."""
    n = len(sentence)
    labelled = sorted({(i, j, l) for i, j, l in spans if l != EMPTY}, key=lambda s: (s[0], -s[1]))
    if not labelled or (labelled[0][0], labelled[0][1]) != (0, n):
        raise ValueError("root span must carry a non-empty label")

    def chain(label: str, children: list) -> Tree:
        parts = label.split(UNARY_JOIN)
        node = Tree(parts[-1], children)
        for part in reversed(parts[:-1]):
            node = Tree(part, [node])
        return node

    pos = 0

    def build(k: int) -> tuple[Tree, int]:
        nonlocal pos
        i, j, label = labelled[k]
        children: list[Tree | Leaf] = []
        k += 1
        while pos < j:
            if k < len(labelled) and labelled[k][0] == pos and labelled[k][1] <= j:
                child, k = build(k)
                children.append(child)
            else:
                children.append(Leaf(sentence.tags[pos], sentence.words[pos], pos))
                pos += 1
        return chain(label, children), k

    root, _ = build(0)
    return root


# dependency trees --------------------------------------------------------

@dataclass
class DependencyTree:
    heads: list[int]  # per token, 0 = ROOT, tokens numbered from 1
    labels: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.heads)

    def is_tree(self) -> bool:
        n = len(self.heads)
        if any(h < 0 or h > n for h in self.heads):
            return False
        if sum(1 for h in self.heads if h == 0) != 1:
            return False
        for d in range(1, n + 1):
            seen = set()
            h = d
            while h != 0:
                if h in seen:
                    return False
                seen.add(h)
                h = self.heads[h - 1]
        return True


def arcs_cross(a: tuple[int, int], b: tuple[int, int]) -> bool:
    l1, r1 = sorted(a)
    l2, r2 = sorted(b)
    return l1 < l2 < r1 < r2 or l2 < l1 < r2 < r1


def validate_projective(tree: DependencyTree) -> bool:
    """True iff no two arcs cross when drawn above the sentence, ROOT at 0."""
    arcs = [(h, d) for d, h in enumerate(tree.heads, start=1)]
    return not any(arcs_cross(a, b) for a, b in itertools.combinations(arcs, 2))


# brute-force enumerators (test oracles) -----------------------------------

MAX_ENUM_CONSTITUENT = 8
MAX_ENUM_DEPENDENCY = 7


def enumerate_bracketings(n: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every binary bracketing of n tokens, as preorder span tuples."""
    if n < 1 or n > MAX_ENUM_CONSTITUENT:
        raise ValueError(f"enumeration supports 1 <= n <= {MAX_ENUM_CONSTITUENT}, got {n}")

    def rec(i: int, j: int) -> Iterator[tuple[tuple[int, int], ...]]:
        if j - i == 1:
            yield ((i, j),)
            return
        for k in range(i + 1, j):
            for left in rec(i, k):
                for right in rec(k, j):
                    yield ((i, j),) + left + right

    yield from rec(0, n)


def enumerate_constituent_trees(n: int, labels: Sequence[str]) -> Iterator[tuple[tuple[int, int, str], ...]]:
    """Every labelled binary tree over n tokens in the decoder's tree space.

    Trees are preorder span tuples. Each span takes any label from
    ``labels`` (EMPTY included if present); the root label is never EMPTY.
    """
    root_labels = [l for l in labels if l != EMPTY]
    for structure in enumerate_bracketings(n):
        choices = [root_labels] + [list(labels)] * (len(structure) - 1)
        for assignment in itertools.product(*choices):
            yield tuple((i, j, l) for (i, j), l in zip(structure, assignment))


def enumerate_projective_trees(n: int) -> Iterator[DependencyTree]:
    """Every projective single-root dependency tree over n tokens (unlabelled)."""
    if n < 1 or n > MAX_ENUM_DEPENDENCY:
        raise ValueError(f"enumeration supports 1 <= n <= {MAX_ENUM_DEPENDENCY}, got {n}")
    for heads in itertools.product(range(n + 1), repeat=n):
        if any(h == d for d, h in enumerate(heads, start=1)):
            continue
        tree = DependencyTree(list(heads))
        if tree.is_tree() and validate_projective(tree):
            yield tree
