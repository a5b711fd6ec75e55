"""Well-labeled plane trees: sampling, enumeration, contour processes, maxima.

A tree with ``n`` edges is stored as its Dyck word (the balanced parenthesis
word of the contour, 1 = step down an edge to a new child, 0 = step back up)
plus one integer label per vertex in contour-first-visit order.  The root
label is 0 and labels change by at most 1 along every tree edge.  No root
edge is ever represented; the root corner is the start of the contour.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import BoundExceeded, FormatError

ENUMERATION_BOUND = 6


def _validate_dyck(dyck: np.ndarray, n: int) -> None:
    if dyck.shape != (2 * n,):
        raise ValueError(f"Dyck word must have length {2 * n}")
    if not np.isin(dyck, (0, 1)).all():
        raise ValueError("Dyck word entries must be 0 or 1")
    heights = np.cumsum(np.where(dyck == 1, 1, -1))
    if heights.min(initial=0) < 0 or (n > 0 and heights[-1] != 0):
        raise ValueError("word dips below zero or does not return to zero")


class WellLabeledTree:
    """Rooted plane tree with integer labels, root label 0, steps in {-1,0,+1}."""

    __slots__ = ("n_edges", "dyck", "labels", "_parents", "_contour_vertices", "_first_visit")

    def __init__(self, n_edges: int, dyck, labels, validate: bool = True):
        self.n_edges = int(n_edges)
        self.dyck = np.array(dyck, dtype=np.int8)
        self.labels = np.array(labels, dtype=np.int64)
        self._parents = None
        self._contour_vertices = None
        self._first_visit = None
        if validate:
            self._validate()
        self.dyck.setflags(write=False)
        self.labels.setflags(write=False)

    def _validate(self) -> None:
        n = self.n_edges
        if n < 1:
            raise ValueError("a tree needs at least one edge")
        _validate_dyck(self.dyck, n)
        if self.labels.shape != (n + 1,):
            raise ValueError(f"need {n + 1} vertex labels")
        if self.labels[0] != 0:
            raise ValueError("root label must be 0")
        diffs = self.labels[1:] - self.labels[self.parents[1:]]
        if np.abs(diffs).max(initial=0) > 1:
            raise ValueError("labels must change by at most 1 along tree edges")

    def _walk(self) -> None:
        """One contour pass filling parents, contour vertices and first visits."""
        n = self.n_edges
        parents = np.full(n + 1, -1, dtype=np.int64)
        contour = np.empty(2 * n + 1, dtype=np.int64)
        first = np.zeros(n + 1, dtype=np.int64)
        contour[0] = 0
        stack = [0]
        nxt = 1
        for i, step in enumerate(self.dyck):
            if step == 1:
                parents[nxt] = stack[-1]
                first[nxt] = i + 1
                stack.append(nxt)
                nxt += 1
            else:
                stack.pop()
            contour[i + 1] = stack[-1]
        self._parents = parents
        self._contour_vertices = contour
        self._first_visit = first

    @property
    def n_vertices(self) -> int:
        return self.n_edges + 1

    @property
    def parents(self) -> np.ndarray:
        if self._parents is None:
            self._walk()
        return self._parents

    @property
    def contour_vertices(self) -> np.ndarray:
        """Vertex incident to the i-th contour corner, i = 0 .. 2n."""
        if self._contour_vertices is None:
            self._walk()
        return self._contour_vertices

    @property
    def first_visit(self) -> np.ndarray:
        """Contour time of the first visit of each vertex."""
        if self._first_visit is None:
            self._walk()
        return self._first_visit

    def edge_increments(self) -> np.ndarray:
        """Label increment of each edge in vertex-creation order."""
        return self.labels[1:] - self.labels[self.parents[1:]]

    def key(self) -> tuple:
        return (self.n_edges, self.dyck.tobytes(), self.labels.tobytes())

    def __eq__(self, other) -> bool:
        return isinstance(other, WellLabeledTree) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        word = "".join(str(int(b)) for b in self.dyck)
        return f"WellLabeledTree(n={self.n_edges}, dyck={word}, labels={self.labels.tolist()})"


@dataclass(frozen=True)
class ContourLabelProcess:
    """Contour height C and label L along the contour, length 2n + 1 each."""

    C: np.ndarray
    L: np.ndarray
    corner_vertices: np.ndarray

    def __post_init__(self):
        C, L = self.C, self.L
        if C.shape != L.shape or C.ndim != 1 or C.size % 2 == 0:
            raise ValueError("C and L must share odd length 2n + 1")
        if C[0] != 0 or C[-1] != 0 or C.min() < 0:
            raise ValueError("contour must start and end at 0 and stay nonnegative")
        if C.size > 1 and not np.all(np.abs(np.diff(C)) == 1):
            raise ValueError("contour must move by exactly 1")
        if L[0] != 0 or L[-1] != 0 or np.abs(np.diff(L)).max(initial=0) > 1:
            raise ValueError("labels must start and end at 0 and move by at most 1")


def contour_label_process(tree: WellLabeledTree) -> ContourLabelProcess:
    """Height and label of the i-th contour corner, plus the corner vertices."""
    steps = np.where(tree.dyck == 1, 1, -1)
    C = np.concatenate([[0], np.cumsum(steps)])
    L = tree.labels[tree.contour_vertices]
    return ContourLabelProcess(C=C, L=L, corner_vertices=tree.contour_vertices)


def tree_from_processes(C: np.ndarray, L: np.ndarray) -> WellLabeledTree:
    """Rebuild the tree from its contour and label processes (roundtrip inverse)."""
    n = (len(C) - 1) // 2
    dyck = (np.diff(C) == 1).astype(np.int8)
    labels = np.zeros(n + 1, dtype=np.int64)
    stack = [0]
    nxt = 1
    for i, step in enumerate(dyck):
        if step == 1:
            labels[nxt] = L[i + 1]
            stack.append(nxt)
            nxt += 1
        else:
            stack.pop()
    return WellLabeledTree(n, dyck, labels)


# -- sampling ----------------------------------------------------------------


def _resolve_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_dyck_words(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Exactly uniform Dyck words via the cycle lemma, vectorized over rows.

    Shuffle n up-steps and n+1 down-steps; every cyclic class of such words
    has size 2n+1 and contains exactly one rotation that stays nonnegative
    until its final step, so rotating there and dropping that step is uniform
    over the Catalan(n) words.  O(n log n) per row, no rejection.
    """
    m = 2 * n + 1
    base = np.full(m, -1, dtype=np.int8)
    base[:n] = 1
    order = np.argsort(rng.random((size, m)), axis=1)
    steps = np.take(base, order)
    prefix = np.cumsum(steps, axis=1)
    cut = np.argmin(prefix, axis=1) + 1  # first minimum; rotation starts just after
    idx = (cut[:, None] + np.arange(m)[None, :]) % m
    rotated = np.take_along_axis(steps, idx, axis=1)
    return (rotated[:, : 2 * n] == 1).astype(np.int8)


def sample_shape_and_increments(
    n: int, size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform (Dyck word, edge label increments) pairs; increments iid on {-1,0,1}."""
    dycks = sample_dyck_words(n, size, rng)
    incs = rng.integers(-1, 2, size=(size, n), dtype=np.int64)
    return dycks, incs


def tree_from_shape(dyck: np.ndarray, increments: np.ndarray, validate: bool = False) -> WellLabeledTree:
    """Assemble a tree from a Dyck word and per-edge increments (creation order)."""
    n = len(increments)
    labels = np.zeros(n + 1, dtype=np.int64)
    stack = [0]
    nxt = 1
    for step in dyck:
        if step == 1:
            labels[nxt] = labels[stack[-1]] + increments[nxt - 1]
            stack.append(nxt)
            nxt += 1
        else:
            stack.pop()
    return WellLabeledTree(n, dyck, labels, validate=validate)


def sample_uniform_tree(n: int, seed) -> WellLabeledTree:
    """Exactly uniform element of the 3^n * Catalan(n) well-labeled trees."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = _resolve_rng(seed)
    dycks, incs = sample_shape_and_increments(n, 1, rng)
    return tree_from_shape(dycks[0], incs[0])


# -- enumeration ---------------------------------------------------------------


def _dyck_words(n: int) -> list[tuple[int, ...]]:
    if n == 0:
        return [()]
    out = []

    def rec(word: list[int], opens: int, height: int):
        if len(word) == 2 * n:
            out.append(tuple(word))
            return
        if opens < n:
            word.append(1)
            rec(word, opens + 1, height + 1)
            word.pop()
        if height > 0:
            word.append(0)
            rec(word, opens, height - 1)
            word.pop()

    rec([], 0, 0)
    return out


def enumerate_trees(n: int, bound: int = ENUMERATION_BOUND):
    """Yield every well-labeled tree with n edges exactly once (3^n * Catalan(n) items)."""
    if n > bound:
        raise BoundExceeded(f"enumeration requested for n={n} beyond bound {bound}")
    if n < 1:
        raise ValueError("n must be at least 1")
    words = _dyck_words(n)
    for word in words:
        dyck = np.array(word, dtype=np.int8)
        for incs in product((-1, 0, 1), repeat=n):
            yield tree_from_shape(dyck, np.array(incs, dtype=np.int64))


def catalan(n: int) -> int:
    from math import comb

    return comb(2 * n, n) // (n + 1)


def count_well_labeled_trees(n: int) -> int:
    return 3**n * catalan(n)


# -- label maxima and the N_j process -----------------------------------------


def local_maxima_mask(tree: WellLabeledTree) -> np.ndarray:
    """Boolean mask of vertices whose label weakly dominates every neighbor."""
    labels = tree.labels
    best = np.full(tree.n_vertices, np.iinfo(np.int64).min, dtype=np.int64)
    parents = tree.parents[1:]
    children = np.arange(1, tree.n_vertices)
    np.maximum.at(best, parents, labels[children])
    np.maximum.at(best, children, labels[parents])
    return labels >= best


def broad_local_maxima(tree: WellLabeledTree) -> set[int]:
    """Vertices that are local maxima of the labels in the broad sense (ties count)."""
    return set(np.flatnonzero(local_maxima_mask(tree)).tolist())


def nj_process(tree: WellLabeledTree) -> np.ndarray:
    """N(j) = number of distinct non-maximum vertices among the first j contour corners."""
    n = tree.n_edges
    mask = local_maxima_mask(tree)
    contour = tree.contour_vertices
    first = tree.first_visit
    counted = (first[contour[: 2 * n]] == np.arange(2 * n)) & ~mask[contour[: 2 * n]]
    N = np.zeros(2 * n + 1, dtype=np.int64)
    np.cumsum(counted, out=N[1:])
    return N


# -- textual tree format -------------------------------------------------------
#
# line 1: "n"
# line 2: Dyck word as a 0/1 string of length 2n
# line 3: vertex labels in contour-first-visit order, space separated


def write_tree_text(tree: WellLabeledTree) -> str:
    word = "".join(str(int(b)) for b in tree.dyck)
    labels = " ".join(str(int(x)) for x in tree.labels)
    return f"{tree.n_edges}\n{word}\n{labels}\n"


def read_tree_text(text: str) -> WellLabeledTree:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 3:
        raise FormatError(f"tree file must have 3 lines, got {len(lines)}")
    try:
        n = int(lines[0])
        dyck = np.array([int(c) for c in lines[1].strip()], dtype=np.int8)
        labels = np.array([int(tok) for tok in lines[2].split()], dtype=np.int64)
        return WellLabeledTree(n, dyck, labels)
    except (ValueError, FormatError) as exc:
        raise FormatError(f"bad tree file: {exc}") from None
