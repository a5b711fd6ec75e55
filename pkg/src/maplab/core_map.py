"""Rooted combinatorial maps on the sphere, encoded as rotation systems.

A map with ``n`` edges lives on ``2n`` darts (oriented edge sides).  Two
permutations describe the embedding:

* ``alpha`` -- the fixed-point-free involution that reverses a dart; edge ``k``
  owns darts ``2k`` and ``2k + 1`` so that reversal is a bit flip,
* ``sigma`` -- the next dart around the origin vertex of a dart.

Vertices are the orbits of ``sigma``, faces the orbits of the face permutation
``phi = sigma o alpha``; the face containing dart ``d`` in its ``phi``-orbit is
the face lying to the left of ``d``.  Genus 0 is certified through the Euler
formula at construction time.  Vertex ids are orbit ids assigned in order of
first dart occurrence, which keeps every derived quantity reproducible.
"""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    Disconnected,
    FormatError,
    InvalidInvolution,
    NonPlanar,
    UnknownVertex,
)

Dart = int


def _as_perm(values, n_darts: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.int64)  # always copy; instances freeze their arrays
    if arr.shape != (n_darts,):
        raise ValueError(f"{name} must have length {n_darts}, got shape {arr.shape}")
    if arr.min(initial=0) < 0 or arr.max(initial=-1) >= n_darts:
        raise ValueError(f"{name} values must lie in [0, {n_darts})")
    if np.bincount(arr, minlength=n_darts).max(initial=0) > 1:
        raise ValueError(f"{name} is not a permutation")
    return arr


def _orbit_min(perm: np.ndarray) -> np.ndarray:
    """Minimum dart of each permutation orbit, per dart (doubling trick)."""
    om = np.arange(perm.size, dtype=np.int64)
    p = perm
    steps = max(1, int(np.ceil(np.log2(max(perm.size, 2)))))
    for _ in range(steps):
        om = np.minimum(om, om[p])
        p = p[p]
    # one more sweep guards the non-power-of-two tail
    om = np.minimum(om, om[perm])
    return om


def _ids_from_orbit_min(orbit_min: np.ndarray) -> tuple[np.ndarray, int]:
    reps = np.unique(orbit_min)
    ids = np.searchsorted(reps, orbit_min)
    return ids.astype(np.int64), len(reps)


class PlaneMap:
    """Immutable rooted map on the sphere.

    Use :func:`build_map` for fully validated construction from raw
    permutations.  The constructor itself validates by default; internal
    samplers that construct maps by design may pass ``validate=False``.
    """

    __slots__ = (
        "n_edges",
        "sigma",
        "alpha",
        "root",
        "_vertex_of",
        "_n_vertices",
        "_n_faces",
        "_face_min",
        "_rank_in_vertex",
        "_vertex_darts",
    )

    def __init__(self, n_edges: int, sigma, alpha, root: Dart, validate: bool = True):
        n_darts = 2 * int(n_edges)
        if n_darts <= 0:
            raise ValueError("a map needs at least one edge")
        self.n_edges = int(n_edges)
        self.sigma = _as_perm(sigma, n_darts, "sigma")
        self.alpha = _as_perm(alpha, n_darts, "alpha")
        if not 0 <= int(root) < n_darts:
            raise ValueError(f"root dart {root} out of range")
        self.root = int(root)
        self._vertex_of = None
        self._n_vertices = None
        self._n_faces = None
        self._face_min = None
        self._rank_in_vertex = None
        self._vertex_darts = None
        if validate:
            self._validate()
        self.sigma.setflags(write=False)
        self.alpha.setflags(write=False)

    # -- validation -------------------------------------------------------

    def _validate(self) -> None:
        a = self.alpha
        ident = np.arange(a.size)
        if np.any(a == ident) or np.any(a[a] != ident):
            raise InvalidInvolution("alpha must be a fixed-point-free involution")
        # transitivity of <sigma, alpha> on darts
        rows = np.concatenate([ident, ident])
        cols = np.concatenate([self.sigma, a])
        graph = csr_matrix(
            (np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(a.size, a.size)
        )
        n_comp, _ = connected_components(graph, directed=False)
        if n_comp != 1:
            raise Disconnected(f"dart graph has {n_comp} components")
        euler = self.n_vertices - self.n_edges + self.n_faces
        if euler != 2:
            raise NonPlanar(f"Euler characteristic {euler} != 2")

    # -- derived structure --------------------------------------------------

    @property
    def n_darts(self) -> int:
        return 2 * self.n_edges

    @property
    def vertex_of(self) -> np.ndarray:
        """Vertex id of each dart's origin."""
        if self._vertex_of is None:
            ids, count = _ids_from_orbit_min(_orbit_min(self.sigma))
            self._vertex_of = ids
            self._vertex_of.setflags(write=False)
            self._n_vertices = count
        return self._vertex_of

    @property
    def n_vertices(self) -> int:
        if self._n_vertices is None:
            _ = self.vertex_of
        return self._n_vertices

    @property
    def face_permutation(self) -> np.ndarray:
        """phi = sigma o alpha; the orbit of dart d is the face left of d."""
        return self.sigma[self.alpha]

    @property
    def _face_orbit_min(self) -> np.ndarray:
        if self._face_min is None:
            self._face_min = _orbit_min(self.face_permutation)
            self._face_min.setflags(write=False)
            self._n_faces = len(np.unique(self._face_min))
        return self._face_min

    @property
    def n_faces(self) -> int:
        if self._n_faces is None:
            _ = self._face_orbit_min
        return self._n_faces

    def vertex_darts(self, v: int) -> list[int]:
        """Darts with origin ``v`` in rotation (sigma-cycle) order."""
        self._ensure_vertex_cycles()
        return self._vertex_darts[v]

    def _ensure_vertex_cycles(self) -> None:
        if self._vertex_darts is not None:
            return
        vof = self.vertex_of
        first = {}
        for d in range(self.n_darts):
            first.setdefault(int(vof[d]), d)
        cycles = []
        rank = np.empty(self.n_darts, dtype=np.int64)
        for v in range(self.n_vertices):
            start = first[v]
            cyc = [start]
            rank[start] = 0
            d = int(self.sigma[start])
            while d != start:
                rank[d] = len(cyc)
                cyc.append(d)
                d = int(self.sigma[d])
            cycles.append(cyc)
        self._vertex_darts = cycles
        self._rank_in_vertex = rank

    @property
    def rank_in_vertex(self) -> np.ndarray:
        """Position of each dart inside its vertex rotation (cyclic, arbitrary cut)."""
        if self._rank_in_vertex is None:
            self._ensure_vertex_cycles()
        return self._rank_in_vertex

    def degrees(self) -> np.ndarray:
        """Vertex degrees (loops count twice)."""
        return np.bincount(self.vertex_of, minlength=self.n_vertices)

    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (tail_vertex, head_vertex) indexed by dart."""
        vof = self.vertex_of
        return vof, vof[self.alpha]

    def adjacency_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) adjacency over vertices, one entry per dart."""
        tails, heads = self.edge_endpoints()
        order = np.argsort(tails, kind="stable")
        indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.cumsum(np.bincount(tails, minlength=self.n_vertices), out=indptr[1:])
        return indptr, heads[order]


def build_map(n_edges: int, alpha, sigma, root: Dart) -> PlaneMap:
    """Validated construction; raises the error naming the violated invariant."""
    return PlaneMap(n_edges, sigma, alpha, root, validate=True)


def faces(m: PlaneMap) -> list[list[int]]:
    """Partition of darts into face cycles, each starting at its minimum dart.

    The cycle containing dart ``d`` is the boundary of the face to the left
    of ``d``; cycles are listed by ascending minimum dart.
    """
    phi = m.face_permutation
    fmin = m._face_orbit_min
    reps = np.unique(fmin)
    out = []
    for r in reps:
        cyc = [int(r)]
        d = int(phi[r])
        while d != r:
            cyc.append(d)
            d = int(phi[d])
        out.append(cyc)
    return out


def max_face_degree(m: PlaneMap) -> int:
    """Largest face degree (boundary length counted with multiplicity)."""
    fmin = m._face_orbit_min
    return int(np.bincount(fmin, minlength=m.n_darts).max())


def face_degrees(m: PlaneMap) -> np.ndarray:
    """Degrees of the faces, ordered by ascending minimum dart."""
    fmin = m._face_orbit_min
    counts = np.bincount(fmin, minlength=m.n_darts)
    return counts[np.unique(fmin)]


def bfs_distances(m: PlaneMap, source: int) -> np.ndarray:
    """Exact graph distances from ``source`` to every vertex."""
    if not 0 <= int(source) < m.n_vertices:
        raise UnknownVertex(f"vertex {source} not in map with {m.n_vertices} vertices")
    indptr, indices = m.adjacency_csr()
    return _bfs_csr(indptr, indices, int(source), m.n_vertices)


def _bfs_csr(indptr: np.ndarray, indices: np.ndarray, source: int, n: int) -> np.ndarray:
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    d = 0
    while frontier.size:
        counts = indptr[frontier + 1] - indptr[frontier]
        total = int(counts.sum())
        if total == 0:
            break
        offsets = np.repeat(indptr[frontier], counts)
        within = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        nxt = indices[offsets + within]
        nxt = nxt[dist[nxt] < 0]
        if nxt.size == 0:
            break
        frontier = np.unique(nxt)
        d += 1
        dist[frontier] = d
    return dist


def dual(m: PlaneMap) -> PlaneMap:
    """The dual map: faces and vertices exchange, edges are preserved.

    With the convention sigma* = phi this is an involution on the nose:
    dual(dual(m)) has exactly the original permutations and root.
    """
    return PlaneMap(m.n_edges, m.face_permutation, m.alpha, m.root, validate=False)


def max_vertex_degree(m: PlaneMap) -> int:
    return int(m.degrees().max())


def canonical_form(m: PlaneMap) -> bytes:
    """Canonical byte string of the rooted map.

    Darts are relabeled by a deterministic traversal from the root (expanding
    sigma then alpha); rooted maps have no nontrivial automorphisms, so two
    maps are rooted-isomorphic iff their canonical forms coincide.
    """
    label = canonical_labels(m)
    n = m.n_darts
    inv = np.empty(n, dtype=np.int64)
    inv[label] = np.arange(n)
    sig = label[m.sigma[inv]]
    alp = label[m.alpha[inv]]
    return sig.astype(np.int32).tobytes() + alp.astype(np.int32).tobytes()


def canonical_labels(m: PlaneMap) -> np.ndarray:
    """Canonical dart label for each dart (root gets 0)."""
    n = m.n_darts
    label = np.full(n, -1, dtype=np.int64)
    label[m.root] = 0
    count = 1
    queue = deque([m.root])
    while queue:
        d = queue.popleft()
        for nxt in (int(m.sigma[d]), int(m.alpha[d])):
            if label[nxt] < 0:
                label[nxt] = count
                count += 1
                queue.append(nxt)
    if count != n:
        raise Disconnected("canonical traversal did not reach every dart")
    return label


def pointed_canonical_form(m: PlaneMap, v_star: int) -> bytes:
    """Canonical form of a rooted map together with a distinguished vertex."""
    label = canonical_labels(m)
    at_v = np.flatnonzero(m.vertex_of == v_star)
    tag = int(label[at_v].min())
    return canonical_form(m) + tag.to_bytes(4, "little")


def maps_isomorphic(a: PlaneMap, b: PlaneMap) -> bool:
    """Rooted isomorphism: a dart relabeling fixing the root and conjugating both permutations."""
    if a.n_edges != b.n_edges:
        return False
    return canonical_form(a) == canonical_form(b)


class PointedPlaneMap:
    """A rooted map with a distinguished vertex and its distance labels.

    ``l_plus[v]`` is the graph distance from ``v`` to ``v_star``; it is
    recomputed by BFS unless a trusted array is supplied by a construction
    that guarantees it (the certification suite re-checks those).
    """

    __slots__ = ("map", "v_star", "l_plus")

    def __init__(self, m: PlaneMap, v_star: int, l_plus=None, validate: bool = True):
        if not 0 <= int(v_star) < m.n_vertices:
            raise UnknownVertex(f"vertex {v_star} not in map")
        self.map = m
        self.v_star = int(v_star)
        if l_plus is None:
            l_plus = bfs_distances(m, self.v_star)
        self.l_plus = np.asarray(l_plus, dtype=np.int64)
        if validate:
            self._validate()
        self.l_plus.setflags(write=False)

    def _validate(self) -> None:
        lp = self.l_plus
        if lp.shape != (self.map.n_vertices,):
            raise ValueError("l_plus has wrong length")
        if lp[self.v_star] != 0 or np.count_nonzero(lp == 0) != 1:
            raise ValueError("l_plus must vanish exactly at v_star")
        tails, heads = self.map.edge_endpoints()
        if np.abs(lp[tails] - lp[heads]).max(initial=0) > 1:
            raise ValueError("l_plus must change by at most 1 across an edge")

    def recompute_distances(self) -> np.ndarray:
        """Independent BFS from v_star, for cross-checking l_plus."""
        return bfs_distances(self.map, self.v_star)

    def points_towards(self, dart: int) -> bool:
        """True when the dart's head is one step closer to v_star than its tail."""
        vof = self.map.vertex_of
        head = vof[self.map.alpha[dart]]
        tail = vof[dart]
        return bool(self.l_plus[head] == self.l_plus[tail] - 1)


# -- textual map format ------------------------------------------------------
#
# line 1: "n_edges root"
# line 2: sigma as a space-separated image list over 2*n_edges darts
# line 3: alpha likewise
# line 4 (optional): "point v_star"


def write_map_text(m: PlaneMap, v_star: int | None = None) -> str:
    lines = [
        f"{m.n_edges} {m.root}",
        " ".join(str(int(x)) for x in m.sigma),
        " ".join(str(int(x)) for x in m.alpha),
    ]
    if v_star is not None:
        lines.append(f"point {int(v_star)}")
    return "\n".join(lines) + "\n"


def read_map_text(text: str) -> tuple[PlaneMap, int | None]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) not in (3, 4):
        raise FormatError(f"map file must have 3 or 4 lines, got {len(lines)}")
    try:
        n_edges, root = (int(tok) for tok in lines[0].split())
        sigma = [int(tok) for tok in lines[1].split()]
        alpha = [int(tok) for tok in lines[2].split()]
    except ValueError as exc:
        raise FormatError(f"bad map header or permutation line: {exc}") from None
    v_star = None
    if len(lines) == 4:
        parts = lines[3].split()
        if len(parts) != 2 or parts[0] != "point":
            raise FormatError("line 4 must be 'point v_star'")
        v_star = int(parts[1])
    m = build_map(n_edges, alpha, sigma, root)
    if v_star is not None and not 0 <= v_star < m.n_vertices:
        raise FormatError(f"pointed vertex {v_star} out of range")
    return m, v_star
