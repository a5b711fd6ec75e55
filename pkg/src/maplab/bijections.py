"""The trivial, Cori-Vauquelin-Schaeffer and Ambjorn-Budd bijections.

All three couple rooted quadrangulations with other combinatorial families:

* trivial:  rooted maps with n edges  <->  rooted quadrangulations with n faces,
* CVS:      well-labeled trees x {0,1}  <->  pointed rooted quadrangulations,
* AB:       pointed rooted maps x {0,1}  <->  pointed rooted quadrangulations.

The epsilon bit is 0 exactly when the quadrangulation root points towards the
distinguished vertex, and it is the same bit on both the CVS and AB sides.
Inside a quadrangulation every edge joins consecutive distance labels; the
canonical orientation of an edge is the dart whose head is closer to the
distinguished vertex.  Arc i of a CVS-built quadrangulation owns darts 2i and
2i + 1, giving O(1) access from contour indices to darts.

Rooting conventions (frozen here, certified exhaustively by the ledgers in
:mod:`maplab.verify`): the CVS inverse roots the quadrangulation at arc 0,
oriented away from the root corner when epsilon is 0 and reversed otherwise;
the AB image is rooted at the green arc of the face left of the
towards-oriented root dart, with origin at that dart's head.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _fast
from .core_map import PlaneMap, PointedPlaneMap, bfs_distances
from .errors import (
    IndexOutOfRange,
    FormatError,
    NotAQuadrangulation,
    NotPointingTowards,
)
from .trees import WellLabeledTree, contour_label_process

INFINITY = math.inf


# -- images ----------------------------------------------------------------------


@dataclass
class CvsImage:
    """A labeled tree, its epsilon bit, and the coupled pointed quadrangulation.

    ``vertex_correspondence[v]`` is the quadrangulation vertex carrying tree
    vertex ``v``; the correspondence is a bijection onto the quadrangulation
    vertices minus the distinguished one.
    """

    tree: WellLabeledTree
    eps: int
    quad: PointedPlaneMap
    vertex_correspondence: np.ndarray

    @property
    def v_star(self) -> int:
        return self.quad.v_star


@dataclass
class AbImage:
    """The pointed map image of a pointed quadrangulation under the AB rules.

    ``vertex_correspondence[v]`` maps map vertices onto quadrangulation
    vertices (everything but the local maxima of the distance labels);
    ``edge_correspondence[f]`` is the map edge drawn inside quadrangulation
    face ``f`` (faces ordered by minimum dart).  ``special_dart_of_face[f]``
    is the unique special boundary dart of a simple face, -1 for confluent
    faces; map edge ``k`` owns darts ``2k`` (at the minimum-label end) and
    ``2k + 1``.
    """

    pointed_map: PointedPlaneMap
    eps: int
    vertex_correspondence: np.ndarray
    edge_correspondence: np.ndarray
    face_of_dart: np.ndarray
    special_dart_of_face: np.ndarray
    green_end_vertices: np.ndarray  # (F, 2) quadrangulation vertex ids

    @property
    def v_star(self) -> int:
        return self.pointed_map.v_star


@dataclass
class GeodesicChain:
    """A chain of darts each pointing towards the distinguished vertex."""

    darts: list[int]

    def __len__(self) -> int:
        return len(self.darts)


# -- successors -------------------------------------------------------------------


def successor(L, i: int) -> float | int:
    """Smallest j > i in the 2n-periodic extension with L(j) = L(i) - 1.

    ``L`` is a contour label process of length 2n + 1 (or the 2n corner
    labels); returns INFINITY when L(i) is the global minimum.
    """
    L = np.asarray(L)
    period = L.size - 1 if L.size % 2 == 1 else L.size
    if not 0 <= i < period:
        raise IndexOutOfRange(f"contour index {i} outside [0, {period})")
    target = L[i] - 1
    for j in range(i + 1, i + period + 1):
        if L[j % period] == target:
            return j
    return INFINITY


# -- CVS inverse: tree -> pointed quadrangulation -----------------------------------


def _tree_arrays(tree: WellLabeledTree) -> _fast.TreeArrays:
    cp = contour_label_process(tree)
    return _fast.TreeArrays(
        n=tree.n_edges,
        dyck=tree.dyck,
        C=cp.C,
        L=cp.L,
        contour_vertex=tree.contour_vertices,
        labels=tree.labels,
        first_visit=tree.first_visit,
        parent=tree.parents,
    )


def cvs_inverse(tree: WellLabeledTree, eps: int, validate: bool = True) -> CvsImage:
    """Draw the successor arcs of the labeled tree; returns the coupled instance.

    Every corner is joined to its successor corner (or to the added
    distinguished vertex when its label is minimal); the arcs alone form a
    rooted quadrangulation with n faces, pointed at the added vertex, and
    every arc points towards it.
    """
    if eps not in (0, 1):
        raise ValueError("eps must be 0 or 1")
    ta = _tree_arrays(tree)
    qa = _fast.build_quad(ta, eps)
    qmap = PlaneMap(2 * tree.n_edges, qa.sigma, qa.alpha, qa.root, validate=validate)
    if validate and not np.array_equal(qmap.vertex_of, qa.vertex_of):
        raise AssertionError("vertex id conventions diverged between routes")
    qmap._vertex_of = qa.vertex_of
    qmap._n_vertices = qa.n_vertices
    qmap._rank_in_vertex = qa.rank
    pq = PointedPlaneMap(qmap, qa.v_star, l_plus=qa.l_plus, validate=validate)
    corr = qa.tv_to_qid[: tree.n_edges + 1].copy()
    return CvsImage(tree=tree, eps=eps, quad=pq, vertex_correspondence=corr)


# -- CVS forward: pointed quadrangulation -> tree -----------------------------------


def _epsilon_of(pq: PointedPlaneMap) -> int:
    return 0 if pq.points_towards(pq.map.root) else 1


def _face_data(pq: PointedPlaneMap) -> _fast.FaceData:
    q = pq.map
    try:
        return _fast.quad_faces(q.sigma, q.alpha, pq.l_plus, q.vertex_of)
    except ValueError as exc:
        raise NotAQuadrangulation(str(exc)) from None


def cvs_forward(pq: PointedPlaneMap) -> CvsImage:
    """Extract the labeled tree of red arcs from a pointed quadrangulation.

    The contour starts at the tree corner holding the towards-oriented root
    dart, so composing with :func:`cvs_inverse` is the identity on labeled
    trees and epsilon bits.
    """
    q = pq.map
    lp = pq.l_plus
    fd = _face_data(pq)
    ends_origin, ends_tag = _fast.red_arc_ends(fd, q.alpha)
    ends_vertex = q.vertex_of[ends_origin].reshape(-1)
    flat_tag = ends_tag.reshape(-1)

    eps = _epsilon_of(pq)
    d0 = q.root if eps == 0 else int(q.alpha[q.root])
    r_q = int(q.vertex_of[d0])

    red = _fast.assemble_from_ends(q.rank_in_vertex, ends_vertex, flat_tag, 0)
    lookup = np.full(q.n_darts, -1, dtype=np.int64)
    lookup[flat_tag] = np.arange(flat_tag.size)

    # first red end met scanning the rotation at the root vertex from d0
    d = d0
    start = -1
    for _ in range(q.n_darts):
        if lookup[d] >= 0:
            start = int(lookup[d])
            break
        d = int(q.sigma[d])
    if start < 0 or red.corr[red.vertex_of[start]] != r_q:
        raise NotAQuadrangulation("no red arc incident to the root corner")

    n = q.n_edges // 2
    dyck = np.empty(2 * n, dtype=np.int8)
    labels = np.empty(n + 1, dtype=np.int64)
    corr = np.empty(n + 1, dtype=np.int64)
    new_id = {int(red.vertex_of[start]): 0}
    labels[0] = 0
    corr[0] = r_q
    stack = [int(red.vertex_of[start])]
    base = int(lp[r_q])
    d = start
    seen = np.zeros(2 * n, dtype=bool)
    for i in range(2 * n):
        if seen[d]:
            raise NotAQuadrangulation("red arcs do not form a tree")
        seen[d] = True
        w = int(red.vertex_of[red.alpha[d]])
        if w not in new_id:
            vid = len(new_id)
            new_id[w] = vid
            labels[vid] = int(lp[red.corr[w]]) - base
            corr[vid] = int(red.corr[w])
            dyck[i] = 1
            stack.append(w)
        else:
            if len(stack) < 2 or stack[-2] != w:
                raise NotAQuadrangulation("red arcs do not form a tree")
            stack.pop()
            dyck[i] = 0
        d = int(red.sigma[red.alpha[d]])
    if d != start or len(new_id) != n + 1:
        raise NotAQuadrangulation("red contour does not close over the full tree")

    tree = WellLabeledTree(n, dyck, labels)
    return CvsImage(tree=tree, eps=eps, quad=pq, vertex_correspondence=corr)


# -- AB forward: pointed quadrangulation -> pointed map -----------------------------


def ab_forward(pq: PointedPlaneMap, validate: bool = True) -> AbImage:
    """Build the green-arc map on the non-maximum vertices of a pointed quadrangulation."""
    q = pq.map
    try:
        ab = _fast.ab_image(
            q.sigma, q.alpha, q.root, q.vertex_of, q.rank_in_vertex, pq.l_plus
        )
    except ValueError as exc:
        raise NotAQuadrangulation(str(exc)) from None
    ma = ab.map
    mmap = PlaneMap(ma.n_edges, ma.sigma, ma.alpha, ma.root, validate=validate)
    if validate and not np.array_equal(mmap.vertex_of, ma.vertex_of):
        raise AssertionError("vertex id conventions diverged between routes")
    mmap._vertex_of = ma.vertex_of
    mmap._n_vertices = ma.n_vertices
    pm = PointedPlaneMap(mmap, ab.v_star_m, l_plus=None, validate=validate)
    n_faces = ab.face_data.rows.shape[0]
    green_ends = np.stack(
        [ma.corr[ma.vertex_of[0::2]], ma.corr[ma.vertex_of[1::2]]], axis=1
    )
    return AbImage(
        pointed_map=pm,
        eps=ab.eps,
        vertex_correspondence=ma.corr.copy(),
        edge_correspondence=np.arange(n_faces, dtype=np.int64),
        face_of_dart=ab.face_data.face_of_dart,
        special_dart_of_face=ab.special,
        green_end_vertices=green_ends,
    )


def v_max_vertices(pq: PointedPlaneMap) -> np.ndarray:
    """Vertices of the quadrangulation all of whose neighbors are closer to v_star."""
    q = pq.map
    lp = pq.l_plus
    tails, heads = q.edge_endpoints()
    has_up = np.zeros(q.n_vertices, dtype=bool)
    up = lp[heads] == lp[tails] + 1
    has_up[tails[up]] = True
    return np.flatnonzero(~has_up)


# -- trivial bijection ---------------------------------------------------------------


def trivial_map_to_quad(m: PlaneMap) -> PlaneMap:
    """Quadrangulation with one face per edge of ``m``: a vertex is added in
    every face and joined to each of its corners, then the original edges are
    erased.  The original vertices are exactly the even-distance class of the
    result."""
    sigma_q, alpha_q, root_q = _fast.trivial_map_to_quad_arrays(m.sigma, m.alpha, m.root)
    return PlaneMap(2 * m.n_edges, sigma_q, alpha_q, root_q)


def trivial_quad_to_map(q: PlaneMap) -> PlaneMap:
    """Inverse of :func:`trivial_map_to_quad`: keep the even-distance class and
    replace every face by its diagonal between even corners."""
    if q.n_edges % 2 == 1:
        raise NotAQuadrangulation("odd edge count")
    dist = bfs_distances(q, int(q.vertex_of[q.root]))
    parity = (dist % 2).astype(np.int64)
    tails, heads = q.edge_endpoints()
    if np.any(parity[tails] == parity[heads]):
        raise NotAQuadrangulation("graph is not bipartite by root distance parity")
    try:
        ma, _ = _fast.trivial_quad_to_map_arrays(
            q.sigma, q.alpha, q.root, q.vertex_of, q.rank_in_vertex, parity
        )
    except ValueError as exc:
        raise NotAQuadrangulation(str(exc)) from None
    mmap = PlaneMap(ma.n_edges, ma.sigma, ma.alpha, ma.root)
    return mmap


# -- geodesics and the distance functional -------------------------------------------


def leftmost_geodesic(pq: PointedPlaneMap, e: int) -> GeodesicChain:
    """The canonical geodesic to the distinguished vertex with first step ``e``.

    At each junction the next step is the first towards-oriented dart met when
    rotating from the reversal of the previous step; every angular sector
    skipped over holds only edges oriented into the junction from further out.
    """
    q = pq.map
    lp = pq.l_plus
    if not pq.points_towards(e):
        raise NotPointingTowards(f"dart {e} does not point towards the distinguished vertex")
    darts = [int(e)]
    v = int(q.vertex_of[q.alpha[e]])
    while v != pq.v_star:
        d = int(q.sigma[q.alpha[darts[-1]]])
        steps = 0
        while lp[q.vertex_of[q.alpha[d]]] != lp[v] - 1:
            d = int(q.sigma[d])
            steps += 1
            if steps > q.n_darts:
                raise NotPointingTowards("no outgoing dart decreases the distance")
        darts.append(d)
        v = int(q.vertex_of[q.alpha[d]])
    return GeodesicChain(darts=darts)


def d_circ_q(pq: PointedPlaneMap, e: int, e2: int) -> int:
    """Length of the chain merging the two leftmost geodesics at their common suffix.

    Zero when the darts coincide; when one geodesic is a suffix of the other
    the chain degenerates to the difference of their lengths.
    """
    g1 = leftmost_geodesic(pq, e).darts
    g2 = leftmost_geodesic(pq, e2).darts
    r = 0
    while r < len(g1) and r < len(g2) and g1[len(g1) - 1 - r] == g2[len(g2) - 1 - r]:
        r += 1
    return len(g1) + len(g2) - 2 * r


def d_circ_formula(L, i: int, j: int) -> int:
    """Distance functional of a label process evaluated at two contour indices."""
    L = np.asarray(L, dtype=np.int64)
    top = L.size - 1
    if not (0 <= i <= top and 0 <= j <= top):
        raise IndexOutOfRange(f"indices ({i}, {j}) outside [0, {top}]")
    return int(_fast.d_circ_batch(L, np.array([i]), np.array([j]))[0])


def is_special(pq: PointedPlaneMap, ab: AbImage, e: int) -> int | None:
    """The green arc parallel to ``e`` (as a dart of the map), or None.

    A dart is special when the green arc of its incident face joins the same
    two vertices; the returned dart is oriented like ``e``.
    """
    f = int(ab.face_of_dart[e])
    if ab.special_dart_of_face[f] != e:
        return None
    # the special dart runs from the rolled position 3 end into the minimum,
    # i.e. from the end carrying map dart 2f + 1 towards the one carrying 2f
    return 2 * f + 1


def successor_chain_darts(qa_successor: np.ndarray, i: int) -> list[int]:
    """Darts of the successor chain starting at arc i of a CVS-built instance."""
    m = qa_successor.size
    darts = [2 * (i % m)]
    j = qa_successor[i % m]
    while j >= 0:
        j %= m
        darts.append(2 * j)
        j = qa_successor[j]
    return darts


# -- instance bundles -----------------------------------------------------------------

BUNDLE_SCHEMA = "maplab-bundle-v1"


def _map_payload(m: PlaneMap, v_star: int | None = None) -> dict:
    payload = {
        "n_edges": m.n_edges,
        "root": m.root,
        "sigma": [int(x) for x in m.sigma],
        "alpha": [int(x) for x in m.alpha],
    }
    if v_star is not None:
        payload["v_star"] = int(v_star)
    return payload


def build_bundle(tree: WellLabeledTree, eps: int) -> dict:
    """The full coupled instance as a JSON-serializable document."""
    cvs = cvs_inverse(tree, eps)
    ab = ab_forward(cvs.quad)
    return {
        "schema": BUNDLE_SCHEMA,
        "n": tree.n_edges,
        "eps": int(eps),
        "tree": {
            "dyck": "".join(str(int(b)) for b in tree.dyck),
            "labels": [int(x) for x in tree.labels],
        },
        "quad": _map_payload(cvs.quad.map, cvs.quad.v_star),
        "map": _map_payload(ab.pointed_map.map, ab.pointed_map.v_star),
        "cvs_vertex_correspondence": [int(x) for x in cvs.vertex_correspondence],
        "ab_vertex_correspondence": [int(x) for x in ab.vertex_correspondence],
        "ab_edge_correspondence": [int(x) for x in ab.edge_correspondence],
    }


def bundle_json(bundle: dict) -> str:
    return json.dumps(bundle, sort_keys=True, separators=(",", ":")) + "\n"


def load_bundle(document: dict) -> tuple[WellLabeledTree, int]:
    if document.get("schema") != BUNDLE_SCHEMA:
        raise FormatError(f"unknown bundle schema {document.get('schema')!r}")
    tree = WellLabeledTree(
        document["n"],
        np.array([int(c) for c in document["tree"]["dyck"]], dtype=np.int8),
        np.array(document["tree"]["labels"], dtype=np.int64),
    )
    return tree, int(document["eps"])
