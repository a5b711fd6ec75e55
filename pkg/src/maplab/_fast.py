"""Vectorized kernels shared by the bijections and the Monte Carlo experiments.

Everything here works on plain numpy arrays (no PlaneMap objects) so that
large instances stay cheap.  The public modules wrap these kernels and add
validation; the test suite checks the two routes against each other on
enumerated and sampled instances.

Vertex id spaces: a decoded tree uses ids 0..n in contour-first-visit order
and the added distinguished vertex is ``n + 1`` ("tree space").  Assembled
maps re-identify vertices by first dart occurrence ("map space"); the
``tv_to_qid`` array converts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


# -- permutation orbit helpers -------------------------------------------------


def orbit_min(perm: np.ndarray) -> np.ndarray:
    om = np.arange(perm.size, dtype=np.int64)
    p = perm
    steps = max(1, int(np.ceil(np.log2(max(perm.size, 2)))))
    for _ in range(steps):
        om = np.minimum(om, om[p])
        p = p[p]
    return np.minimum(om, om[perm])


def orbit_sizes(perm: np.ndarray) -> np.ndarray:
    om = orbit_min(perm)
    counts = np.bincount(om, minlength=perm.size)
    return counts[np.unique(om)]


def dense_ids(keys: np.ndarray) -> tuple[np.ndarray, int]:
    uniq = np.unique(keys)
    return np.searchsorted(uniq, keys), len(uniq)


# -- level-bucketed "next occurrence" searches ---------------------------------


def _level_buckets(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Positions grouped by value level; returns (order, level_starts, n_levels)."""
    shifted = values - values.min()
    order = np.argsort(shifted, kind="stable")
    counts = np.bincount(shifted)
    starts = np.concatenate([[0], np.cumsum(counts)])
    return order, starts, counts.size


def successor_array(L: np.ndarray) -> np.ndarray:
    """s(i) over corners 0..2n-1: first j > i (2n-periodic) with L(j) = L(i) - 1.

    Returned as the absolute index in the periodic extension (may reach
    i + 2n - 1); -1 where L(i) is the minimum.
    """
    m = L.size
    order, starts, n_levels = _level_buckets(L)
    s = np.full(m, -1, dtype=np.int64)
    for lev in range(1, n_levels):
        pos_v = order[starts[lev] : starts[lev + 1]]
        pos_down = order[starts[lev - 1] : starts[lev]]
        if pos_v.size == 0 or pos_down.size == 0:
            continue
        idx = np.searchsorted(pos_down, pos_v, side="right")
        wrap = idx == pos_down.size
        res = np.where(wrap, pos_down[0] + m, pos_down[idx % pos_down.size])
        s[pos_v] = res
    return s


def previous_lower_position(C: np.ndarray) -> np.ndarray:
    """For each position i: the last k <= i with C(k) = C(i) - 1; -1 at level 0."""
    order, starts, n_levels = _level_buckets(C)
    out = np.full(C.size, -1, dtype=np.int64)
    for lev in range(1, n_levels):
        pos_v = order[starts[lev] : starts[lev + 1]]
        pos_down = order[starts[lev - 1] : starts[lev]]
        if pos_v.size == 0 or pos_down.size == 0:
            continue
        idx = np.searchsorted(pos_down, pos_v, side="left") - 1
        out[pos_v] = pos_down[np.maximum(idx, 0)]
    return out


def next_at_same_level(C: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """First position strictly after each given position with the same C value."""
    order, starts, _ = _level_buckets(C)
    shifted = C - C.min()
    out = np.full(positions.size, -1, dtype=np.int64)
    levels = shifted[positions]
    for lev in np.unique(levels):
        sel = levels == lev
        bucket = order[starts[lev] : starts[lev + 1]]
        idx = np.searchsorted(bucket, positions[sel], side="right")
        valid = idx < bucket.size
        res = np.where(valid, bucket[np.minimum(idx, bucket.size - 1)], -1)
        out[sel] = res
    return out


# -- decoded trees -------------------------------------------------------------


@dataclass
class TreeArrays:
    """Vectorized decode of a (Dyck word, increments) pair."""

    n: int
    dyck: np.ndarray  # (2n,)
    C: np.ndarray  # (2n+1,) contour heights
    L: np.ndarray  # (2n+1,) contour labels
    contour_vertex: np.ndarray  # (2n+1,) vertex at each contour corner
    labels: np.ndarray  # (n+1,) per-vertex labels
    first_visit: np.ndarray  # (n+1,)
    parent: np.ndarray  # (n+1,), -1 at the root


def decode_tree(dyck: np.ndarray, increments: np.ndarray) -> TreeArrays:
    n = increments.size
    steps = np.where(dyck == 1, 1, -1).astype(np.int64)
    C = np.concatenate([[0], np.cumsum(steps)])
    # vertex at each contour position: level-bucketed previous-lower search
    prev_lower = previous_lower_position(C)
    fv_pos = np.where(C > 0, prev_lower + 1, 0)
    first_visits = np.concatenate([[0], np.flatnonzero(dyck == 1) + 1])
    contour_vertex = np.searchsorted(first_visits, fv_pos)
    # labels along the contour: +inc entering a vertex, -inc leaving it
    down = dyck == 1
    inc_down = np.zeros(2 * n, dtype=np.int64)
    inc_down[down] = increments
    step_inc = np.where(down, inc_down, 0)
    leaving = contour_vertex[:-1][~down]
    up_inc = np.zeros(2 * n, dtype=np.int64)
    up_inc[~down] = increments[leaving - 1]
    step_inc = step_inc - up_inc
    L = np.concatenate([[0], np.cumsum(step_inc)])
    labels = L[first_visits]
    parent = np.full(n + 1, -1, dtype=np.int64)
    parent[1:] = contour_vertex[first_visits[1:] - 1]
    return TreeArrays(
        n=n,
        dyck=np.asarray(dyck, dtype=np.int8),
        C=C,
        L=L,
        contour_vertex=contour_vertex,
        labels=labels,
        first_visit=first_visits,
        parent=parent,
    )


def tree_local_maxima_mask(ta: TreeArrays) -> np.ndarray:
    labels = ta.labels
    best = np.full(ta.n + 1, np.iinfo(np.int64).min, dtype=np.int64)
    parents = ta.parent[1:]
    children = np.arange(1, ta.n + 1)
    np.maximum.at(best, parents, labels[children])
    np.maximum.at(best, children, labels[parents])
    return labels >= best


# -- quadrangulation assembly (inverse CVS construction) -------------------------


@dataclass
class QuadArrays:
    """Rotation system of the quadrangulation built from a labeled tree.

    Arc i (drawn from corner i to its successor corner, or to the
    distinguished vertex when the corner label is minimal) owns darts 2i and
    2i + 1; every arc points towards the distinguished vertex.
    """

    n: int  # tree edges; the quadrangulation has 2n edges and n faces
    sigma: np.ndarray  # (4n,)
    alpha: np.ndarray  # (4n,)
    root: int
    eps: int
    vertex_of: np.ndarray  # (4n,) map-space vertex ids, first-dart order
    n_vertices: int  # n + 2
    rank: np.ndarray  # (4n,) position of each dart inside its vertex rotation
    l_plus: np.ndarray  # (n+2,) distance labels, map space
    tv_to_qid: np.ndarray  # (n+2,) tree space -> map space
    v_star: int  # map space id
    successor: np.ndarray  # (2n,) periodic-extended successor, -1 at minima
    corner_vertex_q: np.ndarray  # (2n,) map-space vertex of each corner
    corner_L: np.ndarray  # (2n,) corner labels


def build_quad(ta: TreeArrays, eps: int) -> QuadArrays:
    n = ta.n
    m = 2 * n
    Lc = ta.L[:m]
    cv = ta.contour_vertex[:m]
    s = successor_array(Lc)
    finite = s >= 0
    t = np.where(finite, s % m, 0)
    vstar_tv = n + 1

    k = np.arange(m, dtype=np.int64)
    vert = np.empty(2 * m, dtype=np.int64)
    key1 = np.empty(2 * m, dtype=np.int64)
    key2 = np.empty(2 * m, dtype=np.int64)
    key3 = np.empty(2 * m, dtype=np.int64)
    # out-dart 2k leaves corner k; it is the last arc end inside its corner
    vert[0::2] = cv
    key1[0::2] = k
    key2[0::2] = 1
    key3[0::2] = 0
    # in-dart 2k+1 lands at the successor corner (nearest-backward source first);
    # the added vertex sees the boundary from the complementary side, so its
    # spokes run in descending corner order
    vert[1::2] = np.where(finite, cv[t], vstar_tv)
    key1[1::2] = np.where(finite, t, m - k)
    key2[1::2] = 0
    key3[1::2] = np.where(finite, (t - k) % m, 0)

    order = np.lexsort((key3, key2, key1, vert))
    sorted_vert = vert[order]
    run_start_mask = np.empty(2 * m, dtype=bool)
    run_start_mask[0] = True
    run_start_mask[1:] = sorted_vert[1:] != sorted_vert[:-1]
    run_id = np.cumsum(run_start_mask) - 1
    run_starts = np.flatnonzero(run_start_mask)
    run_ends = np.concatenate([run_starts[1:], [2 * m]])
    nxt = np.arange(1, 2 * m + 1)
    nxt[run_ends - 1] = run_starts
    sigma = np.empty(2 * m, dtype=np.int64)
    sigma[order] = order[nxt]
    rank = np.empty(2 * m, dtype=np.int64)
    rank[order] = np.arange(2 * m) - run_starts[run_id]

    # map-space vertex ids by first dart occurrence
    run_min_dart = np.minimum.reduceat(order, run_starts)
    qid_of_run = np.empty(run_starts.size, dtype=np.int64)
    qid_of_run[np.argsort(run_min_dart)] = np.arange(run_starts.size)
    vertex_of = np.empty(2 * m, dtype=np.int64)
    vertex_of[order] = qid_of_run[run_id]
    tv_of_run = sorted_vert[run_starts]
    tv_to_qid = np.empty(n + 2, dtype=np.int64)
    tv_to_qid[tv_of_run] = qid_of_run

    lp_tv = np.empty(n + 2, dtype=np.int64)
    lp_tv[: n + 1] = ta.labels - ta.labels.min() + 1
    lp_tv[vstar_tv] = 0
    l_plus = np.empty(n + 2, dtype=np.int64)
    l_plus[tv_to_qid] = lp_tv

    alpha = np.arange(2 * m, dtype=np.int64) ^ 1
    root = 0 if eps == 0 else 1
    return QuadArrays(
        n=n,
        sigma=sigma,
        alpha=alpha,
        root=root,
        eps=int(eps),
        vertex_of=vertex_of,
        n_vertices=n + 2,
        rank=rank,
        l_plus=l_plus,
        tv_to_qid=tv_to_qid,
        v_star=int(tv_to_qid[vstar_tv]),
        successor=s,
        corner_vertex_q=tv_to_qid[cv],
        corner_L=Lc,
    )


def arc_head_vertex(qa: QuadArrays) -> np.ndarray:
    """Map-space vertex at the head of each arc (the tilde vertices)."""
    return qa.vertex_of[qa.alpha[2 * np.arange(2 * qa.n)]]


# -- face classification on an assembled quadrangulation ------------------------


@dataclass
class FaceData:
    rows: np.ndarray  # (F, 4) darts in phi order
    rolled: np.ndarray  # (F, 4) same, rolled so the minimum label comes first
    simple: np.ndarray  # (F,) bool
    face_of_dart: np.ndarray  # (2E,)
    # arc endpoints as (vertex, sector tag dart) pairs, see callers
    min_corner_dart: np.ndarray  # rolled[:, 0]


def quad_faces(sigma: np.ndarray, alpha: np.ndarray, l_plus: np.ndarray, vertex_of: np.ndarray) -> FaceData:
    """4-dart face rows of a quadrangulation, rolled to start at a minimum label."""
    phi = sigma[alpha]
    n_darts = phi.size
    phi2 = phi[phi]
    d = np.arange(n_darts, dtype=np.int64)
    if not np.array_equal(phi2[phi2], d):
        raise ValueError("not a quadrangulation: phi^4 != id")
    om = np.minimum(np.minimum(d, phi), np.minimum(phi2, phi[phi2]))
    reps = np.flatnonzero(om == d)
    if reps.size != n_darts // 4:
        raise ValueError("not a quadrangulation: some face degree is not 4")
    rows = np.stack([reps, phi[reps], phi2[reps], phi[phi2[reps]]], axis=1)
    labels = l_plus[vertex_of[rows]]
    m_idx = np.argmin(labels, axis=1)
    cols = (m_idx[:, None] + np.arange(4)[None, :]) % 4
    rolled = np.take_along_axis(rows, cols, axis=1)
    lab_rolled = np.take_along_axis(labels, cols, axis=1)
    simple = lab_rolled[:, 2] == lab_rolled[:, 0] + 2
    confluent = lab_rolled[:, 2] == lab_rolled[:, 0]
    if not np.all(simple | confluent):
        raise ValueError("face label pattern is neither simple nor confluent")
    face_of_dart = np.empty(n_darts, dtype=np.int64)
    face_of_dart[rows.reshape(-1)] = np.repeat(np.arange(reps.size), 4)
    return FaceData(
        rows=rows,
        rolled=rolled,
        simple=simple,
        face_of_dart=face_of_dart,
        min_corner_dart=rolled[:, 0],
    )


# Frozen arc rules in the rolled frame (labels l, l+1, l+2, l+1 for a simple
# face, l, l+1, l, l+1 for a confluent one).  Red joins the largest label to
# its predecessor in phi order, green the smallest to its predecessor; the
# certification ledgers break at n <= 3 under any single flip of these.
SIMPLE_RED_POSITIONS = (2, 1)
CONFLUENT_RED_POSITIONS = (1, 3)
SIMPLE_GREEN_POSITIONS = (0, 3)
CONFLUENT_GREEN_POSITIONS = (0, 2)


def _arc_ends(fd: FaceData, alpha: np.ndarray, simple_pos, confluent_pos):
    r = fd.rolled
    idx = np.arange(r.shape[0])
    pos_a = np.where(fd.simple, simple_pos[0], confluent_pos[0])
    pos_b = np.where(fd.simple, simple_pos[1], confluent_pos[1])
    end_a_origin = r[idx, pos_a]
    end_a_tag = alpha[r[idx, (pos_a - 1) % 4]]
    end_b_origin = r[idx, pos_b]
    end_b_tag = alpha[r[idx, (pos_b - 1) % 4]]
    return (
        np.stack([end_a_origin, end_b_origin], axis=1),
        np.stack([end_a_tag, end_b_tag], axis=1),
    )


def green_arc_ends(fd: FaceData, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per face: the two green arc ends as (origin dart, sector tag dart).

    The end at rolled position j is attached inside the face corner tagged by
    alpha of the dart at position j - 1.
    """
    return _arc_ends(fd, alpha, SIMPLE_GREEN_POSITIONS, CONFLUENT_GREEN_POSITIONS)


def red_arc_ends(fd: FaceData, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per face: the two red arc ends as (origin dart, sector tag dart)."""
    return _arc_ends(fd, alpha, SIMPLE_RED_POSITIONS, CONFLUENT_RED_POSITIONS)


def special_darts(fd: FaceData) -> np.ndarray:
    """The unique special dart of each simple face (-1 for confluent faces).

    It is the face's own boundary dart running from the label l+1 vertex at
    rolled position 3 down into the minimum; the face's green arc joins the
    same two vertices.
    """
    return np.where(fd.simple, fd.rolled[:, 3], -1)


# -- rotation assembly from tagged arc ends -------------------------------------


@dataclass
class MapArrays:
    n_edges: int
    sigma: np.ndarray
    alpha: np.ndarray
    root: int
    vertex_of: np.ndarray  # map-space ids, first-dart order
    n_vertices: int
    corr: np.ndarray  # map space -> host vertex ids of the carrier map


def assemble_from_ends(
    host_rank: np.ndarray,
    ends_origin_vertex: np.ndarray,
    ends_tag: np.ndarray,
    root_dart: int,
) -> MapArrays:
    """Build the rotation system of an arc system drawn inside a host map.

    ``ends_origin_vertex``/``ends_tag`` are flat arrays over new darts: the
    host vertex carrying each arc end and the host dart whose corner sector
    holds it.  At most one end per sector; the rotation at a vertex is the
    sector order.
    """
    n_darts = ends_tag.size
    keys_rank = host_rank[ends_tag]
    order = np.lexsort((keys_rank, ends_origin_vertex))
    sv = ends_origin_vertex[order]
    run_start_mask = np.empty(n_darts, dtype=bool)
    run_start_mask[0] = True
    run_start_mask[1:] = sv[1:] != sv[:-1]
    run_id = np.cumsum(run_start_mask) - 1
    run_starts = np.flatnonzero(run_start_mask)
    run_ends = np.concatenate([run_starts[1:], [n_darts]])
    nxt = np.arange(1, n_darts + 1)
    nxt[run_ends - 1] = run_starts
    sigma = np.empty(n_darts, dtype=np.int64)
    sigma[order] = order[nxt]

    run_min_dart = np.minimum.reduceat(order, run_starts)
    new_id_of_run = np.empty(run_starts.size, dtype=np.int64)
    new_id_of_run[np.argsort(run_min_dart)] = np.arange(run_starts.size)
    vertex_of = np.empty(n_darts, dtype=np.int64)
    vertex_of[order] = new_id_of_run[run_id]
    corr = np.empty(run_starts.size, dtype=np.int64)
    corr[new_id_of_run] = sv[run_starts]

    alpha = np.arange(n_darts, dtype=np.int64) ^ 1
    return MapArrays(
        n_edges=n_darts // 2,
        sigma=sigma,
        alpha=alpha,
        root=int(root_dart),
        vertex_of=vertex_of,
        n_vertices=run_starts.size,
        corr=corr,
    )


# -- AB image ------------------------------------------------------------------


@dataclass
class AbArrays:
    map: MapArrays  # corr maps into host (quad) vertex ids
    eps: int
    v_star_m: int
    face_data: FaceData
    green_dart_a: np.ndarray  # (F,) m-dart 2k sits at the rolled-min end
    special: np.ndarray  # (F,) special dart of each face, -1 if none


def ab_image(
    sigma: np.ndarray,
    alpha: np.ndarray,
    root: int,
    vertex_of: np.ndarray,
    rank: np.ndarray,
    l_plus: np.ndarray,
) -> AbArrays:
    fd = quad_faces(sigma, alpha, l_plus, vertex_of)
    ends_origin, ends_tag = green_arc_ends(fd, alpha)
    ends_vertex = vertex_of[ends_origin]

    head = vertex_of[alpha[root]]
    tail = vertex_of[root]
    eps = 0 if l_plus[head] == l_plus[tail] - 1 else 1
    d0 = root if eps == 0 else int(alpha[root])
    h = vertex_of[alpha[d0]]
    f0 = int(fd.face_of_dart[d0])
    if ends_vertex[f0, 0] == h:
        root_m = 2 * f0
    elif ends_vertex[f0, 1] == h:
        root_m = 2 * f0 + 1
    else:
        raise ValueError("green arc of the root face misses the root vertex")

    flat_vertex = ends_vertex.reshape(-1)
    flat_tag = ends_tag.reshape(-1)
    ma = assemble_from_ends(rank, flat_vertex, flat_tag, root_m)
    # v_star sits at the head of any spoke; find it through the correspondence
    v_star_q = int(vertex_of[np.argmin(l_plus[vertex_of])])
    v_star_m = int(np.flatnonzero(ma.corr == v_star_q)[0])
    return AbArrays(
        map=ma,
        eps=eps,
        v_star_m=v_star_m,
        face_data=fd,
        green_dart_a=2 * np.arange(fd.rows.shape[0], dtype=np.int64),
        special=special_darts(fd),
    )


# -- trivial bijection ----------------------------------------------------------


def trivial_quad_to_map_arrays(
    sigma: np.ndarray,
    alpha: np.ndarray,
    root: int,
    vertex_of: np.ndarray,
    rank: np.ndarray,
    parity: np.ndarray,
) -> tuple[MapArrays, np.ndarray]:
    """Rooted map whose edges are the diagonals between even-class corners.

    ``parity[v]`` is the distance parity to the root vertex.  Returns the map
    arrays plus ``end_of_tag`` for diagnostics.
    """
    phi = sigma[alpha]
    n_darts = phi.size
    phi2 = phi[phi]
    d = np.arange(n_darts, dtype=np.int64)
    om = np.minimum(np.minimum(d, phi), np.minimum(phi2, phi[phi2]))
    reps = np.flatnonzero(om == d)
    if reps.size != n_darts // 4 or not np.array_equal(phi2[phi2], d):
        raise ValueError("not a quadrangulation")
    rows = np.stack([reps, phi[reps], phi2[reps], phi[phi2[reps]]], axis=1)
    par = parity[vertex_of[rows]]
    alternates = (
        np.array_equal(par[:, 0], par[:, 2])
        and np.array_equal(par[:, 1], par[:, 3])
        and not np.any(par[:, 0] == par[:, 1])
    )
    if not alternates:
        raise ValueError("face corners do not alternate distance parity")
    je = np.where(par[:, 0] == 0, 0, 1)
    idx = np.arange(rows.shape[0])
    pos_a = je
    pos_b = je + 2
    end_a_origin = rows[idx, pos_a]
    end_b_origin = rows[idx, pos_b]
    end_a_tag = alpha[rows[idx, (pos_a - 1) % 4]]
    end_b_tag = alpha[rows[idx, pos_b - 1]]
    ends_vertex = np.stack([vertex_of[end_a_origin], vertex_of[end_b_origin]], axis=1).reshape(-1)
    ends_tag = np.stack([end_a_tag, end_b_tag], axis=1).reshape(-1)

    sigma_inv = np.empty(n_darts, dtype=np.int64)
    sigma_inv[sigma] = d
    end_of_tag = np.full(n_darts, -1, dtype=np.int64)
    end_of_tag[ends_tag] = np.arange(ends_tag.size)
    root_m = int(end_of_tag[sigma_inv[root]])
    if root_m < 0:
        raise ValueError("root corner carries no diagonal end")
    ma = assemble_from_ends(rank, ends_vertex, ends_tag, root_m)
    return ma, end_of_tag


def trivial_map_to_quad_arrays(sigma: np.ndarray, alpha: np.ndarray, root: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Quadrangulation of a map: one new edge per corner, closed form.

    New edge b (one per map dart) has dart 2b at the origin of b and dart
    2b + 1 at the vertex added inside the face behind b's corner.  Around an
    original vertex the new edges follow the rotation, sigma_q(2b) =
    2 sigma(b); an added vertex sees its face boundary from the complementary
    side, so its rotation runs the corner walk backwards, sigma_q(2b+1) =
    2 sigma_inv(alpha(b)) + 1.
    """
    n_darts = sigma.size
    sigma_inv = np.empty(n_darts, dtype=np.int64)
    sigma_inv[sigma] = np.arange(n_darts)
    sigma_q = np.empty(2 * n_darts, dtype=np.int64)
    sigma_q[0::2] = 2 * sigma
    sigma_q[1::2] = 2 * sigma_inv[alpha] + 1
    alpha_q = np.arange(2 * n_darts, dtype=np.int64) ^ 1
    return sigma_q, alpha_q, 2 * int(root)


# -- green edge endpoint lists straight from the tree ---------------------------


def green_edges_tree_space(ta: TreeArrays, s: np.ndarray | None = None) -> np.ndarray:
    """(n, 2) green edge endpoints in tree space (distinguished vertex = n + 1).

    Derived per tree edge from the successor structure of the contour: with
    the edge crossed upward (low label to high) between corners c and c + 1,
    the green arc of the face containing the edge joins the successors of
    those two corners.
    """
    n = ta.n
    m = 2 * n
    if s is None:
        s = successor_array(ta.L[:m])
    down_pos = np.flatnonzero(ta.dyck == 1)  # contour step index of each edge, creation order
    a = down_pos  # corner at the parent just before descending
    # matching up-step: first contour position after a+1 at the parent's height
    close_pos = next_at_same_level(ta.C, a)  # first j > a with C(j) = C(a): the return position
    b = close_pos - 1
    delta = ta.labels[1:] - ta.labels[ta.parent[1:]]
    lo = np.where(delta == 1, a, b)  # corner at the lower-labeled endpoint
    first = np.where(delta == 0, a, lo)
    second = np.where(delta == 0, b, (lo + 1) % m)

    def target_vertex(corners):
        sc = s[corners % m]
        fin = sc >= 0
        return np.where(fin, ta.contour_vertex[np.where(fin, sc % m, 0)], n + 1)

    return np.stack([target_vertex(first), target_vertex(second)], axis=1)


# -- BFS and distance tables -----------------------------------------------------


def csr_from_edges(u: np.ndarray, v: np.ndarray, n_vertices: int) -> tuple[np.ndarray, np.ndarray]:
    tails = np.concatenate([u, v])
    heads = np.concatenate([v, u])
    order = np.argsort(tails, kind="stable")
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(np.bincount(tails, minlength=n_vertices), out=indptr[1:])
    return indptr, heads[order]


def bfs(indptr: np.ndarray, indices: np.ndarray, source: int, n_vertices: int) -> np.ndarray:
    dist = np.full(n_vertices, -1, dtype=np.int64)
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


class CyclicRangeMin:
    """O(1) min over closed intervals of a sequence, plus the wrap-around case."""

    def __init__(self, arr: np.ndarray):
        arr = np.asarray(arr, dtype=np.int64)
        self.n = arr.size
        tables = [arr]
        k = 1
        while (1 << k) <= self.n:
            prev = tables[-1]
            half = 1 << (k - 1)
            tables.append(np.minimum(prev[: prev.size - half], prev[half:]))
            k += 1
        self.tables = tables
        self.prefix = np.minimum.accumulate(arr)
        self.suffix = np.minimum.accumulate(arr[::-1])[::-1]

    def inner(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """min over [i, j] inclusive, elementwise; requires i <= j."""
        length = j - i + 1
        k = np.floor(np.log2(length)).astype(np.int64)
        out = np.empty(i.shape, dtype=np.int64)
        for kk in np.unique(k):
            sel = k == kk
            tbl = self.tables[kk]
            out[sel] = np.minimum(tbl[i[sel]], tbl[j[sel] - (1 << int(kk)) + 1])
        return out

    def check(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """The cyclic interval min: [i..j] when i <= j, else [0..j] union [i..end]."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        out = np.empty(i.shape, dtype=np.int64)
        fwd = i <= j
        if np.any(fwd):
            out[fwd] = self.inner(i[fwd], j[fwd])
        if np.any(~fwd):
            out[~fwd] = np.minimum(self.prefix[j[~fwd]], self.suffix[i[~fwd]])
        return out


_NO_CORNER = np.int64(1) << 40  # sentinel minimum of an empty open interval


def d_circ_batch(
    L: np.ndarray, I: np.ndarray, J: np.ndarray, rm: CyclicRangeMin | None = None
) -> np.ndarray:
    """Label-process distance functional over index pairs, vectorized.

    Equals the merged-geodesic length d_circ of the built quadrangulation at
    the corresponding arcs.  The successor chains from corners i and j merge
    one level below min(maxgap, L(i) ^ L(j)), where maxgap is the larger of
    the two open-interval label minima separating i from j, except when one
    chain passes straight through the other corner (then the shorter chain is
    a suffix of the longer and no detour step is needed).

    ``L`` may have length 2n (corner labels) or 2n + 1 (contour process with
    the duplicated endpoint); indices are taken modulo 2n.
    """
    L = np.asarray(L, dtype=np.int64)
    P = L.size if L.size % 2 == 0 else L.size - 1
    Lc = L[:P]
    if rm is None:
        rm = CyclicRangeMin(Lc)
    I = np.asarray(I, dtype=np.int64) % P
    J = np.asarray(J, dtype=np.int64) % P

    def open_min(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """min over corners strictly between a and b going forward (cyclically)."""
        dist = (b - a) % P
        lo = (a + 1) % P
        hi = (a + dist - 1) % P
        nonempty = dist > 1
        out = np.full(a.shape, _NO_CORNER, dtype=np.int64)
        if np.any(nonempty):
            out[nonempty] = rm.check(lo[nonempty], hi[nonempty])
        return out

    Li = Lc[I]
    Lj = Lc[J]
    u = np.minimum(Li, Lj)
    m1 = open_min(I, J)
    m2 = open_min(J, I)
    suffix = ((Lj < Li) & (m1 > Lj)) | ((Li < Lj) & (m2 > Li))
    merge = np.where(suffix, u, np.minimum(np.maximum(m1, m2), u) - 1)
    out = Li + Lj - 2 * merge
    out[I == J] = 0
    return out


def leftmost_chain(
    sigma: np.ndarray,
    alpha: np.ndarray,
    vertex_of: np.ndarray,
    l_plus: np.ndarray,
    v_star: int,
    e: int,
) -> list[int]:
    """Dart list of the canonical geodesic with first step ``e`` (array route)."""
    darts = [int(e)]
    v = int(vertex_of[alpha[e]])
    while v != v_star:
        d = int(sigma[alpha[darts[-1]]])
        while l_plus[vertex_of[alpha[d]]] != l_plus[v] - 1:
            d = int(sigma[d])
        darts.append(d)
        v = int(vertex_of[alpha[d]])
    return darts


def merged_chain_length(c1: list[int], c2: list[int]) -> int:
    """Total length after gluing two geodesic chains at their maximal common suffix."""
    r = 0
    while r < len(c1) and r < len(c2) and c1[len(c1) - 1 - r] == c2[len(c2) - 1 - r]:
        r += 1
    return len(c1) + len(c2) - 2 * r


def face_stats(sigma: np.ndarray, alpha: np.ndarray) -> tuple[int, int]:
    """(number of faces, maximum face degree)."""
    sizes = orbit_sizes(sigma[alpha])
    return sizes.size, int(sizes.max())


def vertex_stats(sigma: np.ndarray) -> tuple[int, int]:
    sizes = orbit_sizes(sigma)
    return sizes.size, int(sizes.max())
