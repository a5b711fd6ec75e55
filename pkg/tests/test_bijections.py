import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maplab import (
    INFINITY,
    WellLabeledTree,
    ab_forward,
    bfs_distances,
    cvs_forward,
    cvs_inverse,
    d_circ_formula,
    d_circ_q,
    enumerate_trees,
    faces,
    is_special,
    leftmost_geodesic,
    max_face_degree,
    sample_uniform_tree,
    successor,
    trivial_map_to_quad,
    trivial_quad_to_map,
)
from maplab import _fast
from maplab.bijections import (
    build_bundle,
    bundle_json,
    load_bundle,
    successor_chain_darts,
    v_max_vertices,
    _tree_arrays,
)
from maplab.core_map import canonical_form
from maplab.errors import IndexOutOfRange, NotAQuadrangulation, NotPointingTowards

DATA = Path(__file__).parent / "data"


# -- successor ----------------------------------------------------------------


def test_successor_examples():
    assert successor([0, 1, 0], 1) == 2
    assert successor([0, 1, 0], 0) == INFINITY
    assert successor([0, -1, 0], 0) == 1


def test_successor_out_of_range():
    with pytest.raises(IndexOutOfRange):
        successor([0, 1, 0], 2)


# -- trivial bijection ----------------------------------------------------------


def test_trivial_images_of_the_two_one_edge_maps(one_edge_map, loop_map):
    qa = trivial_map_to_quad(one_edge_map)
    qb = trivial_map_to_quad(loop_map)
    assert qa.n_faces == 1 and qb.n_faces == 1
    assert canonical_form(qa) != canonical_form(qb)  # both elements of the size-1 class
    for m, q in ((one_edge_map, qa), (loop_map, qb)):
        back = trivial_quad_to_map(q)
        assert canonical_form(back) == canonical_form(m)


def test_trivial_even_class(small_instances):
    for inst in small_instances:
        q = inst.quad.map
        mm = trivial_quad_to_map(q)
        dist = bfs_distances(q, int(q.vertex_of[q.root]))
        assert mm.n_vertices == int(np.count_nonzero(dist % 2 == 0))


def test_trivial_rejects_non_quadrangulation(one_edge_map):
    with pytest.raises(NotAQuadrangulation):
        trivial_quad_to_map(one_edge_map)  # odd edge count


def test_trivial_roundtrip_exhaustive_n5():
    # identity on every distinct rooted quadrangulation with 5 faces
    from maplab.verify import count_rooted_maps

    seen = {}
    for tree in enumerate_trees(5):
        for eps in (0, 1):
            q = cvs_inverse(tree, eps, validate=False).quad.map
            seen.setdefault(canonical_form(q), q)
    assert len(seen) == count_rooted_maps(5)
    for cf, q in seen.items():
        mm = trivial_quad_to_map(q)
        assert mm.n_edges == 5
        assert canonical_form(trivial_map_to_quad(mm)) == cf


def test_trivial_inverse_of_four_cycle_is_double_edge():
    from maplab import build_map

    sigma = [0] * 8
    for k in range(4):
        prev = (k - 1) % 4
        sigma[2 * k] = 2 * prev + 1
        sigma[2 * prev + 1] = 2 * k
    q = build_map(4, alpha=[1, 0, 3, 2, 5, 4, 7, 6], sigma=sigma, root=0)
    mm = trivial_quad_to_map(q)
    assert mm.n_vertices == 2 and mm.n_edges == 2 and mm.n_faces == 2
    assert canonical_form(trivial_map_to_quad(mm)) == canonical_form(q)


# -- CVS ------------------------------------------------------------------------


def test_cvs_inverse_one_edge_plus():
    tree = WellLabeledTree(1, [1, 0], [0, 1])
    img = cvs_inverse(tree, 0)
    assert img.quad.map.n_faces == 1
    assert max_face_degree(img.quad.map) == 4
    lp = sorted(img.quad.l_plus.tolist())
    assert lp == [0, 1, 2]
    assert img.quad.l_plus[img.quad.v_star] == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cvs_images_cover_pointed_quads(n):
    from maplab.core_map import pointed_canonical_form
    from maplab.verify import count_pointed_maps

    seen = set()
    for tree in enumerate_trees(n):
        for eps in (0, 1):
            img = cvs_inverse(tree, eps)
            seen.add(pointed_canonical_form(img.quad.map, img.quad.v_star))
    assert len(seen) == 2 * count_pointed_maps(n)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cvs_roundtrip_exhaustive(n):
    for tree in enumerate_trees(n):
        for eps in (0, 1):
            img = cvs_inverse(tree, eps)
            back = cvs_forward(img.quad)
            assert back.tree == tree and back.eps == eps


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cvs_inverse_of_forward_on_repointed_quads(n):
    # forward then inverse is the identity on every pointed quadrangulation,
    # including pointings the inverse construction never produced directly
    from maplab import PointedPlaneMap
    from maplab.core_map import canonical_form, pointed_canonical_form

    quads = {}
    for tree in enumerate_trees(n):
        for eps in (0, 1):
            q = cvs_inverse(tree, eps, validate=False).quad.map
            quads.setdefault(canonical_form(q), q)
    for q in quads.values():
        for v_star in range(q.n_vertices):
            pq = PointedPlaneMap(q, v_star)
            img = cvs_forward(pq)
            rebuilt = cvs_inverse(img.tree, img.eps)
            assert pointed_canonical_form(
                rebuilt.quad.map, rebuilt.quad.v_star
            ) == pointed_canonical_form(q, v_star)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(5, 40), seed=st.integers(0, 2**32 - 1), eps=st.integers(0, 1))
def test_cvs_roundtrip_sampled(n, seed, eps):
    tree = sample_uniform_tree(n, seed)
    img = cvs_inverse(tree, eps)
    back = cvs_forward(img.quad)
    assert back.tree == tree and back.eps == eps
    assert max_face_degree(img.quad.map) == 4
    # label shift: distance labels are tree labels above the added-vertex floor
    lp = img.quad.l_plus
    corr = img.vertex_correspondence
    assert np.array_equal(lp[corr], tree.labels - tree.labels.min() + 1)


def test_face_classification_patterns(small_instances):
    # every face is simple (l, l+1, l+2, l+1) or confluent (l, l+1, l, l+1)
    for inst in small_instances:
        pq = inst.quad
        lp = pq.l_plus
        vof = pq.map.vertex_of
        for f in faces(pq.map):
            lab = [int(lp[vof[d]]) for d in f]
            m = min(range(4), key=lambda j: lab[j])
            rolled = [lab[(m + j) % 4] for j in range(4)]
            l = rolled[0]
            assert rolled in ([l, l + 1, l + 2, l + 1], [l, l + 1, l, l + 1])


# -- AB --------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ab_counts_and_distance_identity_exhaustive(n):
    for tree in enumerate_trees(n):
        for eps in (0, 1):
            pq = cvs_inverse(tree, eps).quad
            ab = ab_forward(pq)
            mm = ab.pointed_map
            vmax = v_max_vertices(pq)
            assert mm.map.n_edges == n
            assert mm.map.n_vertices == pq.map.n_vertices - vmax.size
            assert mm.map.n_faces == vmax.size
            assert ab.eps == eps
            # the distance identity: BFS in the image equals the host labels
            assert np.array_equal(mm.l_plus, pq.l_plus[ab.vertex_correspondence])
            # v_star is carried over
            assert pq.l_plus[ab.vertex_correspondence[mm.v_star]] == 0


@settings(max_examples=15, deadline=None)
@given(n=st.integers(5, 60), seed=st.integers(0, 2**32 - 1), eps=st.integers(0, 1))
def test_ab_distance_identity_sampled(n, seed, eps):
    pq = cvs_inverse(sample_uniform_tree(n, seed), eps).quad
    ab = ab_forward(pq)
    assert np.array_equal(ab.pointed_map.l_plus, pq.l_plus[ab.vertex_correspondence])


def test_ab_rejects_unpointed_junk(one_edge_map):
    from maplab import PointedPlaneMap

    with pytest.raises(NotAQuadrangulation):
        ab_forward(PointedPlaneMap(one_edge_map, 0))


# -- geodesics, special edges, the distance functional -----------------------------


def test_leftmost_geodesic_trivial_step():
    pq = cvs_inverse(WellLabeledTree(1, [1, 0], [0, 1]), 0).quad
    lp = pq.l_plus
    vof = pq.map.vertex_of
    al = pq.map.alpha
    for e in range(pq.map.n_darts):
        if lp[vof[al[e]]] == lp[vof[e]] - 1 and lp[vof[al[e]]] == 0:
            g = leftmost_geodesic(pq, e)
            assert g.darts == [e]


def test_leftmost_geodesic_requires_towards(small_instances):
    pq = small_instances[0].quad
    lp = pq.l_plus
    vof = pq.map.vertex_of
    up = next(
        e for e in range(pq.map.n_darts) if lp[vof[pq.map.alpha[e]]] == lp[vof[e]] + 1
    )
    with pytest.raises(NotPointingTowards):
        leftmost_geodesic(pq, up)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_successor_chains_leftmost_and_special_exhaustive(n):
    for tree in enumerate_trees(n):
        for eps in (0, 1):
            img = cvs_inverse(tree, eps)
            pq = img.quad
            ab = ab_forward(pq)
            ta = _tree_arrays(tree)
            s = _fast.successor_array(ta.L[: 2 * n])
            # successor chains are the leftmost geodesics
            for i in range(2 * n):
                assert leftmost_geodesic(pq, 2 * i).darts == successor_chain_darts(s, i)
            # every step of every chain past the first is special
            lp = pq.l_plus
            vof = pq.map.vertex_of
            for e in range(pq.map.n_darts):
                if lp[vof[pq.map.alpha[e]]] != lp[vof[e]] - 1:
                    continue
                chain = leftmost_geodesic(pq, e).darts
                for d in chain[1:]:
                    assert is_special(pq, ab, d) is not None
                for d in chain[1:]:
                    # the returned green dart joins the same two vertices
                    g = is_special(pq, ab, d)
                    mm = ab.pointed_map.map
                    ends_m = {int(mm.vertex_of[g]), int(mm.vertex_of[mm.alpha[g]])}
                    ends_q = {int(ab.vertex_correspondence[v]) for v in ends_m}
                    assert ends_q == {int(vof[d]), int(vof[pq.map.alpha[d]])}


def test_special_count_per_face(small_instances):
    # each simple face has exactly one special boundary dart, confluent none
    for inst in small_instances:
        pq = inst.quad
        ab = ab_forward(pq)
        for k, f in enumerate(faces(pq.map)):
            hits = [d for d in f for _ in [0] if is_special(pq, ab, d) is not None]
            expected = 1 if ab.special_dart_of_face[k] >= 0 else 0
            assert len(hits) == expected


def test_d_circ_examples():
    assert d_circ_formula([0, 1, 0], 0, 0) == 0
    assert d_circ_formula([0, 1, 0], 0, 1) == 1
    with pytest.raises(IndexOutOfRange):
        d_circ_formula([0, 1, 0], 0, 3)


def test_d_circ_same_dart_is_zero(small_instances):
    for inst in small_instances[:6]:
        pq = inst.quad
        assert d_circ_q(pq, 0, 0) == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_d_circ_formula_matches_geometry(n):
    for tree in enumerate_trees(n):
        for eps in (0, 1):
            pq = cvs_inverse(tree, eps).quad
            L = _tree_arrays(tree).L
            for i in range(2 * n + 1):
                for j in range(2 * n + 1):
                    geo = d_circ_q(pq, 2 * (i % (2 * n)), 2 * (j % (2 * n)))
                    assert geo == d_circ_formula(L, i, j)


@settings(max_examples=10, deadline=None)
@given(n=st.integers(4, 25), seed=st.integers(0, 2**32 - 1))
def test_d_circ_upper_bounds_graph_distance(n, seed):
    # the merged chain is a path, so the graph distance never exceeds it
    tree = sample_uniform_tree(n, seed)
    pq = cvs_inverse(tree, 0).quad
    d0 = bfs_distances(pq.map, int(pq.map.vertex_of[0]))
    rng = np.random.default_rng(seed)
    for _ in range(10):
        j = int(rng.integers(0, 2 * n))
        tail_j = int(pq.map.vertex_of[2 * j])
        assert d0[tail_j] <= d_circ_q(pq, 0, 2 * j)


# -- bundles ----------------------------------------------------------------------


def test_bundle_roundtrip(tmp_path):
    tree = sample_uniform_tree(4, 11)
    doc = build_bundle(tree, 1)
    text = bundle_json(doc)
    parsed = json.loads(text)
    t2, eps2 = load_bundle(parsed)
    assert t2 == tree and eps2 == 1
    assert bundle_json(build_bundle(t2, eps2)) == text


def test_golden_bundles_regenerate_bit_exact():
    for path in sorted(DATA.glob("bundle_*.json")):
        doc = json.loads(path.read_text())
        tree, eps = load_bundle(doc)
        assert bundle_json(build_bundle(tree, eps)) == path.read_text()
