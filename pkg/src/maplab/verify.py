"""Exhaustive small-size certification of the bijections and their identities.

``certify`` enumerates every well-labeled tree with n edges, both epsilon
bits, pushes each instance through the CVS inverse, the CVS forward map, the
AB construction and the trivial bijection, and checks every identity and
bound the package relies on.  The counting ledgers double as bijectivity
certificates: the CVS images must be pairwise distinct pointed
quadrangulations and the AB images pairwise distinct pointed maps, with
cardinalities matching the closed counting formulas.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from . import _fast
from .bijections import (
    ab_forward,
    build_bundle,
    cvs_forward,
    cvs_inverse,
    d_circ_q,
    is_special,
    leftmost_geodesic,
    successor_chain_darts,
    trivial_map_to_quad,
    trivial_quad_to_map,
    v_max_vertices,
    _tree_arrays,
)
from .core_map import (
    bfs_distances,
    canonical_form,
    max_face_degree,
    pointed_canonical_form,
)
from .errors import BoundExceeded
from .trees import WellLabeledTree, broad_local_maxima, catalan, _dyck_words, tree_from_shape
from itertools import product

CERTIFY_BOUND = 4

REPORT_SCHEMA_VERSION = 1

CHECK_NAMES = [
    "quad_valid",
    "faces_degree_4",
    "l_plus_equals_bfs",
    "cvs_roundtrip",
    "ab_map_valid",
    "ab_vertex_count",
    "ab_face_count",
    "ab_epsilon_matches",
    "distance_identity",
    "label_maxima_match",
    "successor_chains_leftmost",
    "merged_length_formula",
    "geodesic_steps_special",
    "tail_distance_bound",
    "index_distance_bound",
    "green_edge_routes_agree",
    "towards_degree_identity",
    "trivial_roundtrip",
]


@dataclass
class CountingLedger:
    """Exact enumeration counts for one size, against the closed formulas."""

    n: int
    trees: int
    quads_pointed: int
    maps_pointed: int
    maps: int

    def formulas_hold(self) -> bool:
        return (
            self.trees == count_well_labeled_trees(self.n)
            and self.quads_pointed == 2 * count_pointed_maps(self.n)
            and self.maps_pointed == count_pointed_maps(self.n)
            and self.maps == count_rooted_maps(self.n)
        )


def count_well_labeled_trees(n: int) -> int:
    return 3**n * catalan(n)


def count_rooted_maps(n: int) -> int:
    """(2 / (n + 2)) (3^n / (n + 1)) C(2n, n), evaluated exactly over the integers."""
    num = 2 * 3**n * comb(2 * n, n)
    den = (n + 2) * (n + 1)
    if num % den:
        raise ArithmeticError("rooted map count is not an integer")
    return num // den


def count_pointed_maps(n: int) -> int:
    num = 3**n * comb(2 * n, n)
    den = n + 1
    if num % den:
        raise ArithmeticError("pointed map count is not an integer")
    return num // den


@dataclass
class _ShardResult:
    instances: int = 0
    counts: dict = field(default_factory=dict)
    violations: dict = field(default_factory=dict)
    counterexample: tuple | None = None
    pointed_quads: set = field(default_factory=set)
    ab_images: set = field(default_factory=set)
    rooted_quads: dict = field(default_factory=dict)

    def record(self, check: str, bad: bool, tree=None, eps=None) -> None:
        self.counts[check] = self.counts.get(check, 0) + 1
        if bad:
            self.violations[check] = self.violations.get(check, 0) + 1
            if self.counterexample is None:
                self.counterexample = (tree, eps, check)


def _check_instance(tree: WellLabeledTree, eps: int, res: _ShardResult) -> None:
    n = tree.n_edges
    try:
        cvs = cvs_inverse(tree, eps, validate=True)
    except Exception:
        res.record("quad_valid", True, tree, eps)
        return
    pq = cvs.quad
    q = pq.map
    res.record("quad_valid", False)
    res.pointed_quads.add(pointed_canonical_form(q, pq.v_star))
    res.rooted_quads.setdefault(canonical_form(q), (tree, eps))

    res.record("faces_degree_4", max_face_degree(q) != 4 or q.n_faces != n, tree, eps)
    res.record("l_plus_equals_bfs", not np.array_equal(pq.recompute_distances(), pq.l_plus), tree, eps)

    try:
        back = cvs_forward(pq)
        res.record("cvs_roundtrip", back.tree != tree or back.eps != eps, tree, eps)
    except Exception:
        res.record("cvs_roundtrip", True, tree, eps)

    vmax = v_max_vertices(pq)
    try:
        ab = ab_forward(pq, validate=True)
        mm = ab.pointed_map
        res.record("ab_map_valid", mm.map.n_edges != n, tree, eps)
    except Exception:
        res.record("ab_map_valid", True, tree, eps)
        return
    res.ab_images.add(pointed_canonical_form(mm.map, mm.v_star) + bytes([ab.eps]))
    res.record(
        "ab_vertex_count",
        mm.map.n_vertices != q.n_vertices - vmax.size
        or not np.array_equal(np.sort(ab.vertex_correspondence), np.setdiff1d(np.arange(q.n_vertices), vmax)),
        tree,
        eps,
    )
    res.record("ab_face_count", mm.map.n_faces != vmax.size, tree, eps)
    res.record("ab_epsilon_matches", ab.eps != eps, tree, eps)
    res.record(
        "distance_identity",
        not np.array_equal(mm.l_plus, pq.l_plus[ab.vertex_correspondence]),
        tree,
        eps,
    )

    tree_max = {int(cvs.vertex_correspondence[v]) for v in broad_local_maxima(tree)}
    res.record("label_maxima_match", tree_max != set(vmax.tolist()), tree, eps)

    # successor chains, leftmost geodesics, and the distance functional
    ta = _tree_arrays(tree)
    Lc = ta.L[: 2 * n]
    s = _fast.successor_array(Lc)
    lp = pq.l_plus
    vof = q.vertex_of
    al = q.alpha
    bad_chains = False
    for i in range(2 * n):
        if leftmost_geodesic(pq, 2 * i).darts != successor_chain_darts(s, i):
            bad_chains = True
            break
    res.record("successor_chains_leftmost", bad_chains, tree, eps)

    idx = np.arange(2 * n + 1)
    I, J = np.meshgrid(idx, idx, indexing="ij")
    dcirc_formula = _fast.d_circ_batch(ta.L, I.ravel(), J.ravel()).reshape(I.shape)
    bad_formula = False
    for i in range(2 * n + 1):
        for j in range(2 * n + 1):
            if d_circ_q(pq, 2 * (i % (2 * n)), 2 * (j % (2 * n))) != dcirc_formula[i, j]:
                bad_formula = True
                break
        if bad_formula:
            break
    res.record("merged_length_formula", bad_formula, tree, eps)

    towards = [e for e in range(q.n_darts) if lp[vof[al[e]]] == lp[vof[e]] - 1]
    bad_special = False
    for e in towards:
        for d in leftmost_geodesic(pq, e).darts[1:]:
            if is_special(pq, ab, d) is None:
                bad_special = True
                break
        if bad_special:
            break
    res.record("geodesic_steps_special", bad_special, tree, eps)

    delta_m = max_face_degree(mm.map)
    q_to_m = np.full(q.n_vertices, -1, dtype=np.int64)
    q_to_m[ab.vertex_correspondence] = np.arange(mm.map.n_vertices)
    dist_m = {}
    bad_tail = False
    for e in towards:
        src = int(q_to_m[vof[e]])
        if src < 0:
            continue
        if src not in dist_m:
            dist_m[src] = bfs_distances(mm.map, src)
        for e2 in towards:
            dst = int(q_to_m[vof[e2]])
            if dst < 0:
                continue
            if dist_m[src][dst] > d_circ_q(pq, e, e2) + delta_m:
                bad_tail = True
                break
        if bad_tail:
            break
    res.record("tail_distance_bound", bad_tail, tree, eps)

    # bound (7) over all contour index pairs via the tilde vertices
    heads_q = vof[al[2 * (idx % (2 * n))]]
    tilde_m = q_to_m[heads_q]
    bad_index = False
    for i in range(2 * n + 1):
        src = int(tilde_m[i])
        if src not in dist_m:
            dist_m[src] = bfs_distances(mm.map, src)
        if np.any(dist_m[src][tilde_m] > dcirc_formula[i] + delta_m):
            bad_index = True
            break
    res.record("index_distance_bound", bad_index, tree, eps)

    # dual route for the green edges, compared as label multisets across the edge
    ge = _fast.green_edges_tree_space(ta, s)
    lp_tv = np.concatenate([ta.labels - ta.labels.min() + 1, [0]])
    fast_keys = sorted(map(tuple, np.sort(lp_tv[ge], axis=1).tolist()))
    tails_m = mm.map.vertex_of[0::2]
    heads_m = mm.map.vertex_of[1::2]
    slow = np.stack([mm.l_plus[tails_m], mm.l_plus[heads_m]], axis=1)
    slow_keys = sorted(map(tuple, np.sort(slow, axis=1).tolist()))
    res.record("green_edge_routes_agree", fast_keys != slow_keys, tree, eps)

    # the pointed-map degree identity: darts of q pointing towards v_star with
    # head v match the degree of v in the AB image
    counts = np.zeros(q.n_vertices, dtype=np.int64)
    for e in towards:
        counts[vof[al[e]]] += 1
    deg_m = mm.map.degrees()
    res.record(
        "towards_degree_identity",
        not np.array_equal(counts[ab.vertex_correspondence], deg_m),
        tree,
        eps,
    )


def _check_shard(word, n: int) -> _ShardResult:
    res = _ShardResult()
    dyck = np.array(word, dtype=np.int8)
    for incs in product((-1, 0, 1), repeat=n):
        tree = tree_from_shape(dyck, np.array(incs, dtype=np.int64))
        for eps in (0, 1):
            res.instances += 1
            _check_instance(tree, eps, res)
    return res


def certify(
    n: int,
    bound: int = CERTIFY_BOUND,
    threads: int = 1,
    counterexample_path: str | Path | None = None,
) -> dict:
    """Run every exhaustive check over all of T_n x {0,1}; returns the report.

    The report is a deterministic JSON-serializable dict; identical inputs
    produce identical bytes through :func:`report_json` regardless of the
    thread count.
    """
    if n > bound:
        raise BoundExceeded(f"certification requested for n={n} beyond bound {bound}")
    if n < 1:
        raise ValueError("n must be at least 1")
    words = _dyck_words(n)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            shards = list(pool.map(lambda w: _check_shard(w, n), words))
    else:
        shards = [_check_shard(w, n) for w in words]

    merged = _ShardResult()
    for sh in shards:
        merged.instances += sh.instances
        for k, v in sh.counts.items():
            merged.counts[k] = merged.counts.get(k, 0) + v
        for k, v in sh.violations.items():
            merged.violations[k] = merged.violations.get(k, 0) + v
        if merged.counterexample is None:
            merged.counterexample = sh.counterexample
        merged.pointed_quads |= sh.pointed_quads
        merged.ab_images |= sh.ab_images
        for cf, origin in sh.rooted_quads.items():
            merged.rooted_quads.setdefault(cf, origin)

    # trivial bijection roundtrip over every distinct rooted quadrangulation
    trivial_bad = 0
    rooted_maps = set()
    for cf, (tree, eps) in sorted(merged.rooted_quads.items()):
        qmap = cvs_inverse(tree, eps, validate=False).quad.map
        merged.counts["trivial_roundtrip"] = merged.counts.get("trivial_roundtrip", 0) + 1
        try:
            mm = trivial_quad_to_map(qmap)
            rooted_maps.add(canonical_form(mm))
            if canonical_form(trivial_map_to_quad(mm)) != cf:
                trivial_bad += 1
        except Exception:
            trivial_bad += 1
    if trivial_bad:
        merged.violations["trivial_roundtrip"] = trivial_bad

    trees_total = merged.instances // 2
    ledger = CountingLedger(
        n=n,
        trees=trees_total,
        quads_pointed=len(merged.pointed_quads),
        maps_pointed=len(merged.ab_images) // 2,
        maps=len(rooted_maps),
    )
    ledger_ok = (
        ledger.formulas_hold()
        and len(merged.ab_images) == 2 * count_pointed_maps(n)
        and len(merged.rooted_quads) == count_rooted_maps(n)
    )

    checks = [
        {
            "name": name,
            "count": int(merged.counts.get(name, 0)),
            "violations": int(merged.violations.get(name, 0)),
        }
        for name in CHECK_NAMES
    ]
    ok = ledger_ok and all(c["violations"] == 0 for c in checks)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "n": n,
        "instances": merged.instances,
        "ledger": {
            "trees": ledger.trees,
            "trees_formula": count_well_labeled_trees(n),
            "pointed_quads": ledger.quads_pointed,
            "pointed_quads_formula": 2 * count_pointed_maps(n),
            "ab_images": len(merged.ab_images),
            "pointed_maps_formula": count_pointed_maps(n),
            "rooted_quads": len(merged.rooted_quads),
            "rooted_maps": ledger.maps,
            "rooted_maps_formula": count_rooted_maps(n),
        },
        "checks": checks,
        "pass": bool(ok),
    }
    if not ok and merged.counterexample is not None and counterexample_path is not None:
        tree, eps, check = merged.counterexample
        path = Path(counterexample_path)
        try:
            doc = build_bundle(tree, eps)
        except Exception:
            doc = {
                "schema": "maplab-bundle-v1",
                "n": tree.n_edges,
                "eps": int(eps),
                "tree": {
                    "dyck": "".join(str(int(b)) for b in tree.dyck),
                    "labels": [int(x) for x in tree.labels],
                },
            }
        doc["failed_check"] = check
        path.write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
        report["counterexample"] = str(path)
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"
