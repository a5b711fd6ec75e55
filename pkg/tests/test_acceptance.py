"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Tolerances are pinned here and nowhere else.  The statistical criteria use
fixed seeds, so every run is deterministic; sample sizes are chosen so that a
true identity fails with probability well below 1e-3.
"""

import time

import numpy as np
import pytest

from maplab import _fast
from maplab import experiments as exps
from maplab.bijections import cvs_forward, cvs_inverse
from maplab.trees import enumerate_trees, sample_shape_and_increments
from maplab.verify import (
    certify,
    count_pointed_maps,
    count_rooted_maps,
    count_well_labeled_trees,
)

SEED = 20240901


def _line(name: str, ok: bool, detail: str = "") -> None:
    print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def certified():
    t0 = time.perf_counter()
    reports = {n: certify(n) for n in (1, 2, 3, 4)}
    reports["runtime"] = time.perf_counter() - t0
    return reports


@pytest.fixture(scope="module")
def isometry_run():
    # >= 1e6 sampled index pairs across the three sizes
    return exps.isometry_experiment(
        (10**3, 10**4, 10**5),
        reps=40,
        pairs_per_rep=10_000,
        seed=SEED,
        allow_large=False,
    )


def _draw(n, rng):
    dy, inc = sample_shape_and_increments(n, 1, rng)
    return _fast.decode_tree(dy[0], inc[0]), int(rng.integers(0, 2))


def test_counting_ledgers(certified):
    ok = True
    for n in (1, 2, 3, 4):
        rep = certified[n]
        led = rep["ledger"]
        ok &= rep["pass"]
        ok &= led["trees"] == count_well_labeled_trees(n)
        ok &= led["pointed_quads"] == 2 * led["trees"]
        ok &= led["ab_images"] == led["pointed_quads"] == 2 * count_pointed_maps(n)
        ok &= led["rooted_maps"] == count_rooted_maps(n)
    ok &= certified["runtime"] < 60.0
    _line(
        "counting ledgers (n <= 4, exact, < 1 min)",
        bool(ok),
        f"runtime {certified['runtime']:.1f}s",
    )


def test_cvs_roundtrip_exhaustive_and_sampled():
    failures = 0
    total = 0
    for n in range(1, 6):
        for tree in enumerate_trees(n):
            for eps in (0, 1):
                total += 1
                back = cvs_forward(cvs_inverse(tree, eps, validate=False).quad)
                failures += not (back.tree == tree and back.eps == eps)
    rng = np.random.default_rng(SEED)
    from maplab.trees import WellLabeledTree

    for _ in range(10_000):
        ta, eps = _draw(1000, rng)
        tree = WellLabeledTree(1000, ta.dyck, ta.labels, validate=False)
        total += 1
        back = cvs_forward(cvs_inverse(tree, eps, validate=False).quad)
        failures += not (back.tree == tree and back.eps == eps)
    _line(
        "CVS roundtrip (exhaustive n <= 5 and 1e4 samples at n = 1e3, zero failures)",
        failures == 0,
        f"{total} instances",
    )


def test_distance_identity(certified):
    ok = all(
        next(c for c in certified[n]["checks"] if c["name"] == "distance_identity")["violations"] == 0
        for n in (1, 2, 3, 4)
    )
    rng = np.random.default_rng(SEED + 1)
    n = 10**4
    bad = 0
    for _ in range(1000):
        ta, _ = _draw(n, rng)
        s = _fast.successor_array(ta.L[: 2 * n])
        ge = _fast.green_edges_tree_space(ta, s)
        indptr, indices = _fast.csr_from_edges(ge[:, 0], ge[:, 1], n + 2)
        dist = _fast.bfs(indptr, indices, n + 1, n + 2)
        lp = np.concatenate([ta.labels - ta.labels.min() + 1, [0]])
        present = dist >= 0
        bad += not np.array_equal(dist[present], lp[present])
    _line(
        "distance identity d_m(v, v*) = l_plus(v) (enumerated n <= 4 and 1e3 samples at n = 1e4)",
        bool(ok) and bad == 0,
        "every vertex checked",
    )


def test_special_chains_and_distance_functional(certified):
    names = ("geodesic_steps_special", "successor_chains_leftmost", "merged_length_formula")
    ok = all(
        next(c for c in certified[n]["checks"] if c["name"] == name)["violations"] == 0
        for n in (1, 2, 3, 4)
        for name in names
    )
    _line(
        "special chains and successor geodesics; functional equals merged length (n <= 4, exact)",
        bool(ok),
    )


def test_chain_and_index_bounds(isometry_run):
    s = isometry_run.summary
    pairs = s["total_pairs"]
    index_viol = sum(p["index_bound_violations"] for p in s["per_n"])
    tail_pairs = sum(p["tail_bound_pairs"] for p in s["per_n"])
    tail_viol = sum(p["tail_bound_violations"] for p in s["per_n"])
    g_pairs = sum(p["geodesic_route_pairs"] for p in s["per_n"])
    route_viol = sum(p["geodesic_route_violations"] for p in s["per_n"])
    ok = pairs >= 10**6 and index_viol == 0 and tail_viol == 0 and route_viol == 0
    _line(
        "chain bound and index bound, zero violations over >= 1e6 pairs at n in {1e3, 1e4, 1e5}",
        bool(ok),
        f"{pairs} index pairs, {tail_pairs} tail pairs, {g_pairs} geodesic-route checks",
    )


def test_label_maxima_match(certified):
    ok = all(
        next(c for c in certified[n]["checks"] if c["name"] == "label_maxima_match")["violations"] == 0
        for n in (1, 2, 3, 4)
    )
    rng = np.random.default_rng(SEED + 2)
    n = 10**4
    bad = 0
    for _ in range(1000):
        ta, _ = _draw(n, rng)
        s = _fast.successor_array(ta.L[: 2 * n])
        tree_mask = _fast.tree_local_maxima_mask(ta)
        finite = s >= 0
        t = s[finite] % (2 * n)
        heads = ta.contour_vertex[t]
        # every arc must point one step down; then "no incoming arc" is exactly
        # "every neighbor is closer"
        Lc = ta.L[: 2 * n]
        bad += not np.all(Lc[t] == Lc[finite] - 1)
        has_in = np.zeros(n + 2, dtype=bool)
        has_in[heads] = True
        has_in[n + 1] = True
        q_mask = ~has_in[: n + 1]
        bad += not np.array_equal(q_mask, tree_mask)
    _line(
        "label maxima = non-map vertices (enumerated n <= 4 and 1e3 samples at n = 1e4, exact)",
        bool(ok) and bad == 0,
    )


def test_vertex_count_moments():
    rep = exps.moments_experiment(10**3, 10**4, seed=SEED + 3)
    s = rep.summary
    ok1 = abs(s["mean_vertices"] - 501.0) <= 4 * s["se_vertices"]
    rep2 = exps.moments_experiment(10**4, 10**3, seed=SEED + 4)
    ratio = rep2.summary["second_moment_ratio"]
    ok2 = abs(ratio - 1.0) <= 0.02
    _line(
        "vertex-count moments: mean within 4 se of 501; second moment within 2% of 1",
        ok1 and ok2,
        f"mean {s['mean_vertices']:.2f} (se {s['se_vertices']:.3f}), ratio {ratio:.4f}",
    )


def test_total_variation_proxy():
    rep = exps.tv_experiment((10**2, 10**3, 10**4), reps=3000, seed=SEED + 5)
    ests = [e["estimate"] for e in rep.summary["estimates"]]
    ok = rep.summary["strictly_decreasing"]
    # exact value at n = 1 by enumeration: the two rooted maps have 1 and 2 vertices
    from maplab import trivial_quad_to_map
    from maplab.core_map import canonical_form
    from maplab.trees import enumerate_trees as enum

    sizes = {}
    for tree in enum(1):
        for eps in (0, 1):
            mm = trivial_quad_to_map(cvs_inverse(tree, eps).quad.map)
            sizes[canonical_form(mm)] = mm.n_vertices
    exact = sum(abs(2 * v / 3 - 1) for v in sizes.values()) / len(sizes)
    ok &= abs(exact - 1 / 3) < 1e-12
    _line(
        "total-variation proxy strictly decreasing on {1e2, 1e3, 1e4}; exact 1/3 at n = 1",
        bool(ok),
        f"estimates {[round(e, 5) for e in ests]}",
    )


def test_reroot_identity():
    rep = exps.reroot_experiment(10**3, 10**5, seed=SEED + 6)
    s = rep.summary
    ok = s["identity_holds"] and s["control_detected_bias"]
    _line(
        "re-rooting identity: KS at level 1e-3 over 1e5 replications; biased control fails",
        bool(ok),
        f"ks {s['ks_statistic']:.5f} < {s['ks_critical']:.5f}; control {s['control_ks_statistic']:.5f}",
    )


def test_asymptotic_isometry_proxy(isometry_run):
    s = isometry_run.summary
    defects = [p["mean_scaled_defect"] for p in s["per_n"]]
    _line(
        "mean rescaled distance defect decreasing across {1e3, 1e4, 1e5}",
        s["defect_decreasing"],
        f"defects {[round(d, 4) for d in defects]}",
    )


def test_reproducibility():
    a = exps.reroot_experiment(200, 500, seed=SEED + 7, threads=1)
    b = exps.reroot_experiment(200, 500, seed=SEED + 7, threads=4)
    ok = a.csv_text() == b.csv_text() and a.json_text() == b.json_text()
    c = exps.isometry_experiment((500,), 4, 100, seed=SEED + 8, threads=1)
    d = exps.isometry_experiment((500,), 4, 100, seed=SEED + 8, threads=3)
    ok &= c.csv_text() == d.csv_text() and c.json_text() == d.json_text()
    e = exps.delta_experiment((300,), 20, seed=SEED + 9, threads=2)
    f = exps.delta_experiment((300,), 20, seed=SEED + 9, threads=1)
    ok &= e.csv_text() == f.csv_text()
    _line("byte-identical outputs for fixed seed, any thread count", bool(ok))
