"""Figure builders over the documented maplab experiment CSV schemas.

Rendering displays columns exactly as stored: no statistic is recomputed
here.  Every rendered series is checksummed over the plotted values so tests
can verify that what ended up on the canvas is the CSV data and nothing else.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class SchemaMismatch(Exception):
    """The CSV header does not match the documented schema for the figure kind."""


class MissingColumn(SchemaMismatch):
    """A required column is absent."""


# documented headers of the experiment CSV kinds
SCHEMAS = {
    "moments": ["n", "rep", "n_vertices"],
    "tv": ["n", "rep", "tv_term"],
    "two_point": [
        "rep", "contour_index", "d_q_vi_vstar", "d_m_vtilde_vstar", "scaled_d_q", "scaled_d_m",
    ],
    "isometry": [
        "n", "rep", "source_index", "pairs", "mean_scaled_defect", "max_scaled_defect",
        "delta_n", "index_bound_violations", "tail_bound_pairs", "tail_bound_violations",
        "geodesic_route_pairs", "geodesic_route_violations",
    ],
    "delta": ["n", "rep", "arm", "delta_or_face", "exceeds_or_vertex"],
    "reroot": ["rep", "d_v1_v2", "d_vstar_v1", "d_vstar_vtilde"],
    "nj": ["n", "rep", "sup_deviation", "final_ratio"],
}

KINDS = tuple(SCHEMAS)


@dataclass
class FigureSpec:
    """What to draw: input CSVs, figure kind, output path, axis scales."""

    inputs: list[str]
    kind: str
    out: str
    logx: bool = False
    logy: bool = False

    @classmethod
    def from_json(cls, path: str | Path) -> "FigureSpec":
        doc = json.loads(Path(path).read_text())
        return cls(
            inputs=list(doc["inputs"]),
            kind=doc["kind"],
            out=doc["out"],
            logx=bool(doc.get("logx", False)),
            logy=bool(doc.get("logy", False)),
        )


def read_table(path: str | Path, kind: str) -> dict[str, list[str]]:
    """Parse one CSV and check its header against the kind's documented schema."""
    if kind not in SCHEMAS:
        raise SchemaMismatch(f"unknown figure kind {kind!r}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty CSV") from None
        rows = list(reader)
    expected = SCHEMAS[kind]
    for col in expected:
        if col not in header:
            raise MissingColumn(f"{path}: column {col!r} missing (header {header})")
    if header != expected:
        raise SchemaMismatch(f"{path}: header {header} != documented {expected}")
    if not rows:
        raise SchemaMismatch(f"{path}: no data rows")
    cols = {name: [row[i] for row in rows] for i, name in enumerate(header)}
    return cols


def series_checksum(values) -> str:
    """Checksum of a plotted series, over the exact plotted values in order."""
    h = hashlib.sha256()
    for v in values:
        h.update(format(float(v), ".12g").encode())
        h.update(b",")
    return h.hexdigest()


def _floats(cols: dict, name: str) -> np.ndarray:
    return np.array([float(x) for x in cols[name]], dtype=np.float64)


def render(spec: FigureSpec) -> dict:
    """Draw the figure for the spec; returns a manifest with series checksums.

    One figure kind per experiment type; the manifest records, for every
    plotted series, the checksum of the values handed to the canvas.
    """
    builders = {
        "moments": _render_moments,
        "tv": _render_scatter_by_n("tv_term", "total-variation term"),
        "isometry": _render_scatter_by_n("mean_scaled_defect", "mean rescaled defect"),
        "delta": _render_delta,
        "nj": _render_scatter_by_n("sup_deviation", "sup deviation of 2N/n"),
        "two_point": _render_two_point,
        "reroot": _render_reroot,
    }
    if spec.kind not in builders:
        raise SchemaMismatch(f"unknown figure kind {spec.kind!r}")
    tables = [read_table(p, spec.kind) for p in spec.inputs]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    checksums = builders[spec.kind](ax, tables, spec)
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")
    ax.set_title(f"maplab {spec.kind}")
    fig.tight_layout()
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return {
        "kind": spec.kind,
        "out": str(out),
        "inputs": list(spec.inputs),
        "series_checksums": checksums,
    }


def _render_scatter_by_n(column: str, label: str):
    def build(ax, tables, spec) -> dict:
        checks = {}
        for path, cols in zip(spec.inputs, tables):
            x = _floats(cols, "n")
            y = _floats(cols, column)
            ax.plot(x, y, ".", alpha=0.45, markersize=4, label=Path(path).stem)
            checks[f"{path}:n"] = series_checksum(x)
            checks[f"{path}:{column}"] = series_checksum(y)
        ax.set_xlabel("n")
        ax.set_ylabel(label)
        if len(spec.inputs) > 1:
            ax.legend(fontsize=8)
        return checks

    return build


def _render_moments(ax, tables, spec) -> dict:
    checks = {}
    for path, cols in zip(spec.inputs, tables):
        v = _floats(cols, "n_vertices")
        ax.hist(v, bins=40, alpha=0.6, label=Path(path).stem)
        checks[f"{path}:n_vertices"] = series_checksum(v)
    ax.set_xlabel("vertex count of the rooted map")
    ax.set_ylabel("replications")
    return checks


def _render_delta(ax, tables, spec) -> dict:
    checks = {}
    for path, cols in zip(spec.inputs, tables):
        pointed = [i for i, a in enumerate(cols["arm"]) if a == "pointed"]
        x = np.array([float(cols["n"][i]) for i in pointed])
        y = np.array([float(cols["delta_or_face"][i]) for i in pointed])
        ax.plot(x, y, ".", alpha=0.45, markersize=4, label=Path(path).stem)
        checks[f"{path}:n"] = series_checksum(x)
        checks[f"{path}:delta_or_face"] = series_checksum(y)
    ax.set_xlabel("n")
    ax.set_ylabel("largest face degree (pointed arm)")
    return checks


def _render_two_point(ax, tables, spec) -> dict:
    # overlaid empirical CDFs of the two rescaled distance samples
    checks = {}
    for path, cols in zip(spec.inputs, tables):
        for column, style in (("scaled_d_q", "-"), ("scaled_d_m", "--")):
            v = np.sort(_floats(cols, column))
            ecdf = np.arange(1, v.size + 1) / v.size
            ax.step(v, ecdf, style, where="post", label=f"{Path(path).stem}:{column}")
            checks[f"{path}:{column}"] = series_checksum(v)
    ax.set_xlabel("rescaled distance to the distinguished vertex")
    ax.set_ylabel("empirical CDF")
    ax.legend(fontsize=8)
    return checks


def _render_reroot(ax, tables, spec) -> dict:
    # quantile-quantile plot of the two distance samples, expected on the diagonal
    checks = {}
    for path, cols in zip(spec.inputs, tables):
        a = np.sort(_floats(cols, "d_v1_v2"))
        b = np.sort(_floats(cols, "d_vstar_v1"))
        ax.plot(a, b, ".", markersize=4, alpha=0.6, label=Path(path).stem)
        checks[f"{path}:d_v1_v2_sorted"] = series_checksum(a)
        checks[f"{path}:d_vstar_v1_sorted"] = series_checksum(b)
        lim = max(a.max(), b.max())
        ax.plot([0, lim], [0, lim], "k-", linewidth=0.8)
    ax.set_xlabel("d(V1, V2) quantiles")
    ax.set_ylabel("d(v*, V1) quantiles")
    return checks
