"""Figure rendering from the divexp CSV schema.

Two figure kinds are supported:

* sweep_curves: expected divergence vs system size N, one curve per
  concentration value a, with a dashed horizontal asymptote per a at
  h(a) - log(a) - gamma.  The asymptote values are recomputed locally and
  must agree with the ones embedded in the CSV to 1e-9.
* simplex_heatmap: a divergence field on the 2-simplex, drawn as a
  triangle with per-figure min-max shading.

Rendering is deterministic for a fixed input: the bundled style pins the
figure geometry, and no timestamps are written into the output files.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

from .harmonic import sweep_asymptote

ASYMPTOTE_AGREEMENT = 1e-9


class PlotkitError(Exception):
    """Bad input: missing columns, empty selections, inconsistent values."""


@dataclass(frozen=True)
class FigureRecipe:
    """What to render: input CSVs, figure kind, and the output path."""

    inputs: tuple[str, ...]
    kind: str  # "sweep_curves" | "simplex_heatmap"
    out: str


@dataclass(frozen=True)
class RenderResult:
    """Where the figure went plus the numbers that were drawn (used by the
    consistency checks in the tests)."""

    path: str
    kind: str
    asymptotes: dict = field(default_factory=dict)   # a -> value (sweep only)
    vmin: float = 0.0
    vmax: float = 0.0
    n_points: int = 0


def _read_rows(paths: tuple[str, ...]) -> list[dict]:
    rows: list[dict] = []
    for path in paths:
        p = Path(path)
        if not p.exists():
            raise PlotkitError(f"input file not found: {path}")
        with p.open(newline="", encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
        rows.extend(csv.DictReader(lines))
    if not rows:
        raise PlotkitError(f"no data rows in {', '.join(paths)}")
    return rows


def _need(rows: list[dict], cols: tuple[str, ...], kind: str) -> None:
    have = set(rows[0].keys())
    missing = [c for c in cols if c not in have]
    if missing:
        raise PlotkitError(f"missing column(s) {missing} required for kind {kind!r}")


def _parse_a(tag: str, where: str) -> float:
    if not tag.startswith("a="):
        raise PlotkitError(f"{where}: expected a symmetric-prior tag 'a=<x>', got {tag!r}")
    return float(tag[2:])


def _style():
    return resources.files("plotkit").joinpath("style/plotkit.mplstyle")


def _save(fig, out: str) -> None:
    # SVG output embeds a creation date unless told otherwise; keep output
    # byte-identical for identical input.
    metadata = {"Date": None} if str(out).lower().endswith(".svg") else None
    fig.savefig(out, metadata=metadata)


def _render_sweep(rows: list[dict], out: str) -> RenderResult:
    _need(rows, ("quantity", "N", "a_or_alpha", "value"), "sweep_curves")
    data = [r for r in rows if r["quantity"] == "mc_union_divergence"]
    if not data:
        raise PlotkitError("empty selection: no rows with quantity=mc_union_divergence")
    embedded = {}
    for r in rows:
        if r["quantity"] == "asymptote":
            embedded[_parse_a(r["a_or_alpha"], "asymptote row")] = float(r["value"])
    series: dict[float, list[tuple[int, float]]] = {}
    for r in data:
        a = _parse_a(r["a_or_alpha"], "data row")
        series.setdefault(a, []).append((int(r["N"]), float(r["value"])))
    asymptotes = {a: sweep_asymptote(a) for a in series}
    for a, v in embedded.items():
        if a in asymptotes and abs(asymptotes[a] - v) > ASYMPTOTE_AGREEMENT:
            raise PlotkitError(
                f"asymptote mismatch for a={a:g}: file has {v!r}, "
                f"recomputed {asymptotes[a]!r} (tolerance {ASYMPTOTE_AGREEMENT})"
            )
    with plt.style.context(str(_style())):
        fig, ax = plt.subplots()
        for a in sorted(series, reverse=True):
            pts = sorted(series[a])
            ns = [n for n, _v in pts]
            vs = [v for _n, v in pts]
            (line,) = ax.plot(ns, vs, marker="o", label=f"a = {a:g}")
            ax.axhline(asymptotes[a], linestyle="--", linewidth=0.8,
                       color=line.get_color(), alpha=0.7)
        ax.set_xlabel("N")
        ax.set_ylabel("expected divergence")
        ax.legend(loc="best")
        _save(fig, out)
        plt.close(fig)
    return RenderResult(path=out, kind="sweep_curves", asymptotes=asymptotes,
                        n_points=len(data))


def _render_heatmap(rows: list[dict], out: str) -> RenderResult:
    _need(rows, ("quantity", "x1", "x2", "x3", "value"), "simplex_heatmap")
    data = [r for r in rows if r["quantity"] == "field_value"]
    if not data:
        raise PlotkitError("empty selection: no rows with quantity=field_value")
    bary = np.array([[float(r["x1"]), float(r["x2"]), float(r["x3"])] for r in data])
    vals = np.array([float(r["value"]) for r in data])
    # embed the simplex: corner 1 at the origin, corner 2 right, corner 3 top
    x = bary[:, 1] + 0.5 * bary[:, 2]
    y = (math.sqrt(3) / 2.0) * bary[:, 2]
    vmin = float(vals.min())
    vmax = float(vals.max())
    with plt.style.context(str(_style())):
        fig, ax = plt.subplots()
        tri = mtri.Triangulation(x, y)
        shading = ax.tripcolor(tri, vals, shading="gouraud", vmin=vmin, vmax=vmax,
                               cmap="viridis")
        fig.colorbar(shading, ax=ax, shrink=0.85)
        ax.set_aspect("equal")
        ax.set_axis_off()
        _save(fig, out)
        plt.close(fig)
    return RenderResult(path=out, kind="simplex_heatmap", vmin=vmin, vmax=vmax,
                        n_points=len(data))


def render(recipe: FigureRecipe) -> RenderResult:
    """Render one figure per the recipe and return what was drawn."""
    rows = _read_rows(recipe.inputs)
    if recipe.kind == "sweep_curves":
        return _render_sweep(rows, recipe.out)
    if recipe.kind == "simplex_heatmap":
        return _render_heatmap(rows, recipe.out)
    raise PlotkitError(f"unknown figure kind {recipe.kind!r}")
