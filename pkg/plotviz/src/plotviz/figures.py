"""Four figure kinds over the simulator's CSV/JSON outputs.

heatmap    phase-diagram or scalar maps on a (mu, omega) grid, optional
           boundary polyline overlay
correlator stem plot of the connected sy correlator with error bars
trace      photon-number time trace with optional horizontal levels
gapcurve   relaxation gap vs drive per system size, optional toy-model points

Everything is deterministic for fixed inputs (fixed canvas, no timestamps),
so re-rendering a figure is byte-idempotent.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from typing import Optional

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import SchemaError, read_columns, read_stats_json  # noqa: E402

__all__ = [
    "FigureSpec",
    "render",
    "render_heatmap",
    "render_correlator",
    "render_trace",
    "render_gapcurve",
]

FIGSIZE = (6.0, 4.5)
DPI = 150

PHASE_COLORS = {
    "U1": "#f2f2f2",
    "U2": "#ffd27f",
    "U1_U2": "#4c72b0",
    "AF": "#c44e52",
    "U1_AF": "#55a868",
    "LC": "#8172b2",
    "U1_LC": "#937860",
    "F_AF": "#dd8452",
    "UNCLASSIFIED": "#000000",
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str                        # heatmap | correlator | trace | gapcurve
    inputs: dict                     # named input paths
    output: str                      # image path
    options: dict                    # axis ranges, columns, overlays


def render(spec: FigureSpec) -> str:
    fn = {
        "heatmap": render_heatmap,
        "correlator": render_correlator,
        "trace": render_trace,
        "gapcurve": render_gapcurve,
    }.get(spec.kind)
    if fn is None:
        raise SchemaError(f"unknown figure kind {spec.kind!r}")
    return fn(spec)


def _new_axes():
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    return fig, ax


def _save(fig, path) -> str:
    fig.savefig(path, format=None if "." in path.rsplit("/", 1)[-1] else "png")
    plt.close(fig)
    return path


def _grid_from_rows(x, y, v):
    xs = np.unique(x)
    ys = np.unique(y)
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = {val: k for k, val in enumerate(xs)}
    yi = {val: k for k, val in enumerate(ys)}
    for a, b, val in zip(x, y, v):
        grid[yi[b], xi[a]] = val
    return xs, ys, grid


def render_heatmap(spec: FigureSpec) -> str:
    opts = spec.options
    value_col = opts.get("value_column", "phase_label")
    categorical = bool(opts.get("categorical", value_col == "phase_label"))
    required = ["mu_over_gamma", "omega_over_gamma", value_col]
    numeric = required if not categorical else required[:2]
    data = read_columns(spec.inputs["table"], required, numeric=numeric)
    x, y = data["mu_over_gamma"], data["omega_over_gamma"]
    fig, ax = _new_axes()
    if categorical:
        labels = sorted(set(data[value_col]))
        coding = {lab: k for k, lab in enumerate(labels)}
        values = np.array([coding[v] for v in data[value_col]], dtype=float)
        xs, ys, grid = _grid_from_rows(x, y, values)
        colors = [PHASE_COLORS.get(lab, "#777777") for lab in labels]
        cmap = matplotlib.colors.ListedColormap(colors)
        mesh = ax.pcolormesh(xs, ys, grid, cmap=cmap, shading="nearest",
                             vmin=-0.5, vmax=len(labels) - 0.5)
        bar = fig.colorbar(mesh, ax=ax, ticks=range(len(labels)))
        bar.ax.set_yticklabels(labels)
    else:
        values = data[value_col]
        xs, ys, grid = _grid_from_rows(x, y, values)
        log = bool(opts.get("log_scale", False))
        norm = matplotlib.colors.LogNorm() if log else None
        mesh = ax.pcolormesh(xs, ys, grid, cmap=opts.get("cmap", "viridis"),
                             shading="nearest", norm=norm)
        fig.colorbar(mesh, ax=ax, label=value_col)
    boundary = spec.inputs.get("boundary")
    if boundary:
        lines = read_columns(boundary, ["x", "y"], numeric=["x", "y"])
        seg = np.array(lines.get("segment", ["0"] * len(lines["x"])))
        for s in np.unique(seg):
            m = seg == s
            ax.plot(lines["x"][m], lines["y"][m], "k-", lw=1.2)
    ax.set_xlabel("detuning / loss rate")
    ax.set_ylabel("drive / loss rate")
    _apply_ranges(ax, opts)
    return _save(fig, spec.output)


def render_correlator(spec: FigureSpec) -> str:
    stats = read_stats_json(spec.inputs["stats"])
    corr = np.asarray(stats["sigma_y_corr"], dtype=float)
    err = np.asarray(stats["stderr"], dtype=float)
    seps = np.arange(len(corr))
    fig, ax = _new_axes()
    markerline, stemlines, baseline = ax.stem(seps, corr)
    plt.setp(markerline, markersize=5)
    ax.errorbar(seps, corr, yerr=err, fmt="none", ecolor="black", capsize=3)
    ax.axhline(0.0, color="grey", lw=0.8)
    ax.set_xlabel("separation (sites)")
    ax.set_ylabel("connected sy correlator")
    _apply_ranges(ax, spec.options)
    return _save(fig, spec.output)


def render_trace(spec: FigureSpec) -> str:
    data = read_columns(spec.inputs["trajectory"], ["t", "N"])
    fig, ax = _new_axes()
    ax.plot(data["t"], data["N"], lw=0.8)
    for level in spec.options.get("levels", []):
        ax.axhline(float(level), color="k", ls="--", lw=1.0)
    ax.set_xlabel("time (1/loss rate)")
    ax.set_ylabel("total photon number")
    _apply_ranges(ax, spec.options)
    return _save(fig, spec.output)


def render_gapcurve(spec: FigureSpec) -> str:
    data = read_columns(spec.inputs["gaps"],
                        ["omega_over_gamma", "gap_over_gamma", "n_sites"])
    fig, ax = _new_axes()
    sizes = np.unique(data["n_sites"])
    for n in sizes:
        m = data["n_sites"] == n
        order = np.argsort(data["omega_over_gamma"][m])
        ax.plot(data["omega_over_gamma"][m][order],
                data["gap_over_gamma"][m][order], "-", label=f"N = {int(n)}")
    toy = spec.inputs.get("toy")
    if toy:
        pts = read_columns(toy, ["omega_over_gamma", "gamma_toy", "stderr"])
        ax.errorbar(pts["omega_over_gamma"], pts["gamma_toy"],
                    yerr=pts["stderr"], fmt="o", ms=4, capsize=3,
                    label="two-state model")
    if spec.options.get("log_scale", True):
        ax.set_yscale("log")
    ax.set_xlabel("drive / loss rate")
    ax.set_ylabel("relaxation gap / loss rate")
    ax.legend()
    _apply_ranges(ax, spec.options)
    return _save(fig, spec.output)


def _apply_ranges(ax, opts):
    if opts.get("x_range"):
        ax.set_xlim(*opts["x_range"])
    if opts.get("y_range"):
        ax.set_ylim(*opts["y_range"])


# ---------------------------------------------------------------------------
# one thin CLI per figure kind
# ---------------------------------------------------------------------------

def _base_parser(desc):
    parser = argparse.ArgumentParser(description=desc)
    parser.add_argument("--output", required=True, help="image file to write")
    parser.add_argument("--x-range", type=float, nargs=2, default=None)
    parser.add_argument("--y-range", type=float, nargs=2, default=None)
    return parser


def main_heatmap(argv=None) -> int:
    parser = _base_parser("grid heatmap from a sweep/gap/correlation CSV")
    parser.add_argument("--table", required=True)
    parser.add_argument("--value-column", default="phase_label")
    parser.add_argument("--categorical", action="store_true")
    parser.add_argument("--numeric", action="store_true",
                        help="force a numeric color scale")
    parser.add_argument("--log-scale", action="store_true")
    parser.add_argument("--cmap", default="viridis")
    parser.add_argument("--boundary", default=None,
                        help="polyline CSV (x, y[, segment]) overlay")
    args = parser.parse_args(argv)
    categorical = args.value_column == "phase_label"
    if args.categorical:
        categorical = True
    if args.numeric:
        categorical = False
    inputs = {"table": args.table}
    if args.boundary:
        inputs["boundary"] = args.boundary
    return _run(FigureSpec(
        kind="heatmap", inputs=inputs, output=args.output,
        options={"value_column": args.value_column, "categorical": categorical,
                 "log_scale": args.log_scale, "cmap": args.cmap,
                 "x_range": args.x_range, "y_range": args.y_range}))


def main_correlator(argv=None) -> int:
    parser = _base_parser("stem plot of the connected sy correlator")
    parser.add_argument("--stats", required=True, help="stats JSON")
    args = parser.parse_args(argv)
    return _run(FigureSpec(
        kind="correlator", inputs={"stats": args.stats}, output=args.output,
        options={"x_range": args.x_range, "y_range": args.y_range}))


def main_trace(argv=None) -> int:
    parser = _base_parser("photon-number time trace")
    parser.add_argument("--trajectory", required=True, help="trajectory CSV")
    parser.add_argument("--level", type=float, action="append", default=[],
                        help="horizontal reference level (repeatable)")
    args = parser.parse_args(argv)
    return _run(FigureSpec(
        kind="trace", inputs={"trajectory": args.trajectory},
        output=args.output,
        options={"levels": args.level, "x_range": args.x_range,
                 "y_range": args.y_range}))


def main_gapcurve(argv=None) -> int:
    parser = _base_parser("relaxation gap vs drive, per system size")
    parser.add_argument("--gaps", required=True, help="gap CSV")
    parser.add_argument("--toy", default=None,
                        help="two-state model CSV (omega_over_gamma, gamma_toy, stderr)")
    parser.add_argument("--linear", action="store_true")
    args = parser.parse_args(argv)
    inputs = {"gaps": args.gaps}
    if args.toy:
        inputs["toy"] = args.toy
    return _run(FigureSpec(
        kind="gapcurve", inputs=inputs, output=args.output,
        options={"log_scale": not args.linear, "x_range": args.x_range,
                 "y_range": args.y_range}))


def _run(spec: FigureSpec) -> int:
    try:
        render(spec)
    except (SchemaError, FileNotFoundError) as err:
        import sys
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0
