"""SVG figures and gnuplot scripts for each figure group of a sweep.

Figures are built only from the per-run CSV files, so regenerating them from
unchanged CSVs gives identical bytes.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .sweep import BIS_BAND, RunManifest, run_name, sha256_file

log = logging.getLogger(__name__)

STATE_LABELS = ("y1 blood (mg)", "y2 muscle (mg)", "y3 fat (mg)", "y4 effect site (mg/l)")


class PlotError(RuntimeError):
    pass


def _read_run(out: Path, record) -> np.ndarray:
    name = run_name(record.psi, record.alpha)
    if record.csv is None:
        raise PlotError(f"run {name} has no CSV (status: {record.status})")
    path = out / record.csv
    if not path.exists():
        raise PlotError(f"missing CSV for run {name}: {path}")
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def _svg(path: Path, title: str, curves: list) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "fracpkpd", "svg.fonttype": "path"}):
        fig = plt.figure(figsize=(10, 10))
        grid = fig.add_gridspec(3, 2)
        for c in range(4):
            ax = fig.add_subplot(grid[c // 2, c % 2])
            for label, data in curves:
                ax.plot(data[:, 0], data[:, 1 + c], label=label)
            ax.set_xlabel("t (min)")
            ax.set_ylabel(STATE_LABELS[c])
        ax = fig.add_subplot(grid[2, :])
        for label, data in curves:
            ax.plot(data[:, 0], data[:, 5], label=label)
        for level in BIS_BAND:
            ax.axhline(level, color="0.4", linestyle="--", linewidth=0.8)
        ax.set_xlabel("t (min)")
        ax.set_ylabel("BIS")
        ax.set_ylim(0, 100)
        ax.legend(fontsize="small")
        fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)


def _gnuplot(path: Path, svg_name: str, title: str, runs: list) -> None:
    lines = [
        f"# {title}",
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set terminal svg size 1000,1000",
        f"set output '{svg_name}'",
        "set multiplot layout 3,2",
        "set xlabel 't (min)'",
    ]
    for c, label in enumerate(STATE_LABELS):
        plots = ", ".join(f"'{csv}' using 1:{c + 2} with lines title '{lab}'" for lab, csv in runs)
        lines += [f"set ylabel '{label}'", f"plot {plots}"]
    plots = ", ".join(f"'{csv}' using 1:6 with lines title '{lab}'" for lab, csv in runs)
    lo, hi = BIS_BAND
    lines += [
        "set ylabel 'BIS'",
        "set yrange [0:100]",
        f"plot {plots}, {lo:g} with lines dt 2 lc rgb 'gray' title '', {hi:g} with lines dt 2 lc rgb 'gray' title ''",
        "unset multiplot",
    ]
    path.write_text("\n".join(lines) + "\n")


def emit_plots(manifest: RunManifest, out_dir=None, formats=("svg", "gnuplot")) -> list:
    """Write one SVG (and/or gnuplot script) per figure group; returns file records."""
    out = Path(out_dir) if out_dir is not None else Path(manifest.out_dir)
    if not manifest.runs:
        log.warning("empty manifest: no plots written")
        return []
    by_name = {run_name(r.psi, r.alpha): r for r in manifest.runs}
    written = []
    for group in manifest.groups:
        records = [by_name[n] for n in group["runs"] if n in by_name]
        curves = [(f"psi={r.psi}, alpha={r.alpha:g}", _read_run(out, r)) for r in records]
        title = f"group {group['name']}"
        svg_name = f"fig_{group['name']}.svg"
        if "svg" in formats:
            _svg(out / svg_name, title, curves)
            written.append(svg_name)
        if "gnuplot" in formats:
            gp_name = f"fig_{group['name']}.gp"
            _gnuplot(out / gp_name, svg_name, title, [(lab, r.csv) for (lab, _), r in zip(curves, records)])
            written.append(gp_name)
    return [{"file": name, "sha256": sha256_file(out / name)} for name in written]
