"""CSV-to-image rendering for the harness output schema."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .specs import FigureSpec

__all__ = ["RenderError", "RenderResult", "load_columns", "render"]

# fixed styling so identical inputs give identical bytes
_RC = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 130,
    "savefig.dpi": 130,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "legend.framealpha": 0.9,
}


class RenderError(RuntimeError):
    """Bad or incomplete input data for a figure."""


@dataclass(frozen=True)
class RenderResult:
    figure_id: str
    path: Path
    semilog_y: bool
    series_labels: tuple
    reference_labels: tuple
    n_rows: int


def load_columns(path: Path) -> dict:
    if not path.exists():
        raise RenderError(f"input CSV {path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise RenderError(f"input CSV {path} has no header row")
        rows = list(reader)
    if not rows:
        raise RenderError(f"input CSV {path} has a header but no data rows")
    return {name: [row[name] for row in rows] for name in reader.fieldnames}


def _numeric(columns: dict, name: str, path: Path) -> np.ndarray:
    if name not in columns:
        raise RenderError(f"{path} has no column {name!r}")
    return np.array([float(v) for v in columns[name]])


def render(spec: FigureSpec, in_dir, out_dir=None, fmt: str = "png") -> RenderResult:
    """Render one figure from a run directory; returns what was drawn.

    The image lands next to the CSVs unless out_dir redirects it.  Raises
    RenderError for a missing/empty CSV or a missing column; no partial image
    file is left behind in that case.
    """
    in_dir = Path(in_dir)
    out_dir = in_dir if out_dir is None else Path(out_dir)
    csv_path = in_dir / spec.csv_name
    columns = load_columns(csv_path)
    x = _numeric(columns, spec.x_column, csv_path)

    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{spec.figure_id}.{fmt}"

    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            for series in spec.series:
                y = _numeric(columns, series.column, csv_path)
                if spec.stems:
                    ax.plot(x, y, marker="o", markersize=3.5, linewidth=0.8,
                            label=series.label, **series.style)
                else:
                    ax.plot(x, y, label=series.label, **series.style)
                    if series.err_column is not None:
                        err = _numeric(columns, series.err_column, csv_path)
                        color = series.style.get("color")
                        ax.fill_between(x, y - err, y + err, alpha=0.25, color=color,
                                        linewidth=0)
            for ref in spec.references:
                y = _numeric(columns, ref.column, csv_path)
                ax.plot(x, y, label=ref.label, **ref.style)
            if spec.semilog_y:
                ax.set_yscale("log")
            ax.set_xlabel(spec.xlabel)
            ax.set_ylabel(spec.ylabel)
            ax.legend(loc="best")
            fig.tight_layout()
            fig.savefig(out_path)
        finally:
            plt.close(fig)

    return RenderResult(
        figure_id=spec.figure_id,
        path=out_path,
        semilog_y=spec.semilog_y,
        series_labels=tuple(s.label for s in spec.series),
        reference_labels=tuple(r.label for r in spec.references),
        n_rows=len(x),
    )
