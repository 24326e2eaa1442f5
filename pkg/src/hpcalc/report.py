"""JSON report and CSV sweep writers; each CSV can get a PNG plot beside it."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["to_jsonable", "write_json", "write_csv", "plot_csv"]


def to_jsonable(v):
    """Recursively convert numpy scalars/arrays, complex numbers and infinities."""
    if hasattr(v, "to_json"):
        return to_jsonable(v.to_json())
    if isinstance(v, dict):
        return {str(k): to_jsonable(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [to_jsonable(u) for u in v]
    if isinstance(v, np.ndarray):
        if np.iscomplexobj(v):
            return to_jsonable(np.stack([v.real, v.imag], axis=-1))
        return to_jsonable(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [to_jsonable(float(v.real)), to_jsonable(float(v.imag))]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return None
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")
    return v


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), indent=2) + "\n")
    return path


def write_csv(path, header, rows, plot=True, x=None, y=None, title=None, logx=False, logy=False):
    """Write ``rows`` under ``header``; with ``plot`` also render ``<stem>.png``.

    ``x`` names the abscissa column (default: the first), ``y`` the plotted
    columns (default: all others).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(c) for c in r])
    png = None
    if plot and rows:
        png = plot_csv(path, x=x, y=y, title=title, logx=logx, logy=logy)
    return path, png


def _cell(c):
    if isinstance(c, (float, np.floating)):
        return repr(float(c))
    if isinstance(c, np.integer):
        return int(c)
    return c


def plot_csv(path, x=None, y=None, title=None, logx=False, logy=False):
    """Line plot of the numeric columns of a CSV file, saved next to it as PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    with path.open() as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = {}
    for j, name in enumerate(header):
        try:
            data[name] = np.array([float(r[j]) for r in body])
        except ValueError:
            continue
    x = x or header[0]
    y = y or [h for h in header if h != x and h in data]
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in y:
        ax.plot(data[x], data[name], marker="o", label=name)
    ax.set_xlabel(x)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_title(title or path.stem)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    png = path.with_suffix(".png")
    fig.savefig(png, dpi=100)
    plt.close(fig)
    return png
