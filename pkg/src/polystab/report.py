"""Run manifests, delimited tables and SVG figures."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import __version__  # noqa: E402


@dataclass
class RunManifest:
    command: str
    params_hash: str
    grids: list
    tolerances: dict
    outputs: list = field(default_factory=list)
    wall_clock: float = 0.0
    version: str = __version__
    extra: dict = field(default_factory=dict)

    @property
    def input_hash(self) -> str:
        """Hash of everything that determines the numbers (not paths or timing)."""
        payload = {"command": self.command, "params_hash": self.params_hash,
                   "grids": list(self.grids), "tolerances": self.tolerances,
                   "version": self.version, "extra": self.extra}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["input_hash"] = self.input_hash
        return out

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
        return path


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.start


def fmt(x) -> str:
    """Shortest round-trip text for a number; blank-free, NaN as ``nan``."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def csv_text(columns, rows, comments=()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def csv_body(text: str) -> str:
    """The table part of a CSV written by :func:`csv_text` (comments dropped)."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def write_csv(path, columns, rows, comments=()) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(columns, rows, comments))
    return path


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, default=_json_default) + "\n", encoding="utf-8")
    return path


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def emit_profile_svg(x, series: dict, path, manifest_hash: str, xlabel: str = "y",
                     ylabel: str = "", title: str = "") -> Path:
    """Line plot of one or more profiles over a common abscissa, as SVG.

    Raises:
        ValueError: if there is nothing to draw.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0 or not series:
        raise ValueError("nothing to plot: empty abscissa or no series")
    for name, y in series.items():
        if np.asarray(y).shape != x.shape:
            raise ValueError(f"series {name!r} does not match the abscissa")
    with plt.rc_context({"svg.hashsalt": manifest_hash, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for name, y in series.items():
            ax.plot(x, np.asarray(y, dtype=float), label=name, lw=1.4)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(frameon=False, fontsize="small")
        ax.grid(alpha=0.3)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    text = buf.getvalue()
    head, sep, rest = text.partition("?>\n")
    if sep:
        text = f"{head}{sep}<!-- manifest {manifest_hash} -->\n{rest}"
    else:
        text = f"<!-- manifest {manifest_hash} -->\n{text}"
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
