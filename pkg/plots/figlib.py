"""Figure rendering for the simulator's columnar output files.

Three figure kinds mirror the measurement views of the experiment: the
biphoton spectrum with its interference fringes, the concurrence versus
wavelength sweep, and paired real/imaginary bar grids of a reconstructed
density matrix.  Rendering is read-only over its inputs and the image is
replaced atomically, so a failed render never leaves a partial file.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGURE_KINDS = ("spectrum", "concurrence_sweep", "density_bars")

#: Required column headers per figure kind; extra columns are allowed.
REQUIRED_COLUMNS = {
    "spectrum": ("wavelength_nm", "output_weight"),
    "concurrence_sweep": ("wavelength_nm", "concurrence"),
    "density_bars": ("element_row", "element_col", "real", "imag"),
}

CANVAS = {"figsize": (7.0, 4.2), "dpi": 120}
COLOR_CYCLE = ("#1f77b4", "#d62728", "#7f7f7f")
BASIS = ("HH", "HV", "VH", "VV")


class RenderError(RuntimeError):
    """Input file or figure specification problem; message names the offender."""


@dataclass
class FigureSpec:
    kind: str
    data: list[Path]
    output: Path
    title: str = ""
    axes: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "FigureSpec":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise RenderError(f"spec {path}: {exc}") from exc
        kind = doc.get("kind")
        if kind not in FIGURE_KINDS:
            raise RenderError(f"spec {path}: unknown figure kind {kind!r}; "
                              f"expected one of {', '.join(FIGURE_KINDS)}")
        data = doc.get("data")
        if not isinstance(data, list) or not data:
            raise RenderError(f"spec {path}: 'data' must list at least one CSV file")
        base = path.parent
        files = [(base / d).resolve() for d in data]
        for f in files:
            if not f.exists():
                raise RenderError(f"spec {path}: data file {f} does not exist")
        output = doc.get("output")
        if not output:
            raise RenderError(f"spec {path}: missing 'output' image path")
        return cls(kind=kind, data=files, output=(base / output).resolve(),
                   title=str(doc.get("title", "")), axes=dict(doc.get("axes", {})))


def read_columns(path: Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read a columnar CSV, insisting on the required headers and numeric rows."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise RenderError(f"{path}: missing required column '{column}' "
                                  f"(found: {', '.join(header) or 'no header'})")
        rows = list(reader)
    if not rows:
        raise RenderError(f"{path}: no data rows")
    out: dict[str, np.ndarray] = {}
    for column in header:
        values = [row[column] for row in rows]
        try:
            out[column] = np.array([float(v) for v in values])
        except (TypeError, ValueError):
            out[column] = np.array(values, dtype=object)
    for column in required:
        if out[column].dtype == object and column not in ("element_row", "element_col"):
            raise RenderError(f"{path}: column '{column}' is not numeric")
    return out


def _style(ax, spec: FigureSpec, xlabel: str, ylabel: str):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if spec.title:
        ax.set_title(spec.title)
    box = spec.axes
    if "x_min" in box or "x_max" in box:
        ax.set_xlim(box.get("x_min"), box.get("x_max"))
    if "y_min" in box or "y_max" in box:
        ax.set_ylim(box.get("y_min"), box.get("y_max"))
    ax.grid(True, alpha=0.3)


def _render_spectrum(spec: FigureSpec):
    fig, ax = plt.subplots(**CANVAS)
    for i, path in enumerate(spec.data):
        cols = read_columns(path, REQUIRED_COLUMNS["spectrum"])
        ax.plot(cols["wavelength_nm"], cols["output_weight"],
                color=COLOR_CYCLE[i % len(COLOR_CYCLE)], lw=0.9,
                label=f"output ({path.name})")
        if "source_weight" in cols:
            ax.plot(cols["wavelength_nm"], cols["source_weight"],
                    color=COLOR_CYCLE[2], lw=0.9, ls="--", label="source envelope")
    _style(ax, spec, "wavelength (nm)", "coincidence weight (arb.)")
    ax.legend(loc="upper right", fontsize=8)
    return fig


def _render_sweep(spec: FigureSpec):
    fig, ax = plt.subplots(**CANVAS)
    for i, path in enumerate(spec.data):
        cols = read_columns(path, REQUIRED_COLUMNS["concurrence_sweep"])
        color = COLOR_CYCLE[i % len(COLOR_CYCLE)]
        if "concurrence_err" in cols and np.all(np.isfinite(cols["concurrence_err"])):
            ax.errorbar(cols["wavelength_nm"], cols["concurrence"],
                        yerr=cols["concurrence_err"], fmt="o", ms=2.5,
                        lw=0.8, color=color, label=f"reconstructed ({path.name})")
        else:
            ax.plot(cols["wavelength_nm"], cols["concurrence"], "o-", ms=2.0,
                    lw=0.8, color=color, label=f"concurrence ({path.name})")
        if "concurrence_ideal" in cols:
            order = np.argsort(cols["wavelength_nm"])
            ax.plot(cols["wavelength_nm"][order], cols["concurrence_ideal"][order],
                    color=COLOR_CYCLE[2], lw=0.8, ls="--", label="bin-state value")
    ax.set_ylim(-0.02, 1.05)
    _style(ax, spec, "wavelength (nm)", "concurrence")
    ax.legend(loc="upper right", fontsize=8)
    return fig


def _render_density_bars(spec: FigureSpec):
    cols = read_columns(spec.data[0], REQUIRED_COLUMNS["density_bars"])
    matrix = np.zeros((4, 4), dtype=complex)
    index = {label: k for k, label in enumerate(BASIS)}
    try:
        for row, col, re_part, im_part in zip(
                cols["element_row"], cols["element_col"], cols["real"], cols["imag"]):
            matrix[index[str(row)], index[str(col)]] = float(re_part) + 1j * float(im_part)
    except KeyError as exc:
        raise RenderError(f"{spec.data[0]}: unknown basis label {exc}") from exc

    fig = plt.figure(figsize=(8.0, 4.0), dpi=CANVAS["dpi"])
    xs, ys = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
    for panel, (part, label) in enumerate(((matrix.real, "Re"), (matrix.imag, "Im"))):
        ax = fig.add_subplot(1, 2, panel + 1, projection="3d")
        ax.bar3d(xs.ravel() - 0.3, ys.ravel() - 0.3, np.zeros(16),
                 0.6, 0.6, part.ravel(), color=COLOR_CYCLE[panel], alpha=0.85,
                 shade=True)
        ax.set_zlim(-0.55, 0.55)
        ax.set_xticks(range(4), BASIS, fontsize=7)
        ax.set_yticks(range(4), BASIS, fontsize=7)
        ax.set_title(f"{label}(density matrix)", fontsize=10)
    if spec.title:
        fig.suptitle(spec.title)
    return fig


def render(spec: FigureSpec) -> Path:
    """Render the figure described by the spec; returns the image path."""
    builders = {
        "spectrum": _render_spectrum,
        "concurrence_sweep": _render_sweep,
        "density_bars": _render_density_bars,
    }
    fig = builders[spec.kind](spec)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    tmp = spec.output.with_name(spec.output.name + ".tmp")
    try:
        fig.savefig(tmp, format=spec.output.suffix.lstrip(".") or "png")
    finally:
        plt.close(fig)
    os.replace(tmp, spec.output)
    return spec.output


def main(argv=None) -> int:
    import argparse
    import sys

    parser = argparse.ArgumentParser(
        prog="render", description="Render simulator CSV output into figures.")
    parser.add_argument("--spec", required=True, help="path to a figure-spec JSON document")
    parser.add_argument("--out", help="override the output image path")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.load(args.spec)
        if args.out:
            spec.output = Path(args.out).resolve()
        written = render(spec)
    except RenderError as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    print(written)
    return 0
