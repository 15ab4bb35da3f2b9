"""SVG plots of ledger, spectrum and sweep CSV files."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import atomic_write_bytes  # noqa: E402

SCHEMAS = {
    "energy": ("t", "kinetic", "dissipation", "boundary_production", "forcing_power", "dt_norm", "h1_norm"),
    "spectrum": ("j", "a", "Lambda"),
    "sweep": ("lemma", "L", "ensemble_size", "max_ratio", "violated"),
}


def _read(csv_path: Path, kind: str) -> list[dict[str, str]]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = tuple(reader.fieldnames or ())
        rows = list(reader)
    expected = SCHEMAS[kind]
    if cols[: len(expected)] != expected:
        raise ValueError(f"{csv_path}: columns {cols} do not match the {kind} schema {expected}")
    if not rows:
        raise ValueError(f"{csv_path}: no data rows")
    return rows


def emit_plot(csv_path: str | Path, kind: str, out_path: str | Path | None = None) -> Path:
    if kind not in SCHEMAS:
        raise ValueError(f"unknown plot kind {kind!r}")
    csv_path = Path(csv_path)
    rows = _read(csv_path, kind)
    out_path = Path(out_path) if out_path is not None else csv_path.with_suffix(".svg")
    plt.rcParams["svg.hashsalt"] = "stripns"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if kind == "energy":
        t = [float(r["t"]) for r in rows]
        for col in ("kinetic", "dissipation", "boundary_production", "forcing_power"):
            ax.plot(t, [float(r[col]) for r in rows], label=col)
        ax.set_xlabel("t")
        ax.legend()
    elif kind == "spectrum":
        j = [int(r["j"]) for r in rows]
        ax.step(j, [float(r["Lambda"]) for r in rows], where="post")
        ax.set_xlabel("j")
        ax.set_ylabel("Lambda_j")
    else:
        by: dict[str, list[tuple[float, float]]] = {}
        for r in rows:
            by.setdefault(r["lemma"], []).append((float(r["L"]), float(r["max_ratio"])))
        for name, pts in by.items():
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
        ax.set_xscale("log", base=2)
        ax.set_xlabel("L")
        ax.set_ylabel("max ratio")
        ax.legend()
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return atomic_write_bytes(out_path, buf.getvalue())
