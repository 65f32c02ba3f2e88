"""Trace CSV reading and writing.

Layout: a header row ``k,x_0..x_{n-1},f,prox,residual,alpha``, one data
row per iteration, then a comment footer carrying the certificate:

    # K=4            (or K=undefined)
    # dist_to_S=...
    # f_gap=...
    # L_bar=...
    # gamma_star=...

Floats are written with 17 significant digits, which round-trips binary64
exactly: reading a trace back yields bit-identical numbers, and verifying
a trace can therefore use tight tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solvers import TraceRow

__all__ = ["TraceFooter", "write_trace", "read_trace", "format_float"]


@dataclass(frozen=True)
class TraceFooter:
    """Certificate block at the end of a trace file."""

    K: int | None
    dist_to_S: float
    f_gap: float
    L_bar: float
    gamma_star: float


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def header_fields(dim: int) -> list:
    return ["k"] + [f"x_{i}" for i in range(dim)] + ["f", "prox", "residual", "alpha"]


def write_trace(path: str, rows, footer: TraceFooter) -> None:
    """Write rows and footer; identical inputs produce identical bytes."""
    rows = list(rows)
    if not rows:
        raise ValueError("trace needs at least one row")
    dim = rows[0].x.size
    lines = [",".join(header_fields(dim))]
    for r in rows:
        cells = [str(int(r.k))]
        cells += [format_float(v) for v in r.x]
        cells += [format_float(r.f), format_float(r.prox),
                  format_float(r.residual), format_float(r.alpha)]
        lines.append(",".join(cells))
    lines.append(f"# K={'undefined' if footer.K is None else int(footer.K)}")
    lines.append(f"# dist_to_S={format_float(footer.dist_to_S)}")
    lines.append(f"# f_gap={format_float(footer.f_gap)}")
    lines.append(f"# L_bar={format_float(footer.L_bar)}")
    lines.append(f"# gamma_star={format_float(footer.gamma_star)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace(path: str):
    """Parse a trace file back into (rows, footer).

    Raises ValueError on structural problems (bad header, ragged rows,
    missing footer fields).
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError("trace file is empty")
    head = lines[0].split(",")
    if len(head) < 6 or head[0] != "k" or head[-4:] != ["f", "prox", "residual", "alpha"]:
        raise ValueError(f"malformed trace header: {lines[0]!r}")
    dim = len(head) - 5
    if head != header_fields(dim):
        raise ValueError(f"malformed trace header: {lines[0]!r}")

    rows = []
    footer_raw = {}
    for ln in lines[1:]:
        if ln.startswith("#"):
            body = ln.lstrip("#").strip()
            if "=" not in body:
                raise ValueError(f"malformed footer line: {ln!r}")
            key, _, val = body.partition("=")
            footer_raw[key.strip()] = val.strip()
            continue
        cells = ln.split(",")
        if len(cells) != dim + 5:
            raise ValueError(f"row has {len(cells)} cells, expected {dim + 5}: {ln!r}")
        k = int(cells[0])
        x = np.asarray([float(c) for c in cells[1:1 + dim]])
        f, prox, residual, alpha = (float(c) for c in cells[1 + dim:])
        rows.append(TraceRow(k, x, f, prox, residual, alpha))

    required = ("K", "dist_to_S", "f_gap", "L_bar", "gamma_star")
    missing = [key for key in required if key not in footer_raw]
    if missing:
        raise ValueError(f"trace footer is missing {missing}")
    if not rows:
        raise ValueError("trace file has no data rows")
    k_raw = footer_raw["K"]
    footer = TraceFooter(
        K=None if k_raw == "undefined" else int(k_raw),
        dist_to_S=float(footer_raw["dist_to_S"]),
        f_gap=float(footer_raw["f_gap"]),
        L_bar=float(footer_raw["L_bar"]),
        gamma_star=float(footer_raw["gamma_star"]),
    )
    return rows, footer
