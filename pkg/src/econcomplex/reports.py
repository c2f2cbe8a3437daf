"""Deterministic report writers: JSON, rankings, sorted matrices and SVG heatmaps."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import DataError
from .incidence import IncidenceMatrix
from .spectral_core import ComplexityScores


def _clean(obj):
    # JSON has no NaN/inf; numpy scalars and arrays become plain Python values
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_json(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


@dataclass(frozen=True)
class RankingRow:
    rank: int
    label: str
    raw: float
    standardized: float
    degree: int


def rankings(scores: ComplexityScores, degree) -> list:
    """Every entity ranked by descending raw score, ties by label."""
    order = sorted(range(len(scores.labels)), key=lambda i: (-scores.raw[i], scores.labels[i]))
    return [
        RankingRow(
            r + 1,
            scores.labels[i],
            float(scores.raw[i]),
            float(scores.standardized[i]),
            int(degree[i]),
        )
        for r, i in enumerate(order)
    ]


def top_bottom(rows, n=10):
    """``(section, row)`` pairs: the first ``n`` rows, then the last ``n``."""
    if n < 1:
        raise DataError(f"top-n must be >= 1, got {n}")
    out = [("top", r) for r in rows[:n]]
    out += [("bottom", r) for r in rows[max(len(rows) - n, 0) :]]
    return out


def scores_records(scores: ComplexityScores, degree, degree_name):
    return [
        {
            "label": lab,
            "raw": float(scores.raw[i]),
            "standardized": float(scores.standardized[i]),
            degree_name: int(degree[i]),
        }
        for i, lab in enumerate(scores.labels)
    ]


def ascending_order(values, labels):
    return sorted(range(len(labels)), key=lambda i: (values[i], labels[i]))


def eci_pci_order(incidence: IncidenceMatrix, eci: ComplexityScores, pci: ComplexityScores):
    """Rows by ascending ECI, columns by ascending PCI (label tie-break)."""
    return (
        ascending_order(eci.raw, incidence.actor_labels),
        ascending_order(pci.raw, incidence.item_labels),
    )


def diversity_ubiquity_order(incidence: IncidenceMatrix):
    """Rows by ascending diversity, columns by descending ubiquity (label tie-break).

    Columns run from the most to the least ubiquitous item so that, for a
    nested matrix, each row's support is a prefix of the column order.
    """
    rows = ascending_order(incidence.diversity, incidence.actor_labels)
    cols = sorted(
        range(len(incidence.item_labels)),
        key=lambda j: (-incidence.ubiquity[j], incidence.item_labels[j]),
    )
    return rows, cols


def reordered_rows(incidence: IncidenceMatrix, rows, cols):
    header = ["actor"] + [incidence.item_labels[j] for j in cols]
    body = [
        [incidence.actor_labels[i]] + [int(incidence.M[i, j]) for j in cols] for i in rows
    ]
    return header, body


def is_prefix_nested(block):
    """True when every row of the 0/1 matrix is a run of ones followed by zeros."""
    block = np.asarray(block)
    return bool(np.all(np.diff(block, axis=1) <= 0))


def heatmap_svg(incidence: IncidenceMatrix, rows, cols, cell=12, title=""):
    """Self-contained SVG with one rectangle per nonzero cell of the reordered matrix."""
    margin_left = 8 + 7 * max(len(str(incidence.actor_labels[i])) for i in rows)
    margin_top = 8 + 7 * max(len(str(incidence.item_labels[j])) for j in cols)
    width = margin_left + cell * len(cols) + 8
    height = margin_top + cell * len(rows) + 8
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="10">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    for r, i in enumerate(rows):
        y = margin_top + r * cell + cell - 2
        out.append(
            f'<text x="{margin_left - 4}" y="{y}" text-anchor="end">'
            f"{escape(str(incidence.actor_labels[i]))}</text>"
        )
    for c, j in enumerate(cols):
        x = margin_left + c * cell + cell - 3
        out.append(
            f'<text x="{x}" y="{margin_top - 4}" transform="rotate(-90 {x} {margin_top - 4})">'
            f"{escape(str(incidence.item_labels[j]))}</text>"
        )
    out.append(f'<g fill="#1f3b73" data-rows="{len(rows)}" data-cols="{len(cols)}">')
    for r, i in enumerate(rows):
        for c, j in enumerate(cols):
            if incidence.M[i, j]:
                out.append(
                    f'<rect x="{margin_left + c * cell}" y="{margin_top + r * cell}" '
                    f'width="{cell}" height="{cell}"/>'
                )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
