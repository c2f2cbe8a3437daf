"""Parsing of long-format bipartite panels and per-entity covariate tables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParseError, RejectedRecordsError, TooDegenerateError

PANEL_HEADER = ("actor", "item", "value")
COVARIATE_HEADER = ("entity", "value")
COVARIATE_KINDS = ("population", "target")


@dataclass(frozen=True)
class RawBipartitePanel:
    """Nonnegative actor x item value matrix (exports or employment counts)."""

    actor_labels: tuple
    item_labels: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        object.__setattr__(self, "actor_labels", tuple(self.actor_labels))
        object.__setattr__(self, "item_labels", tuple(self.item_labels))
        if values.ndim != 2 or values.shape != (len(self.actor_labels), len(self.item_labels)):
            raise DataError(
                f"value matrix shape {values.shape} does not match "
                f"{len(self.actor_labels)} actors x {len(self.item_labels)} items"
            )
        if len(set(self.actor_labels)) != len(self.actor_labels):
            raise DataError("actor labels are not unique")
        if len(set(self.item_labels)) != len(self.item_labels):
            raise DataError("item labels are not unique")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DataError("panel values must be finite and nonnegative")
        if values.shape[0] < 2 or values.shape[1] < 2:
            raise TooDegenerateError(
                f"panel needs at least 2 actors and 2 items, got {values.shape[0]}x{values.shape[1]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self) -> str:
        """Serialize back to long CSV (row-major, zeros included, header first)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(PANEL_HEADER)
        for i, actor in enumerate(self.actor_labels):
            for j, item in enumerate(self.item_labels):
                writer.writerow((actor, item, repr(float(self.values[i, j]))))
        return buf.getvalue()


@dataclass(frozen=True)
class CovariateTable:
    entity_labels: tuple
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in COVARIATE_KINDS:
            raise DataError(f"unknown covariate kind {self.kind!r}")
        labels = tuple(self.entity_labels)
        values = np.array(self.values, dtype=float)
        if len(set(labels)) != len(labels):
            raise DataError("covariate labels are not unique")
        if values.shape != (len(labels),):
            raise DataError("covariate values must be a vector aligned with the labels")
        if not np.all(np.isfinite(values)):
            raise DataError("covariate values must be finite")
        if self.kind == "population" and np.any(values <= 0):
            raise DataError("population values must be strictly positive")
        values.setflags(write=False)
        object.__setattr__(self, "entity_labels", labels)
        object.__setattr__(self, "values", values)

    def as_dict(self):
        return dict(zip(self.entity_labels, self.values.tolist()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COVARIATE_HEADER)
        for lab, v in zip(self.entity_labels, self.values):
            writer.writerow((lab, repr(float(v))))
        return buf.getvalue()

    def aligned(self, labels) -> np.ndarray:
        """Return the values in the order of ``labels``; every label must be present."""
        lookup = self.as_dict()
        missing = [lab for lab in labels if lab not in lookup]
        if missing:
            shown = ", ".join(map(str, missing[:5]))
            raise DataError(f"{self.kind} covariate missing for {len(missing)} entities: {shown}")
        return np.array([lookup[lab] for lab in labels], dtype=float)


@dataclass
class ValidationReport:
    duplicate_pairs_merged: int = 0
    zero_rows: list = field(default_factory=list)
    zero_cols: list = field(default_factory=list)
    negative_or_nonfinite: int = 0

    def to_dict(self):
        return {
            "duplicate_pairs_merged": self.duplicate_pairs_merged,
            "zero_rows": list(self.zero_rows),
            "zero_cols": list(self.zero_cols),
            "negative_or_nonfinite": self.negative_or_nonfinite,
        }


def _read_text(source) -> str:
    if isinstance(source, str):
        return source
    if isinstance(source, bytes):
        return source.decode("utf-8")
    text = source.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return text


def _rows(text):
    """Yield (line_number, fields) for non-blank CSV records."""
    reader = csv.reader(io.StringIO(text))
    for fields in reader:
        if not fields or all(not f.strip() for f in fields):
            continue
        yield reader.line_num, [f.strip() for f in fields]


def _is_header(fields, expected):
    return tuple(f.lower() for f in fields) == expected


def parse_panel(source, format="long_csv"):
    """Parse a long CSV panel with columns ``actor,item,value``.

    The header row is optional. Duplicate (actor, item) records are summed and
    labels are ordered by first appearance. Negative, blank or non-finite
    values are counted in the report and then rejected as a whole.

    Returns
    -------
    (RawBipartitePanel, ValidationReport)
    """
    if format != "long_csv":
        raise DataError(f"unsupported panel format {format!r}")
    text = _read_text(source)
    if text.startswith("﻿"):
        text = text[1:]

    report = ValidationReport()
    actors: dict = {}
    items: dict = {}
    cells: dict = {}
    rejected_lines = []
    seen_any = False

    for line, fields in _rows(text):
        if not seen_any:
            seen_any = True
            if _is_header(fields, PANEL_HEADER):
                continue
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields (actor,item,value), got {len(fields)}", line)
        actor, item, raw = fields
        if not actor or not item:
            raise ParseError("empty actor or item label", line)
        if raw == "":
            value = math.nan
        else:
            try:
                value = float(raw)
            except ValueError:
                raise ParseError(f"value {raw!r} is not a number", line) from None
        if not math.isfinite(value) or value < 0:
            report.negative_or_nonfinite += 1
            rejected_lines.append(line)
            continue
        i = actors.setdefault(actor, len(actors))
        j = items.setdefault(item, len(items))
        if (i, j) in cells:
            report.duplicate_pairs_merged += 1
            cells[(i, j)] += value
        else:
            cells[(i, j)] = value

    if not seen_any:
        raise ParseError("empty panel file")
    if report.negative_or_nonfinite:
        raise RejectedRecordsError(
            f"{report.negative_or_nonfinite} record(s) with negative, blank or non-finite values "
            f"(lines {', '.join(map(str, rejected_lines[:10]))})",
            report=report,
            lines=rejected_lines,
        )
    if not cells:
        raise ParseError("panel file has a header but no records")

    values = np.zeros((len(actors), len(items)))
    for (i, j), v in cells.items():
        values[i, j] = v
    actor_labels = tuple(actors)
    item_labels = tuple(items)
    report.zero_rows = [actor_labels[i] for i in np.flatnonzero(values.sum(axis=1) == 0)]
    report.zero_cols = [item_labels[j] for j in np.flatnonzero(values.sum(axis=0) == 0)]
    try:
        panel = RawBipartitePanel(actor_labels, item_labels, values)
    except TooDegenerateError as exc:
        exc.report = report
        raise
    return panel, report


def parse_covariate(source, kind):
    """Parse an ``entity,value`` CSV into a :class:`CovariateTable`."""
    if kind not in COVARIATE_KINDS:
        raise DataError(f"unknown covariate kind {kind!r}; expected one of {COVARIATE_KINDS}")
    text = _read_text(source)
    if text.startswith("﻿"):
        text = text[1:]
    labels, values = [], []
    seen = set()
    first = True
    for line, fields in _rows(text):
        if first:
            first = False
            if _is_header(fields, COVARIATE_HEADER):
                continue
        if len(fields) != 2:
            raise ParseError(f"expected 2 fields (entity,value), got {len(fields)}", line)
        entity, raw = fields
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(f"value {raw!r} is not a number", line) from None
        if not math.isfinite(value):
            raise ParseError(f"value {raw!r} is not finite", line)
        if kind == "population" and value <= 0:
            raise ParseError(f"population for {entity!r} must be > 0, got {value}", line)
        if entity in seen:
            raise ParseError(f"duplicate entity {entity!r}", line)
        seen.add(entity)
        labels.append(entity)
        values.append(value)
    if not labels:
        raise ParseError("empty covariate file")
    return CovariateTable(tuple(labels), np.array(values), kind)


def read_panel(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_panel(fh)


def read_covariate(path, kind):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_covariate(fh, kind)
