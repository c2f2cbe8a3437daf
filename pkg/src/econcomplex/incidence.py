"""Score matrices (RCA, per-capita RCA, LQ), binarization and pruning."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DataError, DegenerateMarginError, TooDegenerateError
from .ingestion import CovariateTable, RawBipartitePanel

MEASURES = ("rca", "rca_pop", "lq")
COMPARISONS = ("strict_greater", "greater_equal")


@dataclass(frozen=True)
class ScoreMatrix:
    actor_labels: tuple
    item_labels: tuple
    scores: np.ndarray
    measure: str

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise DataError(f"unknown measure {self.measure!r}")
        scores = np.array(self.scores, dtype=float)
        if not np.all(np.isfinite(scores)) or np.any(scores < 0):
            raise DataError("scores must be finite and nonnegative")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "actor_labels", tuple(self.actor_labels))
        object.__setattr__(self, "item_labels", tuple(self.item_labels))


@dataclass(frozen=True)
class IncidenceMatrix:
    """Binary actor x item matrix with exact integer diversity and ubiquity."""

    actor_labels: tuple
    item_labels: tuple
    M: np.ndarray
    threshold: float = 1.0
    comparison: str = "strict_greater"
    diversity: np.ndarray = field(init=False)
    ubiquity: np.ndarray = field(init=False)

    def __post_init__(self):
        M = np.asarray(self.M)
        if M.ndim != 2 or M.shape != (len(self.actor_labels), len(self.item_labels)):
            raise DataError("incidence shape does not match labels")
        if not np.isin(M, (0, 1)).all():
            raise DataError("incidence entries must be 0 or 1")
        M = M.astype(np.int8)
        M.setflags(write=False)
        diversity = M.sum(axis=1, dtype=np.int64)
        ubiquity = M.sum(axis=0, dtype=np.int64)
        diversity.setflags(write=False)
        ubiquity.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "actor_labels", tuple(self.actor_labels))
        object.__setattr__(self, "item_labels", tuple(self.item_labels))
        object.__setattr__(self, "diversity", diversity)
        object.__setattr__(self, "ubiquity", ubiquity)

    @property
    def shape(self):
        return self.M.shape

    def subset(self, actor_idx, item_idx):
        actor_idx = np.asarray(actor_idx, dtype=int)
        item_idx = np.asarray(item_idx, dtype=int)
        return IncidenceMatrix(
            tuple(self.actor_labels[i] for i in actor_idx),
            tuple(self.item_labels[j] for j in item_idx),
            self.M[np.ix_(actor_idx, item_idx)],
            self.threshold,
            self.comparison,
        )

    @classmethod
    def from_array(cls, M, actor_labels=None, item_labels=None, **kw):
        M = np.asarray(M)
        if actor_labels is None:
            actor_labels = [f"a{i}" for i in range(M.shape[0])]
        if item_labels is None:
            item_labels = [f"i{j}" for j in range(M.shape[1])]
        return cls(tuple(actor_labels), tuple(item_labels), M, **kw)


@dataclass
class PruneReport:
    dropped_actors: list = field(default_factory=list)
    dropped_items: list = field(default_factory=list)
    components_found: int = 0
    restricted_to_largest: bool = False
    n_actors_before: int = 0
    n_items_before: int = 0
    n_actors_after: int = 0
    n_items_after: int = 0

    def to_dict(self):
        return {
            "dropped_actors": list(self.dropped_actors),
            "dropped_items": list(self.dropped_items),
            "components_found": self.components_found,
            "restricted_to_largest": self.restricted_to_largest,
            "n_actors_before": self.n_actors_before,
            "n_items_before": self.n_items_before,
            "n_actors_after": self.n_actors_after,
            "n_items_after": self.n_items_after,
        }


def _check_margins(values, actor_labels, item_labels, check_rows=True):
    if check_rows:
        rows = values.sum(axis=1)
        bad = np.flatnonzero(rows <= 0)
        if bad.size:
            raise DegenerateMarginError(
                f"actor {actor_labels[bad[0]]!r} has zero total", entity=actor_labels[bad[0]]
            )
    cols = values.sum(axis=0)
    bad = np.flatnonzero(cols <= 0)
    if bad.size:
        raise DegenerateMarginError(
            f"item {item_labels[bad[0]]!r} has zero total", entity=item_labels[bad[0]]
        )


def _balassa(values):
    actor_share = values / values.sum(axis=1, keepdims=True)
    item_share = values.sum(axis=0, keepdims=True) / values.sum()
    return actor_share / item_share


def compute_rca(panel: RawBipartitePanel) -> ScoreMatrix:
    """Balassa revealed comparative advantage of every actor in every item."""
    values = panel.values
    _check_margins(values, panel.actor_labels, panel.item_labels)
    return ScoreMatrix(panel.actor_labels, panel.item_labels, _balassa(values), "rca")


def compute_lq(panel: RawBipartitePanel) -> ScoreMatrix:
    """Location quotient: the Balassa ratio applied to employment counts."""
    values = panel.values
    _check_margins(values, panel.actor_labels, panel.item_labels)
    return ScoreMatrix(panel.actor_labels, panel.item_labels, _balassa(values), "lq")


def compute_rca_pop(panel: RawBipartitePanel, population: CovariateTable) -> ScoreMatrix:
    """Per-capita RCA: an actor's value per person relative to the pooled value per person."""
    if population.kind != "population":
        raise DataError("compute_rca_pop needs a population-kind covariate table")
    n = population.aligned(panel.actor_labels)
    values = panel.values
    _check_margins(values, panel.actor_labels, panel.item_labels, check_rows=False)
    per_capita = values / n[:, None]
    pooled = values.sum(axis=0, keepdims=True) / n.sum()
    return ScoreMatrix(panel.actor_labels, panel.item_labels, per_capita / pooled, "rca_pop")


def compute_scores(panel, measure="rca", population=None) -> ScoreMatrix:
    if measure == "rca":
        return compute_rca(panel)
    if measure == "lq":
        return compute_lq(panel)
    if measure == "rca_pop":
        if population is None:
            raise DataError("measure rca_pop requires a population table")
        return compute_rca_pop(panel, population)
    raise DataError(f"unknown measure {measure!r}; expected one of {MEASURES}")


def binarize(scores: ScoreMatrix, threshold=1.0, comparison="strict_greater") -> IncidenceMatrix:
    """M_cp = 1 where the score beats ``threshold`` under ``comparison``."""
    if not np.isfinite(threshold) or threshold < 0:
        raise DataError(f"threshold must be >= 0, got {threshold}")
    if comparison == "strict_greater":
        M = scores.scores > threshold
    elif comparison == "greater_equal":
        M = scores.scores >= threshold
    else:
        raise DataError(f"unknown comparison {comparison!r}; expected one of {COMPARISONS}")
    return IncidenceMatrix(
        scores.actor_labels, scores.item_labels, M.astype(np.int8), float(threshold), comparison
    )


def bipartite_components(M: np.ndarray):
    """Connected components of the actor-item graph.

    Returns ``(n_components, actor_component, item_component)``.
    """
    n_a, n_i = M.shape
    B = csr_matrix(np.asarray(M, dtype=np.int8))
    rows, cols = B.nonzero()
    adj = csr_matrix(
        (np.ones(2 * rows.size), (np.r_[rows, cols + n_a], np.r_[cols + n_a, rows])),
        shape=(n_a + n_i, n_a + n_i),
    )
    n_comp, labels = connected_components(adj, directed=False)
    return n_comp, labels[:n_a], labels[n_a:]


def prune(incidence: IncidenceMatrix, restrict_to_largest_component=True):
    """Drop empty rows/columns and optionally keep only the largest component.

    The largest component is the one with the most actors; ties go to the
    one with more items, then to the one holding the lexicographically
    smallest actor label.

    Returns
    -------
    (IncidenceMatrix, PruneReport)
    """
    report = PruneReport(
        n_actors_before=incidence.shape[0],
        n_items_before=incidence.shape[1],
        restricted_to_largest=bool(restrict_to_largest_component),
    )
    actor_idx = np.arange(incidence.shape[0])
    item_idx = np.arange(incidence.shape[1])
    M = incidence.M
    # removing a zero column cannot create a zero row (and vice versa), one pass suffices,
    # but loop anyway so the contract does not depend on that argument
    while True:
        sub = M[np.ix_(actor_idx, item_idx)]
        keep_a = sub.sum(axis=1) > 0
        keep_i = sub.sum(axis=0) > 0
        if keep_a.all() and keep_i.all():
            break
        actor_idx = actor_idx[keep_a]
        item_idx = item_idx[keep_i]
        if actor_idx.size == 0 or item_idx.size == 0:
            break

    if actor_idx.size and item_idx.size:
        n_comp, a_comp, i_comp = bipartite_components(M[np.ix_(actor_idx, item_idx)])
        report.components_found = int(n_comp)
        if restrict_to_largest_component and n_comp > 1:
            labels = incidence.actor_labels

            def key(c):
                members = actor_idx[a_comp == c]
                smallest = min(labels[i] for i in members)
                return (-members.size, -int(np.sum(i_comp == c)), smallest)

            best = min(range(n_comp), key=key)
            actor_idx = actor_idx[a_comp == best]
            item_idx = item_idx[i_comp == best]

    kept_a = set(actor_idx.tolist())
    kept_i = set(item_idx.tolist())
    report.dropped_actors = [
        lab for i, lab in enumerate(incidence.actor_labels) if i not in kept_a
    ]
    report.dropped_items = [lab for j, lab in enumerate(incidence.item_labels) if j not in kept_i]
    report.n_actors_after = int(actor_idx.size)
    report.n_items_after = int(item_idx.size)
    if actor_idx.size < 2 or item_idx.size < 2:
        exc = TooDegenerateError(
            f"pruned incidence is {actor_idx.size}x{item_idx.size}; need at least 2x2"
        )
        exc.report = report
        raise exc
    return incidence.subset(actor_idx, item_idx), report
