"""Seeded synthetic data: nested (triangular) panels and planted two-block structures."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError
from .ingestion import CovariateTable, RawBipartitePanel
from .spectral_core import SymmetricSimilarity


def _labels(prefix, n):
    width = len(str(n))
    return tuple(f"{prefix}{i + 1:0{width}d}" for i in range(n))


def nested_panel(n_actors=12, n_items=12, seed=0):
    """Panel whose positive entries form a nested (triangular) support.

    Actor ``c`` holds the first ``k_c`` items, with ``k_c`` spread evenly
    between 1 and ``n_items``; held cells get lognormal values. With as
    many actors as items the support is a full staircase, for which the ECI
    is an exact affine function of diversity. Binarizing
    at threshold 0 recovers the nested support exactly. Rows are emitted in
    a seeded random order so that sorting is not a no-op.

    Returns
    -------
    (RawBipartitePanel, target CovariateTable, population CovariateTable)
    """
    if n_actors < 2 or n_items < 2:
        raise DataError("nested panel needs at least 2 actors and 2 items")
    rng = np.random.default_rng(seed)
    div = np.rint(np.linspace(1, n_items, n_actors)).astype(int)
    support = np.arange(n_items)[None, :] < div[:, None]
    values = np.where(support, rng.lognormal(3.0, 1.0, size=support.shape), 0.0)
    order = rng.permutation(n_actors)
    actors = _labels("c", n_actors)
    items = _labels("p", n_items)
    panel = RawBipartitePanel(
        tuple(actors[i] for i in order), items, np.round(values[order], 6)
    )
    # richer actors are more diversified, plus noise
    log_income = 8.0 + 0.25 * div + rng.normal(0.0, 0.3, n_actors)
    target = CovariateTable(
        tuple(actors[i] for i in order), np.round(np.exp(log_income[order]), 4), "target"
    )
    pop = CovariateTable(
        tuple(actors[i] for i in order),
        np.rint(rng.lognormal(15.0, 1.0, n_actors)[order]) + 1,
        "population",
    )
    return panel, target, pop


def planted_block_panel(sizes=(6, 6), items_per_block=5, cross=0.0, seed=0):
    """Actors and items split into matching blocks; off-block values scaled by ``cross``.

    With ``cross = 0`` the bipartite graph has exactly ``len(sizes)``
    components.
    """
    rng = np.random.default_rng(seed)
    blocks_a = np.repeat(np.arange(len(sizes)), sizes)
    blocks_i = np.repeat(np.arange(len(sizes)), items_per_block)
    same = blocks_a[:, None] == blocks_i[None, :]
    values = rng.lognormal(2.0, 0.5, size=same.shape) * np.where(same, 1.0, cross)
    panel = RawBipartitePanel(
        _labels("c", blocks_a.size), _labels("p", blocks_i.size), np.round(values, 6)
    )
    return panel, blocks_a


def planted_two_block_graph(n_a=6, n_b=6, p_in=0.8, cross=0.0, p_cross=0.0, seed=0):
    """Weighted graph with two planted blocks.

    Within-block edges appear with probability ``p_in`` (a spanning path
    keeps each block connected) and carry uniform weights in [0.5, 1.5].
    Cross edges appear with probability ``p_cross`` and weight ``cross``
    times a uniform draw.

    Returns
    -------
    (SymmetricSimilarity, truth) where ``truth[i]`` is True for block A.
    """
    rng = np.random.default_rng(seed)
    n = n_a + n_b
    truth = np.arange(n) < n_a
    same = truth[:, None] == truth[None, :]
    W = rng.uniform(0.5, 1.5, size=(n, n))
    keep = np.where(same, rng.random((n, n)) < p_in, rng.random((n, n)) < p_cross)
    W = np.where(same, W, W * cross) * keep
    for lo, hi in ((0, n_a), (n_a, n)):
        idx = np.arange(lo, hi - 1)
        W[idx, idx + 1] = np.maximum(W[idx, idx + 1], 0.5)
    W = np.triu(W, 1)
    W = W + W.T
    return SymmetricSimilarity(W, _labels("v", n), "graph"), truth


def random_incidence(n_actors, n_items, density=0.5, seed=0):
    """Random 0/1 matrix with every row and column nonempty (not necessarily connected)."""
    rng = np.random.default_rng(seed)
    M = (rng.random((n_actors, n_items)) < density).astype(np.int8)
    for i in np.flatnonzero(M.sum(axis=1) == 0):
        M[i, rng.integers(n_items)] = 1
    for j in np.flatnonzero(M.sum(axis=0) == 0):
        M[rng.integers(n_actors), j] = 1
    return M


def shipped_nested_paths():
    """Paths of the nested example dataset bundled with the package.

    It is ``nested_panel()`` with its defaults (12 actors, 12 items, seed 0),
    written by ``econcomplex synth --kind nested``.
    """
    base = resources.files("econcomplex") / "data"
    return {name: Path(str(base / f"{name}.csv")) for name in ("panel", "target", "population")}
