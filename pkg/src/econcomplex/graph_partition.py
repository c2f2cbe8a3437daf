"""Cuts, normalized cuts, Laplacians, Fiedler vectors and the eigengap heuristic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateSpectrumError
from .spectral_core import (
    MULTIPLICITY_TOL,
    ComplexityScores,
    SpectrumResult,
    SymmetricSimilarity,
    fix_sign,
)

BRUTE_FORCE_MAX_N = 20


@dataclass(frozen=True)
class Partition:
    """Two-way split of the vertices; ``assignment[i]`` is True for set A."""

    assignment: np.ndarray
    labels: tuple

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=bool)
        if a.ndim != 1 or a.size != len(self.labels):
            raise DataError("assignment must be a boolean vector aligned with the labels")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def side_a(self):
        return [lab for lab, x in zip(self.labels, self.assignment) if x]

    @property
    def side_b(self):
        return [lab for lab, x in zip(self.labels, self.assignment) if not x]

    def complement(self):
        return Partition(~self.assignment, self.labels)

    def canonical(self):
        """Same split with the first vertex placed in A."""
        return self if self.assignment[0] else self.complement()


@dataclass(frozen=True)
class EigengapReport:
    eigenvalues: np.ndarray
    gaps: np.ndarray
    suggested_k: int
    source: str = "mtilde"

    def to_dict(self):
        return {
            "source": self.source,
            "eigenvalues": self.eigenvalues.tolist(),
            "gaps": self.gaps.tolist(),
            "suggested_k": self.suggested_k,
        }


def _matrix(S):
    if isinstance(S, SymmetricSimilarity):
        return S.S
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DataError("similarity matrix must be square")
    return S


def _labels(S, n):
    if isinstance(S, SymmetricSimilarity):
        return S.labels
    return tuple(str(i) for i in range(n))


def _mask(subset, n):
    if isinstance(subset, Partition):
        return subset.assignment
    subset = np.asarray(subset)
    if subset.dtype == bool:
        if subset.size != n:
            raise DataError("boolean subset has the wrong length")
        return subset
    mask = np.zeros(n, dtype=bool)
    mask[subset.astype(int)] = True
    return mask


def degree(S, i):
    return float(_matrix(S)[i].sum())


def degrees(S):
    return _matrix(S).sum(axis=1)


def volume(S, subset):
    """Sum of the degrees of the vertices in ``subset`` (indices or boolean mask)."""
    S = _matrix(S)
    return float(S.sum(axis=1)[_mask(subset, S.shape[0])].sum())


def _split(S, partition):
    S = _matrix(S)
    a = _mask(partition, S.shape[0])
    if a.all() or not a.any():
        raise DataError("both sides of the partition must be nonempty")
    # fixed orientation so a split and its complement sum in the same order
    return S, (a if a[0] else ~a)


def cut_value(S, partition):
    S, a = _split(S, partition)
    return float(S[np.ix_(a, ~a)].sum())


def ncut_value(S, partition):
    """(1/vol(A) + 1/vol(B)) * cut(A, B)."""
    S, a = _split(S, partition)
    d = S.sum(axis=1)
    vol_a, vol_b = d[a].sum(), d[~a].sum()
    if vol_a <= 0 or vol_b <= 0:
        raise DataError("normalized cut undefined: a side has zero volume")
    cut = S[np.ix_(a, ~a)].sum()
    return float((1 / vol_a + 1 / vol_b) * cut)


def normalized_laplacian(S):
    """D^(-1/2) (D - S) D^(-1/2)."""
    S = _matrix(S)
    d = S.sum(axis=1)
    if np.any(d <= 0):
        raise DataError("zero-degree vertex; normalized Laplacian undefined")
    r = 1 / np.sqrt(d)
    L = np.eye(S.shape[0]) - S * r[:, None] * r[None, :]
    return (L + L.T) / 2


def fiedler(S, labels=None):
    """Normalized Fiedler vector ``z2`` and its transform ``y2 = D^(-1/2) z2``.

    ``y2`` is rescaled to unit norm and oriented like the ECI (nonnegative
    correlation with the degrees, label tie-break).

    Returns
    -------
    (z2, y2, lambda2)
    """
    M = _matrix(S)
    labels = tuple(labels) if labels is not None else _labels(S, M.shape[0])
    d = M.sum(axis=1)
    L = normalized_laplacian(M)
    w, Z = np.linalg.eigh(L)
    n_zero = int(np.sum(w <= w[0] + MULTIPLICITY_TOL))
    if n_zero > 1:
        raise DegenerateSpectrumError(
            f"graph is disconnected: Laplacian eigenvalue 0 has multiplicity {n_zero} "
            f"(top_multiplicity={n_zero})",
            top_multiplicity=n_zero,
        )
    z2 = Z[:, 1]
    y2 = z2 / np.sqrt(d)
    y2 = fix_sign(y2 / np.linalg.norm(y2), d, labels)
    return z2, y2, float(w[1])


def rayleigh_quotient(S, y):
    """y'(D - S)y / y'Dy."""
    S = _matrix(S)
    y = np.asarray(y, dtype=float)
    d = S.sum(axis=1)
    den = y @ (d * y)
    if den == 0:
        raise DataError("Rayleigh quotient undefined for y'Dy = 0")
    return float((y @ (d * y) - y @ S @ y) / den)


def partition_from_scores(scores: ComplexityScores) -> Partition:
    """A = vertices with positive score, B = the rest (zeros go to B).

    Degenerate scores are accepted only when the top eigenvalue is exactly
    doubled: the degenerate direction is then the two-component split itself.
    """
    if scores.degenerate and scores.top_multiplicity != 2:
        raise DegenerateSpectrumError(
            f"cannot partition from degenerate scores (top_multiplicity={scores.top_multiplicity})",
            top_multiplicity=scores.top_multiplicity,
        )
    a = np.asarray(scores.raw) > 0
    if a.all() or not a.any():
        raise DataError("spectral partition is one-sided")
    return Partition(a, scores.labels)


def _ncut_batch(S, d, total, masks):
    X = masks.astype(float)
    vol_a = X @ d
    vol_b = total - vol_a
    cut = np.einsum("ij,ij->i", X @ S, 1 - X)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (1 / vol_a + 1 / vol_b) * cut
    val[(vol_a <= 0) | (vol_b <= 0)] = np.inf
    return val


def enumerate_ncut(S, chunk=1 << 15):
    """Ncut of every bipartition with vertex 0 in A, as (masks, values).

    Rows follow the lexicographic order of the assignment vectors, starting
    at (1, 0, ..., 0); the all-in-A vector is excluded.
    """
    S = _matrix(S)
    n = S.shape[0]
    if n < 2:
        raise DataError("need at least 2 vertices")
    if n > BRUTE_FORCE_MAX_N:
        raise DataError(f"brute force is capped at n={BRUTE_FORCE_MAX_N}, got n={n}")
    d = S.sum(axis=1)
    total = d.sum()
    # vertex 0 always in A; the other n-1 bits enumerate 2^(n-1) - 1 proper splits
    count = (1 << (n - 1)) - 1
    bits = np.arange(n - 1)[::-1]
    masks_all, vals_all = [], []
    for start in range(0, count, chunk):
        codes = np.arange(start, min(start + chunk, count), dtype=np.int64)
        rest = ((codes[:, None] >> bits) & 1).astype(bool)
        masks = np.column_stack([np.ones(codes.size, dtype=bool), rest])
        masks_all.append(masks)
        vals_all.append(_ncut_batch(S, d, total, masks))
    return np.concatenate(masks_all), np.concatenate(vals_all)


def brute_force_min_ncut(S, labels=None):
    """Exact Ncut minimizer by enumeration (n <= 20).

    Ties are broken towards the lexicographically smallest assignment vector
    with vertex 0 in A.

    Returns
    -------
    (Partition, float)
    """
    optima, value = min_ncut_ties(S, labels)
    return optima[0], value


def min_ncut_ties(S, labels=None, rtol=1e-12):
    """All bipartitions attaining the minimum Ncut (within ``rtol``), best first."""
    M = _matrix(S)
    labels = tuple(labels) if labels is not None else _labels(S, M.shape[0])
    masks, vals = enumerate_ncut(M)
    best = vals.min()
    hit = np.flatnonzero(vals <= best + rtol * max(abs(best), 1e-300))
    hit = sorted(hit, key=lambda i: tuple(masks[i].astype(int)))
    return [Partition(masks[i], labels) for i in hit], float(best)


def eigengap(spectrum: SpectrumResult, kmax=None) -> EigengapReport:
    """Gaps between consecutive leading eigenvalues of M-tilde.

    ``suggested_k`` is the number of eigenvalues before the largest gap
    (first one on ties).
    """
    vals = np.asarray(spectrum.eigenvalues, dtype=float)
    if kmax is None:
        kmax = vals.size - 1
    if kmax < 1 or vals.size < kmax + 1:
        raise DataError(f"eigengap needs at least kmax+1={kmax + 1} eigenvalues, got {vals.size}")
    top = vals[: kmax + 1]
    gaps = np.abs(top[:-1] - top[1:])
    return EigengapReport(top, gaps, int(np.argmax(gaps)) + 1, "mtilde")
