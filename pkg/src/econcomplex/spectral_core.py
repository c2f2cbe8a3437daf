"""Similarity matrices, row-stochastic projections, eigenpairs and ECI/PCI.

All eigenproblems are solved on the symmetric matrix
``N = D^(-1/2) S D^(-1/2)``, which is similar to ``T = D^(-1) S``. Right
eigenvectors of ``T`` are recovered as ``y = D^(-1/2) z``, scaled to unit
Euclidean norm and given a deterministic sign.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.stats import rankdata

from .eigensolver import dense_topk, lanczos_topk
from .errors import DataError, SolverError
from .incidence import IncidenceMatrix

DENSE_MAX_N = 2048
MULTIPLICITY_TOL = 1e-8
SIDES = ("actor", "item", "graph")


class DegenerateSpectrumWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DiagonalFactors:
    D: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        for name in ("D", "U"):
            v = np.asarray(getattr(self, name), dtype=float)
            if np.any(v < 1):
                raise DataError(f"diagonal factor {name} has entries < 1; prune first")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class SymmetricSimilarity:
    """Symmetric nonnegative weight matrix over one side of the bipartite graph."""

    S: np.ndarray
    labels: tuple
    side: str = "graph"
    # integer degrees known in closed form (diversity or ubiquity); row sums otherwise
    exact_degrees: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DataError("similarity matrix must be square")
        if len(self.labels) != S.shape[0]:
            raise DataError("similarity labels do not match matrix size")
        if not np.all(np.isfinite(S)) or np.any(S < 0):
            raise DataError("similarity weights must be finite and nonnegative")
        if not np.allclose(S, S.T, rtol=1e-12, atol=1e-14):
            raise DataError("similarity matrix is not symmetric")
        S = (S + S.T) / 2
        S.setflags(write=False)
        object.__setattr__(self, "S", S)
        if self.exact_degrees is not None:
            d = np.asarray(self.exact_degrees, dtype=float)
            if d.shape != (S.shape[0],) or not np.allclose(d, S.sum(axis=1), rtol=1e-10):
                raise DataError("exact degrees do not match the row sums")
            object.__setattr__(self, "exact_degrees", d)
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def from_array(cls, S, labels=None):
        S = np.asarray(S, dtype=float)
        if labels is None:
            labels = tuple(str(i) for i in range(S.shape[0]))
        return cls(S, tuple(labels), "graph")

    @property
    def n(self):
        return self.S.shape[0]

    @cached_property
    def degrees(self):
        if self.exact_degrees is not None:
            return self.exact_degrees
        return self.S.sum(axis=1)

    def matvec(self, x):
        return self.S @ x

    def dense(self):
        return self.S


@dataclass(frozen=True)
class RowStochasticMatrix:
    """M-tilde (side="actor") or M-hat (side="item"), kept in factored form.

    The dense transition matrix is only materialized on demand through
    :attr:`T`; products with the similarity matrix go through the incidence.
    """

    incidence: IncidenceMatrix
    side: str
    factors: DiagonalFactors = field(init=False)

    def __post_init__(self):
        if self.side not in ("actor", "item"):
            raise DataError(f"side must be 'actor' or 'item', got {self.side!r}")
        object.__setattr__(
            self, "factors", DiagonalFactors(self.incidence.diversity, self.incidence.ubiquity)
        )

    @cached_property
    def _Mf(self):
        return self.incidence.M.astype(float)

    @property
    def labels(self):
        inc = self.incidence
        return inc.actor_labels if self.side == "actor" else inc.item_labels

    @property
    def n(self):
        return len(self.labels)

    @property
    def degrees(self):
        return self.factors.D if self.side == "actor" else self.factors.U

    def matvec(self, x):
        """Product with the symmetric similarity matrix of this side."""
        M = self._Mf
        x = np.asarray(x, dtype=float)
        shape = (-1,) + (1,) * (x.ndim - 1)
        if self.side == "actor":
            return M @ ((M.T @ x) / self.factors.U.reshape(shape))
        return M.T @ ((M @ x) / self.factors.D.reshape(shape))

    @cached_property
    def similarity(self):
        return build_similarity(self.incidence, self.side)

    def dense(self):
        return self.similarity.S

    @cached_property
    def T(self):
        T = self.similarity.S / self.degrees[:, None]
        T.setflags(write=False)
        return T


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray
    top_multiplicity: int
    k_requested: int
    labels: tuple
    degrees: np.ndarray
    method: str
    side: str = "graph"

    @property
    def degenerate(self):
        return self.top_multiplicity > 1

    def to_dict(self):
        return {
            "side": self.side,
            "method": self.method,
            "k_requested": self.k_requested,
            "top_multiplicity": self.top_multiplicity,
            "eigenvalues": self.eigenvalues.tolist(),
            "residual_norms": self.residual_norms.tolist(),
        }


@dataclass(frozen=True)
class ComplexityScores:
    labels: tuple
    raw: np.ndarray
    standardized: np.ndarray
    eigenvalue: float
    degenerate: bool
    kind: str
    degrees: np.ndarray
    top_multiplicity: int = 1

    def as_dict(self):
        return dict(zip(self.labels, self.raw.tolist()))


@dataclass(frozen=True)
class ReflectionsTrace:
    """Iterates of the Method of Reflections.

    ``actor_iterates[N]`` and ``item_iterates[N]`` are the plain recursion
    values. Rank comparisons use ``actor_directions``: each iterate shifted
    and rescaled to zero mean and unit sd, which preserves ranks but does
    not collapse to a constant in floating point.
    """

    actor_iterates: list
    item_iterates: list
    actor_directions: list
    iterations_run: int
    rank_converged_at: int | None
    rank_stable_at: int | None


def build_similarity(incidence: IncidenceMatrix, side="actor") -> SymmetricSimilarity:
    """S = M U^-1 M' over actors, or M' D^-1 M over items."""
    M = incidence.M.astype(float)
    d = incidence.diversity.astype(float)
    u = incidence.ubiquity.astype(float)
    if np.any(d == 0) or np.any(u == 0):
        raise DataError("incidence has empty rows or columns; prune first")
    if side == "actor":
        S = (M / u) @ M.T
        labels, deg = incidence.actor_labels, d
    elif side == "item":
        S = (M.T / d) @ M
        labels, deg = incidence.item_labels, u
    else:
        raise DataError(f"side must be 'actor' or 'item', got {side!r}")
    return SymmetricSimilarity((S + S.T) / 2, labels, side, exact_degrees=deg)


def build_mtilde(incidence: IncidenceMatrix) -> RowStochasticMatrix:
    return RowStochasticMatrix(incidence, "actor")


def build_mhat(incidence: IncidenceMatrix) -> RowStochasticMatrix:
    return RowStochasticMatrix(incidence, "item")


def _as_operator(op):
    if isinstance(op, (RowStochasticMatrix, SymmetricSimilarity)):
        return op
    return SymmetricSimilarity.from_array(op)


def _pearson(x, y):
    xc = x - x.mean()
    yc = y - y.mean()
    den = np.sqrt((xc @ xc) * (yc @ yc))
    if den == 0 or not np.isfinite(den):
        return 0.0
    return float((xc @ yc) / den)


def fix_sign(v, reference, labels):
    """Orient ``v`` so its correlation with ``reference`` is nonnegative.

    When the correlation vanishes (|corr| < 1e-12) the entry of the
    lexicographically smallest label is made nonnegative; zero entries defer
    to the next label.
    """
    corr = _pearson(v, np.asarray(reference, dtype=float))
    if abs(corr) >= 1e-12:
        return v if corr > 0 else -v
    scale = np.max(np.abs(v)) if v.size else 0.0
    for i in sorted(range(len(labels)), key=lambda i: labels[i]):
        if abs(v[i]) > 1e-12 * scale:
            return v if v[i] > 0 else -v
    return v


def eigenpairs(T, k=None, tol=1e-10, method="auto", max_restarts=500, seed=0) -> SpectrumResult:
    """Leading eigenpairs of a row-stochastic projection or a similarity graph.

    Parameters
    ----------
    T : RowStochasticMatrix, SymmetricSimilarity or array
        Arrays are taken as symmetric similarity matrices; the transition
        matrix is then ``D^-1 S`` with ``D`` the row sums.
    k : int, optional
        Number of pairs (default ``min(n, 6)``). More are returned when the
        top eigenvalue is repeated at least ``k`` times, so that the whole top
        eigenspace is available.
    tol : float
        Residual bound ``||T y - lambda y|| <= tol * ||T||`` for the iterative route.
    method : {"auto", "dense", "lanczos"}
        "auto" uses the dense solver up to n = 2048.
    """
    op = _as_operator(T)
    n = op.n
    if n < 2:
        raise DataError("eigenpairs needs a matrix of dimension >= 2")
    k = min(n, 6) if k is None else int(k)
    if k < 2 or k > n:
        raise DataError(f"need 2 <= k <= n, got k={k}, n={n}")
    d = np.asarray(op.degrees, dtype=float)
    if np.any(d <= 0):
        raise DataError("zero-degree vertex; prune first")
    if method == "auto":
        method = "dense" if n <= DENSE_MAX_N else "lanczos"
    inv_sqrt = 1 / np.sqrt(d)

    if method == "dense":
        N = op.dense() * inv_sqrt[:, None] * inv_sqrt[None, :]
        N = (N + N.T) / 2
        w, Z = dense_topk(N, n)
        top_mult = int(np.sum(w >= w[0] - MULTIPLICITY_TOL))
        keep = max(k, min(n, top_mult + 1))
        w, Z = w[:keep], Z[:, :keep]
    elif method == "lanczos":
        # residual in z maps to at most sqrt(max d / min d) times that in y
        tol_z = max(tol / np.sqrt(d.max() / d.min()), 1e-14)

        def nmat(z):
            return inv_sqrt * op.matvec(inv_sqrt * z)

        kk = k
        while True:
            w, Z, _ = lanczos_topk(nmat, n, kk, tol=tol_z, max_restarts=max_restarts, seed=seed)
            top_mult = int(np.sum(w >= w[0] - MULTIPLICITY_TOL))
            if top_mult < kk or kk == n:
                break
            kk = min(n, 2 * kk)
        keep = max(k, min(kk, top_mult + 1))
        w, Z = w[:keep], Z[:, :keep]
    else:
        raise DataError(f"unknown eigen method {method!r}")

    Y = Z * inv_sqrt[:, None]
    Y /= np.linalg.norm(Y, axis=0)
    labels = op.labels
    for j in range(Y.shape[1]):
        Y[:, j] = fix_sign(Y[:, j], d, labels)
    resid = np.linalg.norm(op.matvec(Y) / d[:, None] - Y * w, axis=0)
    if method == "lanczos" and np.any(resid > tol):
        raise SolverError(
            f"eigenpair residuals above tolerance {tol}: max {resid.max():.3e}",
            residuals=resid.tolist(),
        )
    side = getattr(op, "side", "graph")
    Y.setflags(write=False)
    return SpectrumResult(w, Y, resid, top_mult, k, labels, d, method, side)


def _degenerate_direction(spectrum: SpectrumResult):
    """Pick a deterministic vector in the top eigenspace, orthogonal to the degrees.

    Within the eigenspace of the repeated top eigenvalue (spanned by component
    indicators) take the vector that correlates most with the degrees, shifted
    to satisfy sum(y * d) = 0. If every component has the same mean degree,
    fall back to the indicator of the component holding the lexicographically
    smallest label.
    """
    m = spectrum.top_multiplicity
    d = spectrum.degrees
    Q, _ = np.linalg.qr(spectrum.eigenvectors[:, :m])
    p = Q @ (Q.T @ d)
    y = p - (p @ d) / d.sum()
    if np.linalg.norm(y) <= 1e-9 * np.linalg.norm(p):
        labels = spectrum.labels
        i0 = min(range(len(labels)), key=lambda i: labels[i])
        e = Q @ Q[i0, :]
        y = e - (e @ d) / d.sum()
    y = y / np.linalg.norm(y)
    return fix_sign(y, d, spectrum.labels)


def spectral_scores(T, kind="eci", spectrum=None, **solver_kw) -> ComplexityScores:
    """Second right eigenvector of the transition matrix as ComplexityScores.

    When the top eigenvalue is repeated the scores are flagged ``degenerate``
    and a deterministic vector from the top eigenspace is returned instead
    (see :func:`_degenerate_direction`).
    """
    if spectrum is None:
        spectrum = eigenpairs(T, **solver_kw)
    d = spectrum.degrees
    if spectrum.top_multiplicity > 1:
        warnings.warn(
            f"{kind}: top eigenvalue has multiplicity {spectrum.top_multiplicity}; "
            "the graph is disconnected and the scores are degenerate",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
        raw = _degenerate_direction(spectrum)
        degenerate = True
    else:
        raw = np.array(spectrum.eigenvectors[:, 1])
        degenerate = False
    std = raw.std()
    if raw.size >= 2 and std > 1e-300:
        standardized = (raw - raw.mean()) / std
    else:
        standardized = np.full(raw.shape, np.nan)
    return ComplexityScores(
        spectrum.labels,
        raw,
        standardized,
        float(spectrum.eigenvalues[1]),
        degenerate,
        kind,
        d,
        spectrum.top_multiplicity,
    )


def eci(incidence: IncidenceMatrix, spectrum=None, **solver_kw) -> ComplexityScores:
    """Economic Complexity Index: second right eigenvector of M-tilde.

    Unit Euclidean norm, oriented to correlate nonnegatively with diversity.
    """
    return spectral_scores(build_mtilde(incidence), "eci", spectrum, **solver_kw)


def pci(incidence: IncidenceMatrix, eci_scores=None, spectrum=None, **solver_kw):
    """Product Complexity Index: second right eigenvector of M-hat.

    Oriented so that the actor averages ``D^-1 M pci`` correlate positively
    with the ECI.
    """
    scores = spectral_scores(build_mhat(incidence), "pci", spectrum, **solver_kw)
    if eci_scores is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateSpectrumWarning)
            eci_scores = eci(incidence, **solver_kw)
    avg = (incidence.M.astype(float) @ scores.raw) / incidence.diversity
    corr = _pearson(avg, eci_scores.raw)
    if corr < -1e-12:
        scores = ComplexityScores(
            scores.labels,
            -scores.raw,
            -scores.standardized,
            scores.eigenvalue,
            scores.degenerate,
            scores.kind,
            scores.degrees,
            scores.top_multiplicity,
        )
    return scores


def standardize(v):
    """Subtract the mean and divide by the population standard deviation."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise DataError("standardize needs a vector of length >= 2")
    sd = v.std()
    if sd == 0 or not np.isfinite(sd):
        raise DataError("cannot standardize a vector with zero standard deviation")
    return (v - v.mean()) / sd


def _direction(v):
    c = v - v.mean()
    sd = c.std()
    return c / sd if sd > 0 else c


def method_of_reflections(incidence: IncidenceMatrix, max_iter=1000, tol=1e-10):
    """Alternate averaging between actor and item scores.

    ``k_c(N) = mean of k_p(N-1) over the actor's items`` and
    ``k_p(N) = mean of k_c(N-1) over the item's actors``, starting from
    diversity and ubiquity.

    Stops at the first even ``N`` where the actor ranking equals the one at
    ``N - 2`` and the rescaled iterate moved by at most ``tol`` (max norm);
    that ``N`` is ``rank_converged_at``. ``rank_stable_at`` records the first
    even ``N`` with an unchanged ranking regardless of movement, which can
    happen long before the ranking has settled.
    """
    M = incidence.M.astype(float)
    d = incidence.diversity.astype(float)
    u = incidence.ubiquity.astype(float)
    if np.any(d == 0) or np.any(u == 0):
        raise DataError("incidence has empty rows or columns; prune first")
    if np.all(d == d[0]):
        # M-tilde preserves constants, so every even actor iterate stays flat
        warnings.warn("diversity is constant: even actor iterates carry no ranking",
                      DegenerateSpectrumWarning, stacklevel=2)
    kc = [d.copy()]
    kp = [u.copy()]
    zc = [_direction(d)]
    zp = [_direction(u)]
    ranks = [rankdata(zc[0])]
    rank_stable_at = None
    rank_converged_at = None
    n_run = 0
    for N in range(1, max_iter + 1):
        kc.append((M @ kp[-1]) / d)
        kp.append((M.T @ kc[-2]) / u)
        zc.append(_direction((M @ zp[-1]) / d))
        zp.append(_direction((M.T @ zc[-2]) / u))
        ranks.append(rankdata(zc[-1]))
        n_run = N
        if N >= 2 and N % 2 == 0 and np.array_equal(ranks[N], ranks[N - 2]):
            if rank_stable_at is None:
                rank_stable_at = N
            if np.max(np.abs(zc[N] - zc[N - 2])) <= tol:
                rank_converged_at = N
                break
    return ReflectionsTrace(kc, kp, zc, n_run, rank_converged_at, rank_stable_at)
