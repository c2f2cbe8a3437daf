"""Diffusion-map, kernel-PCA and correspondence-analysis coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateSpectrumError
from .spectral_core import RowStochasticMatrix, SpectrumResult

CONSTRUCTIONS = ("diffusion", "kernel_pca", "correspondence")


@dataclass(frozen=True)
class Embedding:
    labels: tuple
    coordinates: np.ndarray
    t: int
    construction: str
    eigenvalues: np.ndarray = None

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise DataError(f"unknown construction {self.construction!r}")
        c = np.asarray(self.coordinates, dtype=float)
        if c.ndim != 2 or c.shape[0] != len(self.labels):
            raise DataError("coordinates must be an n x m matrix aligned with the labels")
        c.setflags(write=False)
        object.__setattr__(self, "coordinates", c)
        object.__setattr__(self, "labels", tuple(self.labels))

    def squared_distances(self):
        # explicit differences; the Gram-matrix form loses precision for nearby points
        X = self.coordinates
        diff = X[:, None, :] - X[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)


def _check_t(t, minimum):
    if int(t) != t or t < minimum:
        raise DataError(f"diffusion time must be an integer >= {minimum}, got {t}")
    return int(t)


def diffusion_coordinates(
    spectrum: SpectrumResult, t=1, dims=1, construction="diffusion", normalization="diffusion"
):
    """Coordinates ``|lambda_{j+1}|^t * y^(j+1)_i`` for ``j = 1..dims``.

    Column 1 uses the unit-norm, sign-fixed ECI eigenvector, so its ordering
    is the ECI ordering. Later eigenvectors are scaled by the same factor
    that makes the second one unit-norm under ``y' D y`` normalization; with
    that common scale, squared Euclidean distances between rows are
    proportional (one global constant) to the diffusion distance.

    Parameters
    ----------
    normalization : {"diffusion", "unit"}
        "unit" uses every unit-norm eigenvector as is; columns after the
        first then carry different scales and distances are no longer
        proportional to the diffusion distance.
    """
    if normalization not in ("diffusion", "unit"):
        raise DataError(f"unknown normalization {normalization!r}")
    t = _check_t(t, 0)
    n = len(spectrum.labels)
    if spectrum.top_multiplicity > 1:
        raise DegenerateSpectrumError(
            f"diffusion coordinates need a simple top eigenvalue "
            f"(top_multiplicity={spectrum.top_multiplicity})",
            top_multiplicity=spectrum.top_multiplicity,
        )
    if dims < 1 or dims > n - 1:
        raise DataError(f"dims must lie in [1, {n - 1}], got {dims}")
    if dims + 1 > spectrum.eigenvalues.size:
        raise DataError(
            f"spectrum holds {spectrum.eigenvalues.size} pairs; {dims + 1} needed for dims={dims}"
        )
    d = spectrum.degrees
    Y = spectrum.eigenvectors[:, 1 : dims + 1]
    lam = spectrum.eigenvalues[1 : dims + 1]
    if normalization == "unit":
        Psi = Y
    else:
        dnorm = np.sqrt(np.einsum("ij,i,ij->j", Y, d, Y))
        Psi = Y / dnorm * dnorm[0]
    coords = Psi * (np.abs(lam) ** t)
    return Embedding(spectrum.labels, coords, t, construction, np.array(lam))


def correspondence_coordinates(spectrum: SpectrumResult, dims=1):
    """Simple correspondence analysis row coordinates: the t = 1 diffusion map."""
    return diffusion_coordinates(spectrum, 1, dims, construction="correspondence")


def transition_power(T, t):
    """T^t by repeated right multiplication (fixed association order)."""
    T = _dense_T(T)
    t = _check_t(t, 0)
    P = np.eye(T.shape[0])
    for _ in range(t):
        P = P @ T
    return P


def _dense_T(T):
    if isinstance(T, RowStochasticMatrix):
        return np.asarray(T.T)
    return np.asarray(T, dtype=float)


def _diag(D, n):
    if hasattr(D, "D"):
        D = D.D
    D = np.asarray(D, dtype=float)
    if D.ndim == 2:
        D = np.diag(D)
    if D.shape != (n,):
        raise DataError("degree vector does not match the transition matrix")
    return D


def diffusion_distance_direct(T, D, i, j, t=1):
    """(x_i(t) - x_j(t))' D^-1 (x_i(t) - x_j(t)) with x_i(t) the i-th row of T^t.

    ``D`` may be a vector of degrees, a diagonal matrix or DiagonalFactors
    (its ``D`` side is used).
    """
    t = _check_t(t, 1)
    Tm = _dense_T(T)
    d = _diag(D, Tm.shape[0])
    xi = np.zeros(Tm.shape[0])
    xj = np.zeros(Tm.shape[0])
    xi[i] = 1.0
    xj[j] = 1.0
    for _ in range(t):
        xi = xi @ Tm
        xj = xj @ Tm
    diff = xi - xj
    return float(diff @ (diff / d))


def diffusion_distance_matrix(T, D, t=1):
    """All pairwise direct diffusion distances."""
    t = _check_t(t, 1)
    Tm = _dense_T(T)
    d = _diag(D, Tm.shape[0])
    X = transition_power(Tm, t)
    diff = X[:, None, :] - X[None, :, :]
    return np.einsum("ijk,ijk,k->ij", diff, diff, 1 / d)


def diffusion_kernel(T, D, t=1):
    """K(t) = T^t D^-1 (T^t)'."""
    t = _check_t(t, 1)
    Tm = _dense_T(T)
    d = _diag(D, Tm.shape[0])
    P = transition_power(Tm, t)
    K = (P / d) @ P.T
    return (K + K.T) / 2


def kernel_pca_coordinates(K, dims=None, labels=None, t=0):
    """Coordinates ``sqrt(mu_j) * w^(j)_i`` from the eigen-decomposition of ``K``.

    Eigenvalues are taken in descending order; each eigenvector is oriented
    so its largest-magnitude entry is positive.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if K.ndim != 2 or K.shape[1] != n:
        raise DataError("kernel must be square")
    if not np.allclose(K, K.T, rtol=1e-10, atol=1e-14):
        raise DataError("kernel must be symmetric")
    dims = n if dims is None else int(dims)
    if dims < 1 or dims > n:
        raise DataError(f"dims must lie in [1, {n}], got {dims}")
    mu, W = np.linalg.eigh((K + K.T) / 2)
    if mu.min() < -1e-8:
        raise DataError(f"kernel is not positive semidefinite (eigenvalue {mu.min():.3e})")
    order = np.argsort(-mu, kind="stable")[:dims]
    mu = np.clip(mu[order], 0, None)
    W = W[:, order]
    for j in range(W.shape[1]):
        if W[np.argmax(np.abs(W[:, j])), j] < 0:
            W[:, j] = -W[:, j]
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
    return Embedding(labels, W * np.sqrt(mu), t, "kernel_pca", mu)
