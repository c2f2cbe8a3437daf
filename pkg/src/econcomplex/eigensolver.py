"""Top-k eigenpairs of real symmetric operators.

Two routes: a dense one built on LAPACK (``numpy.linalg.eigh``) and a
restarted Lanczos iteration with full reorthogonalization that locks
converged Ritz pairs and deflates them from later Krylov subspaces. The
Lanczos route only needs a matrix-vector product.
"""

from __future__ import annotations

import numpy as np

from .errors import SolverError

_BREAKDOWN = 1e-12


def dense_topk(N, k):
    """Largest ``k`` eigenpairs of the dense symmetric matrix ``N``, descending."""
    N = np.asarray(N, dtype=float)
    w, V = np.linalg.eigh(N)
    order = np.argsort(-w, kind="stable")[:k]
    return w[order], V[:, order]


def _orthogonalize(v, bases):
    # two passes of classical Gram-Schmidt ("twice is enough")
    for _ in range(2):
        for B in bases:
            if B.shape[1]:
                v = v - B @ (B.T @ v)
    return v


def _unit(v):
    nv = np.linalg.norm(v)
    return v / nv, nv


def lanczos_topk(matvec, n, k, *, tol=1e-12, ncv=None, max_restarts=500, seed=0):
    """Largest ``k`` eigenpairs of a symmetric operator given by ``matvec``.

    Thick-restart Lanczos: after each cycle the best unconverged Ritz vectors
    are kept and the basis is extended from the residual. Converged pairs are
    locked and every new basis vector is orthogonalized against them. Once
    ``k`` pairs are locked, a cycle from a fresh random vector checks that no
    larger eigenvalue was missed (e.g. a second copy of a repeated one).

    Parameters
    ----------
    matvec : callable
        ``x -> A @ x`` for a symmetric ``n x n`` operator ``A``.
    tol : float
        A pair is locked once ``||A x - theta x|| <= tol * scale`` with
        ``scale`` the largest Ritz value magnitude seen.
    ncv : int, optional
        Maximum basis size per cycle.
    max_restarts : int
        Raises :class:`SolverError` with the outstanding residuals when exceeded.
    seed : int
        Seed of the random start vectors; fixed so runs are reproducible.

    Returns
    -------
    values : ndarray, descending
    vectors : ndarray, orthonormal columns
    residuals : ndarray, ``||A x - theta x||`` per pair
    """
    if k < 1 or k > n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    ncv = min(n, ncv or max(2 * k + 8, 30))

    locked = np.zeros((n, 0))
    locked_vals = []
    scale = 1e-300
    target = k
    verifying = False
    last_resid = None

    def fresh():
        for _ in range(3):
            v = _orthogonalize(rng.standard_normal(n), (locked,))
            v, nv = _unit(v)
            if nv > 1e-8:
                return v
        return None

    v = fresh()
    V = v[:, None]
    W = matvec(v)[:, None]

    for _ in range(max_restarts + 1):
        room = n - locked.shape[1]
        m = min(ncv, room)
        while V.shape[1] < m:
            nxt = _orthogonalize(W[:, -1], (locked, V))
            nxt, nrm = _unit(nxt)
            if nrm < _BREAKDOWN * max(scale, 1.0):
                # invariant subspace: continue from a random direction
                nxt = _orthogonalize(rng.standard_normal(n), (locked, V))
                nxt, nrm = _unit(nxt)
                if nrm < 1e-8:
                    break
            V = np.column_stack([V, nxt])
            W = np.column_stack([W, matvec(nxt)])

        H = V.T @ W
        H = (H + H.T) / 2
        theta, S = np.linalg.eigh(H)
        order = np.argsort(-theta, kind="stable")
        theta, S = theta[order], S[:, order]
        X = V @ S
        AX = W @ S
        res = np.linalg.norm(AX - X * theta, axis=0)
        scale = max(scale, float(np.max(np.abs(theta))))

        if verifying:
            floor = sorted(locked_vals, reverse=True)[k - 1]
            if theta[0] <= floor + tol * scale:
                break
            verifying = False
            target = locked.shape[1] + 1

        need = target - locked.shape[1]
        converged = [i for i in range(min(need, theta.size)) if res[i] <= tol * scale]
        if converged:
            locked = np.column_stack([locked, X[:, converged]])
            locked_vals.extend(theta[converged].tolist())
        rest = [i for i in range(theta.size) if i not in converged]
        last_resid = res[: min(need, theta.size)]

        if locked.shape[1] >= target:
            if locked.shape[1] >= n:
                break
            verifying = True
            v = fresh()
            if v is None:
                break
            V = v[:, None]
            W = matvec(v)[:, None]
            continue

        keep = rest[: max(need, m // 2)]
        if len(keep) >= n - locked.shape[1]:
            keep = keep[: max(n - locked.shape[1] - 1, 1)]
        V = X[:, keep]
        W = AX[:, keep]
        r = _orthogonalize(AX[:, keep[0]] - theta[keep[0]] * X[:, keep[0]], (locked, V))
        r, nr = _unit(r)
        if nr < _BREAKDOWN * max(scale, 1.0):
            continue
        V = np.column_stack([V, r])
        W = np.column_stack([W, matvec(r)])
    else:
        raise SolverError(
            f"Lanczos did not converge after {max_restarts} restarts "
            f"({locked.shape[1]} of {k} pairs locked)",
            residuals=None if last_resid is None else last_resid.tolist(),
        )

    vals = np.array(locked_vals)
    order = np.argsort(-vals, kind="stable")[:k]
    vecs = locked[:, order]
    vals = vals[order]
    residuals = np.array(
        [np.linalg.norm(matvec(vecs[:, i]) - vals[i] * vecs[:, i]) for i in range(vals.size)]
    )
    return vals, vecs, residuals
