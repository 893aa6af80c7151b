"""Vector sequences with prescribed norms and frame operator.

The construction goes through the Schur-Horn theorem: a Hermitian matrix with
diagonal ``a`` and spectrum ``mu`` exists iff ``a`` is majorized by ``mu``.
Such a matrix is the Gram matrix of the wanted vectors, and the rotation that
builds it gives the vectors' coordinates directly.
"""

import numpy as np

from .majorization import DEFAULT_TOL, as_vector, majorizes
from .solver import BlockSpectrum, ProblemData, optimal_spectrum
from .spectral import as_sequence, eigh_ascending, frame_operator

__all__ = ["schur_horn", "schur_horn_matrix", "design_sequence", "complete"]

# diagonal differences below this (relative) are treated as rounding noise
SNAP_TOL = 1e-13


def _pad(x, n):
    return np.concatenate([x, np.zeros(n - x.size)])


def schur_horn(diag_target, spectrum, tol: float = DEFAULT_TOL):
    """Real orthogonal ``U`` and ``M = U diag(spectrum) U^T`` with ``diag(M) = diag_target``.

    Works on the diagonal matrix of ``spectrum``: the largest pending target
    is bracketed by two adjacent free diagonal entries ``p >= a >= q`` (free
    entries are kept sorted), one Givens rotation in their plane puts ``a`` on
    the first and ``p + q - a`` on the second, and the first is frozen.  The
    free block stays diagonal and still majorizes the pending targets, so
    ``n - 1`` rotations finish the job.  Column ``j`` of ``U`` belongs to
    ``spectrum[j]``.
    """
    a = as_vector(diag_target)
    lam = as_vector(spectrum)
    n = max(a.size, lam.size)
    a, lam = _pad(a, n), _pad(lam, n)
    scale = max(1.0, float(np.max(np.abs(lam))), float(np.max(np.abs(a))))
    if not majorizes(a, lam, tol * scale):
        raise ValueError("diagonal is not majorized by the spectrum; no such matrix exists")

    snap = SNAP_TOL * scale
    M = np.diag(lam)
    V = np.eye(n)
    cur = lam.copy()
    free = sorted(range(n), key=lambda i: -cur[i])
    order = np.argsort(-a, kind="stable")
    position = np.empty(n, dtype=int)
    for t in order[:-1]:
        target = a[t]
        vals = cur[free]
        j = int(np.searchsorted(-vals, -target, side="right")) - 1
        j = min(max(j, 0), len(free) - 2)
        P, Q = free[j], free[j + 1]
        hi, lo = cur[P], cur[Q]
        # s = sqrt(1 - c^2) turns rounding noise of 1e-16 into a 1e-8 rotation,
        # so take both from their own differences and snap noise to zero
        up, down = hi - target, target - lo
        up = 0.0 if up <= snap else up
        down = 0.0 if down <= snap else down
        if up + down == 0.0:
            c, s = 1.0, 0.0
        else:
            c, s = np.sqrt(down), np.sqrt(up)
            norm = np.hypot(c, s)
            c, s = c / norm, s / norm
        W = np.array([[c, -s], [s, c]])
        idx = [P, Q]
        M[:, idx] = M[:, idx] @ W
        M[idx, :] = W.T @ M[idx, :]
        V[:, idx] = V[:, idx] @ W
        cur[Q] = hi + lo - target
        cur[P] = target
        position[t] = P
        del free[j]
    position[order[-1]] = free[0]
    M = M[np.ix_(position, position)]
    M = 0.5 * (M + M.T)
    U = V.T[position, :]
    return M, U


def schur_horn_matrix(diag_target, spectrum, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Hermitian matrix with the given diagonal and eigenvalues (zero-padded to a common size)."""
    return schur_horn(diag_target, spectrum, tol)[0]


def _basis_rows(basis, d):
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        B = np.asarray(basis)
    else:
        B = np.vstack([np.asarray(v).reshape(-1) for v in basis])
    if B.shape != (d, d):
        raise ValueError(f"basis must hold {d} vectors of dimension {d}, got {B.shape}")
    if np.max(np.abs(B.conj() @ B.T - np.eye(d))) > 1e-8:
        raise ValueError("basis is not orthonormal")
    return B


def design_sequence(norms, mu, basis, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectors ``g_i`` with ``|g_i|^2 = norms[i]`` and ``S_G = sum_j mu[j] v_j v_j^*``.

    ``basis`` is a list of orthonormal vectors ``v_j`` (or an array with the
    vectors as rows), paired index by index with ``mu``.  Returns a ``(k, d)``
    array whose rows are the ``g_i``, in the order of ``norms``.
    """
    a = as_vector(norms)
    mu = as_vector(mu)
    if np.any(mu < 0):
        raise ValueError("mu must be nonnegative")
    d, k = mu.size, a.size
    B = _basis_rows(basis, d)
    n = max(d, k)
    _, U = schur_horn(_pad(a, n), _pad(mu, n), tol)
    coeff = U[:k, :d] * np.sqrt(mu)
    G = coeff @ B
    return G if np.iscomplexobj(G) and np.any(G.imag) else G.real


def complete(F0, norms, dim=None, tol: float = DEFAULT_TOL, method: str = "jacobi"):
    """Optimal completion of ``F0`` by vectors with squared norms ``norms``.

    Returns ``(G, spectrum)``: the rows of ``G`` are the added vectors, in the
    order of ``norms`` as given, and ``spectrum`` is the optimal
    :class:`BlockSpectrum`.  ``dim`` is needed only when ``F0`` is empty.
    """
    F0 = as_sequence(F0, dim)
    eig = eigh_ascending(frame_operator(F0), method=method)
    pd = ProblemData(eig.values, norms, tol)
    nu = optimal_spectrum(pd)
    mu = nu.mu()
    G_sorted = design_sequence(pd.a, mu, eig.vectors.T, tol)
    # rows of G_sorted follow pd.a (descending); put them back in input order
    order = np.argsort(-pd.norms_input, kind="stable")
    G = np.empty_like(G_sorted)
    G[order] = G_sorted
    return G, nu
