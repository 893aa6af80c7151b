"""Dense Hermitian linear algebra for finite frames.

A vector sequence is stored as a 2-d array whose *rows* are the vectors, so a
sequence of ``n`` vectors in C^d has shape ``(n, d)``.  An empty sequence has
shape ``(0, d)``.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvergenceError",
    "EigenSystem",
    "as_sequence",
    "frame_operator",
    "gram",
    "eigh_ascending",
    "jacobi_eigh",
    "is_frame",
    "hermitian_defect",
]

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
CLAMP_TOL = 1e-12


class ConvergenceError(ArithmeticError):
    """The Jacobi sweeps did not reduce the off-diagonal mass in time."""


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in ascending order and the matching orthonormal basis.

    ``vectors[:, i]`` is the eigenvector for ``values[i]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def basis(self):
        """Eigenvectors as a list of 1-d arrays, in the order of ``values``."""
        return [self.vectors[:, i] for i in range(self.vectors.shape[1])]

    def reconstruct(self) -> np.ndarray:
        V = self.vectors
        return (V * self.values) @ V.conj().T


def as_sequence(F, dim=None) -> np.ndarray:
    """Coerce ``F`` to an ``(n, d)`` array of row vectors.

    ``dim`` is required when ``F`` is empty, and otherwise checked against the
    vectors' length.
    """
    if isinstance(F, np.ndarray) and F.ndim == 2:
        arr = F
    else:
        rows = [np.asarray(f).reshape(-1) for f in F]
        if not rows:
            if dim is None:
                raise ValueError("dimension of an empty sequence must be given")
            return np.zeros((0, int(dim)))
        lengths = {r.size for r in rows}
        if len(lengths) != 1:
            raise ValueError(f"vectors have mismatched dimensions {sorted(lengths)}")
        arr = np.vstack(rows)
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"vectors have dimension {arr.shape[1]}, expected {dim}")
    if arr.shape[1] == 0:
        raise ValueError("vectors must have dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    if np.iscomplexobj(arr) and not np.any(arr.imag):
        arr = arr.real
    return np.array(arr, dtype=complex if np.iscomplexobj(arr) else float)


def frame_operator(F, dim=None) -> np.ndarray:
    """S_F = sum_i f_i f_i^*, a d x d positive semidefinite matrix."""
    T = as_sequence(F, dim)
    S = T.T @ T.conj()
    return 0.5 * (S + S.conj().T)


def gram(F, dim=None) -> np.ndarray:
    """Gram matrix with entries G[i, j] = <f_j, f_i>."""
    T = as_sequence(F, dim)
    G = T.conj() @ T.T
    return 0.5 * (G + G.conj().T)


def hermitian_defect(S) -> float:
    S = np.asarray(S)
    return float(np.max(np.abs(S - S.conj().T))) if S.size else 0.0


def _off_mass(A):
    off = A - np.diag(np.diag(A))
    return np.sqrt(np.sum(np.abs(off) ** 2))


def jacobi_eigh(S, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Returns ``(values, vectors)`` unsorted, with ``S = V diag(values) V^*``.
    Complex entries are handled by first rotating the phase of the pivot so
    the 2x2 subproblem becomes real symmetric.
    """
    A = np.array(S, dtype=complex if np.iscomplexobj(S) else float)
    n = A.shape[0]
    V = np.eye(n, dtype=A.dtype)
    scale = np.sqrt(np.sum(np.abs(A) ** 2))
    if n < 2 or scale == 0.0:
        return np.real(np.diag(A)).copy(), V
    threshold = tol * scale
    complex_mode = np.iscomplexobj(A)
    for _ in range(max_sweeps):
        if _off_mass(A) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= 1e-300 or r < 1e-18 * scale:
                    continue
                app = A[p, p].real
                aqq = A[q, q].real
                theta = (aqq - app) / (2.0 * r)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                if complex_mode:
                    phase = apq / r
                    W = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                else:
                    sgn = 1.0 if apq > 0 else -1.0
                    W = np.array([[c, s], [-s * sgn, c * sgn]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ W
                A[idx, :] = W.conj().T @ A[idx, :]
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ W
    else:
        if _off_mass(A) > threshold:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal mass {_off_mass(A):.3e})"
            )
    return np.real(np.diag(A)).copy(), V


def eigh_ascending(S, method: str = "jacobi") -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues.

    Parameters
    ----------
    S : array_like
        Square Hermitian matrix (checked to 1e-10 relative to its largest entry).
    method : {"jacobi", "lapack"}
        ``"jacobi"`` runs the cyclic Jacobi solver in this module,
        ``"lapack"`` defers to :func:`numpy.linalg.eigh`.

    Returns
    -------
    EigenSystem
        Values sorted ascending; tiny negative values (rounding noise) are
        clamped to zero.
    """
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError("matrix entries must be finite")
    scale = max(1.0, float(np.max(np.abs(S)))) if S.size else 1.0
    if hermitian_defect(S) > HERMITIAN_TOL * scale:
        raise ValueError("matrix is not Hermitian")
    if np.iscomplexobj(S) and not np.any(S.imag):
        S = S.real
    S = 0.5 * (S + S.conj().T)
    if method == "jacobi":
        w, V = jacobi_eigh(S)
    elif method == "lapack":
        w, V = np.linalg.eigh(S)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(w, kind="stable")
    w = w[order]
    V = V[:, order]
    w = np.where((w < 0) & (w > -CLAMP_TOL * scale), 0.0, w)
    return EigenSystem(values=w, vectors=V)


def is_frame(F, tol: float = 1e-10, dim=None) -> bool:
    """True iff the vectors span C^d, i.e. the smallest eigenvalue of S_F exceeds ``tol``."""
    S = frame_operator(F, dim)
    return bool(eigh_ascending(S).values[0] > tol)
