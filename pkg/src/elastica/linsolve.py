"""Direct solution of the per-step sparse systems.

Sparse LU with partial pivoting on the assembled cyclic-banded matrix; the
periodic corner couplings are handled by the general sparse structure.  A
relative residual check runs on every solve: the schemes are only
conditionally well behaved and silent drift is the failure mode to catch.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverAccuracyError, SolverFailureError
from .scheme import LinearSystem

RESIDUAL_THRESHOLD = 1e-10

# Largest dimension densified to locate the offending pivot after a
# factorization failure (the failure path is terminal, so cost is moot).
_PIVOT_DIAGNOSE_LIMIT = 2000


@dataclass(eq=False)
class Factorization:
    """Opaque factored form of a step matrix."""

    _lu: spla.SuperLU
    dim: int
    matrix_nonzeros: int
    factor_nonzeros: int

    @property
    def fill_ratio(self) -> float:
        return self.factor_nonzeros / max(self.matrix_nonzeros, 1)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self._lu.solve(rhs)


def _locate_zero_pivot(matrix: sp.csc_matrix):
    """Dense elimination with partial pivoting, reporting the first
    column without a usable pivot."""
    a = matrix.toarray()
    dim = a.shape[0]
    scale = np.abs(a).max()
    if scale == 0.0:
        return 0
    for k in range(dim):
        p = k + np.argmax(np.abs(a[k:, k]))
        if abs(a[p, k]) <= dim * np.finfo(float).eps * scale:
            return k
        if p != k:
            a[[k, p]] = a[[p, k]]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k] / a[k, k], a[k, k + 1:])
    return None


def factorize(matrix: sp.csc_matrix) -> Factorization:
    """LU-factor a sparse matrix, raising SolverFailureError when singular."""
    if not sp.issparse(matrix):
        matrix = sp.csc_matrix(matrix)
    matrix = matrix.tocsc()
    if not np.isfinite(matrix.data).all():
        raise SolverFailureError("matrix contains NaN or inf")
    try:
        lu = spla.splu(matrix)
    except RuntimeError as exc:
        pivot = None
        if matrix.shape[0] <= _PIVOT_DIAGNOSE_LIMIT:
            pivot = _locate_zero_pivot(matrix)
        raise SolverFailureError(f"factorization failed: {exc}", pivot_index=pivot) from exc
    return Factorization(
        _lu=lu,
        dim=matrix.shape[0],
        matrix_nonzeros=matrix.nnz,
        factor_nonzeros=lu.nnz,
    )


def solve(system: LinearSystem):
    """Solve one step system and split the unknowns.

    Returns ``(x_next, y_next)`` as (N, n) arrays.  The relative residual
    ``|A z - b|_inf / (|A|_inf |z|_inf + |b|_inf)`` must not exceed
    ``RESIDUAL_THRESHOLD``.
    """
    matrix, rhs = system.matrix, system.rhs
    if not np.isfinite(rhs).all():
        raise SolverFailureError("right-hand side contains NaN or inf")
    z = factorize(matrix).solve(rhs)
    if not np.isfinite(z).all():
        raise SolverFailureError("solution contains NaN or inf")
    residual = np.abs(matrix @ z - rhs).max()
    norm_a = np.abs(matrix).sum(axis=1).max()
    denom = norm_a * np.abs(z).max() + np.abs(rhs).max()
    relative = residual / denom if denom > 0.0 else residual
    if relative > RESIDUAL_THRESHOLD:
        raise SolverAccuracyError(residual=relative, threshold=RESIDUAL_THRESHOLD)
    return system.split(z)
