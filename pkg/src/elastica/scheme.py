"""Per-step linear systems of the semi-implicit schemes.

Each time step freezes all geometric coefficients (edge lengths, tangents,
normal projectors, squared curvature) at the current level and solves one
sparse linear system for the next positions and curvature vectors jointly.
Unknown ordering: all position components first, then all curvature
components, vertex-major within each block.
"""

from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Optional

import numpy as np
import scipy.sparse as sp

from .errors import InvalidMonitorError, NonFiniteInputError
from .mesh import CurvatureField, CurveState, EdgeData, Grid, edge_data

__all__ = [
    "Monitor",
    "DirichletScheme",
    "ExtendedScheme",
    "LinearSystem",
    "init_curvature",
    "assemble_step",
    "assemble_step_extended",
    "DIRICHLET_TERMS",
    "EXTENDED_TERMS",
]


@dataclass(frozen=True)
class Monitor:
    """Positive weight on the ambient space biasing vertex density.

    Higher values attract vertices closer together.  ``kind`` is one of
    ``constant``, ``lemniscate-quadratic`` (``1 + (xi_1 - 1)^2 / 10``), or
    ``tabulated`` (arbitrary user-supplied map, evaluated at vertices).
    """

    kind: str
    value: float = 1.0
    table: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @classmethod
    def constant(cls, value: float = 1.0) -> "Monitor":
        if value <= 0.0:
            raise InvalidMonitorError(f"constant monitor must be positive, got {value}")
        return cls(kind="constant", value=value)

    @classmethod
    def lemniscate_quadratic(cls) -> "Monitor":
        return cls(kind="lemniscate-quadratic")

    @classmethod
    def tabulated(cls, table: Callable[[np.ndarray], np.ndarray]) -> "Monitor":
        return cls(kind="tabulated", table=table)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            values = np.full(points.shape[0], self.value)
        elif self.kind == "lemniscate-quadratic":
            values = 1.0 + (points[:, 0] - 1.0) ** 2 / 10.0
        elif self.kind == "tabulated":
            values = np.asarray(self.table(points), dtype=float)
            if values.shape != (points.shape[0],):
                raise InvalidMonitorError(
                    f"tabulated monitor returned shape {values.shape}, "
                    f"expected ({points.shape[0]},)"
                )
        else:
            raise InvalidMonitorError(f"unknown monitor kind {self.kind!r}")
        if not np.isfinite(values).all() or np.any(values <= 0.0):
            raise InvalidMonitorError("monitor values must be positive and finite")
        return values


@dataclass(frozen=True)
class DirichletScheme:
    """Parameters of the Dirichlet-penalized flow step."""

    lam: float       # weight of the parametric Dirichlet energy
    delta: float     # time step size

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class ExtendedScheme:
    """Parameters of the length-penalized flow with epsilon-weighted
    tangential motion and a monitor-weighted redistribution term."""

    lam_tilde: float   # weight of the length penalty
    epsilon: float     # weight of tangential velocity and monitor stiffness
    monitor: Monitor = field(default_factory=Monitor.constant)
    delta: float = 1e-3

    def __post_init__(self):
        if self.lam_tilde <= 0.0:
            raise ValueError(f"lam_tilde must be positive, got {self.lam_tilde}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")


SchemeParams = DirichletScheme | ExtendedScheme

# Toggleable assembly terms (used by the oracle-equivalence tests).
DIRICHLET_TERMS = frozenset({"mass", "bending", "transport", "dirichlet", "curvature"})
EXTENDED_TERMS = frozenset({"mass", "bending", "transport", "length", "monitor", "curvature"})


@dataclass(eq=False)
class LinearSystem:
    """Sparse cyclic-banded system for one time step.

    Unknowns ``z = [x_0, ..., x_{N-1}, y_0, ..., y_{N-1}]`` flattened
    component-wise; ``dim = 2 N n``.
    """

    matrix: sp.csc_matrix
    rhs: np.ndarray
    n_vertices: int
    dimension: int

    @property
    def dim(self) -> int:
        return 2 * self.n_vertices * self.dimension

    def split(self, z: np.ndarray):
        """Split a solution vector into position and curvature arrays."""
        nn = self.n_vertices * self.dimension
        shape = (self.n_vertices, self.dimension)
        return z[:nn].reshape(shape), z[nn:].reshape(shape)


def init_curvature(state: CurveState, grid: Grid) -> CurvatureField:
    """Discrete curvature determined by the initial polygon.

    The defining lumped-mass system is diagonal, so the solution is the
    closed form ``y_j = 2 (tau_{j+1} - tau_j) / (q_j + q_{j+1})``.
    """
    if grid.n_vertices != state.n_vertices:
        raise ValueError("grid and state vertex counts differ")
    edges = edge_data(state, CurvatureField(np.zeros_like(state.x)))
    q = edges.lengths
    tau = edges.tangents
    y = 2.0 * (np.roll(tau, -1, axis=0) - tau) / (q + np.roll(q, -1))[:, None]
    return CurvatureField(y)


class _TripletBuilder:
    """Accumulates COO triplets in vectorized (N,)-sized batches."""

    def __init__(self, n_vertices, dimension):
        self.N = n_vertices
        self.n = dimension
        self.rows = []
        self.cols = []
        self.vals = []
        self.verts = np.arange(n_vertices)

    def scalar(self, row_off, col_off, col_shift, coef):
        """Couple component c of each vertex v to component c of vertex
        v+col_shift with scalar weight coef[v] (identity in components)."""
        v = self.verts
        w = (v + col_shift) % self.N
        for c in range(self.n):
            self.rows.append(row_off + v * self.n + c)
            self.cols.append(col_off + w * self.n + c)
            self.vals.append(coef)

    def block(self, row_off, col_off, col_shift, blocks):
        """Couple vertex v to vertex v+col_shift through the n-by-n
        matrices blocks[v]."""
        v = self.verts
        w = (v + col_shift) % self.N
        for c in range(self.n):
            for k in range(self.n):
                self.rows.append(row_off + v * self.n + c)
                self.cols.append(col_off + w * self.n + k)
                self.vals.append(blocks[:, c, k])

    def tocsc(self):
        dim = 2 * self.N * self.n
        rows = np.concatenate(self.rows)
        cols = np.concatenate(self.cols)
        vals = np.concatenate(self.vals)
        return sp.csc_matrix((vals, (rows, cols)), shape=(dim, dim))


def _check_finite(state: CurveState, curvature: CurvatureField):
    if not np.isfinite(state.x).all():
        raise NonFiniteInputError("positions contain NaN or inf")
    if not np.isfinite(curvature.y).all():
        raise NonFiniteInputError("curvature contains NaN or inf")
    if curvature.y.shape != state.x.shape:
        raise ValueError("state and curvature shapes differ")


def _curvature_identity_rows(builder, q, q_out):
    """Rows defining the next curvature from the next positions:
    lumped mass on y against the arclength second-difference of x."""
    N, n = builder.N, builder.n
    y_off = N * n
    builder.scalar(y_off, y_off, 0, (q + q_out) / 2.0)
    inv_in = 1.0 / q
    inv_out = 1.0 / q_out
    builder.scalar(y_off, 0, 1, -inv_out)
    builder.scalar(y_off, 0, 0, inv_out + inv_in)
    builder.scalar(y_off, 0, -1, -inv_in)


def _bending_rows(builder, edges: EdgeData):
    """Projected curvature stiffness in the position equations."""
    q = edges.lengths
    proj_in = edges.projectors / q[:, None, None]
    proj_out = np.roll(proj_in, -1, axis=0)
    builder.block(0, builder.N * builder.n, 1, proj_out)
    builder.block(0, builder.N * builder.n, 0, -(proj_out + proj_in))
    builder.block(0, builder.N * builder.n, -1, proj_in)


def _transport_rows(builder, edges: EdgeData):
    """Squared-curvature transport acting on the next positions."""
    d_in = edges.curvature_weights
    d_out = np.roll(d_in, -1)
    builder.scalar(0, 0, 1, d_out)
    builder.scalar(0, 0, 0, -(d_out + d_in))
    builder.scalar(0, 0, -1, d_in)


def _difference_stiffness_rows(builder, coef_in, coef_out):
    """Weighted second-difference rows: coefficients are stored so that a
    constant vector is annihilated exactly on uniform weights."""
    builder.scalar(0, 0, -1, -coef_in)
    builder.scalar(0, 0, 0, coef_in + coef_out)
    builder.scalar(0, 0, 1, -coef_out)


def assemble_step(
    state: CurveState,
    curvature: CurvatureField,
    params: DirichletScheme,
    grid: Grid,
    terms: Optional[FrozenSet[str]] = None,
) -> LinearSystem:
    """System of the Dirichlet-penalized step.

    Position rows: lumped mass velocity + projected curvature stiffness
    + squared-curvature transport + Dirichlet stiffness in the parameter.
    Curvature rows: lumped mass identity against arclength differences.
    """
    _check_finite(state, curvature)
    if terms is None:
        terms = DIRICHLET_TERMS
    elif not terms <= DIRICHLET_TERMS:
        raise ValueError(f"unknown terms {set(terms) - DIRICHLET_TERMS}")
    N, n = state.n_vertices, state.dimension
    edges = edge_data(state, curvature)
    q = edges.lengths
    q_out = np.roll(q, -1)
    h_in = grid.incoming_widths()
    h_out = grid.widths

    builder = _TripletBuilder(N, n)
    rhs = np.zeros(2 * N * n)
    if "mass" in terms:
        mass = (q + q_out) / (2.0 * params.delta)
        builder.scalar(0, 0, 0, mass)
        rhs[: N * n] = (mass[:, None] * state.x).ravel()
    if "bending" in terms:
        _bending_rows(builder, edges)
    if "transport" in terms:
        _transport_rows(builder, edges)
    if "dirichlet" in terms:
        _difference_stiffness_rows(builder, params.lam / h_in, params.lam / h_out)
    if "curvature" in terms:
        _curvature_identity_rows(builder, q, q_out)
    return LinearSystem(builder.tocsc(), rhs, N, n)


def assemble_step_extended(
    state: CurveState,
    curvature: CurvatureField,
    params: ExtendedScheme,
    grid: Grid,
    terms: Optional[FrozenSet[str]] = None,
) -> LinearSystem:
    """System of the length-penalized step with weighted tangential motion.

    The velocity integral carries the edgewise matrix
    ``A_j = P_j + epsilon tau_j tau_j^T`` inside a consistent (unlumped)
    mass; the redistribution stiffness is weighted by the piecewise linear
    interpolant of the monitor at the current vertices.  The curvature rows
    are identical to the Dirichlet scheme's.
    """
    _check_finite(state, curvature)
    if terms is None:
        terms = EXTENDED_TERMS
    elif not terms <= EXTENDED_TERMS:
        raise ValueError(f"unknown terms {set(terms) - EXTENDED_TERMS}")
    N, n = state.n_vertices, state.dimension
    edges = edge_data(state, curvature)
    q = edges.lengths
    tau = edges.tangents
    q_out = np.roll(q, -1)
    h_in = grid.incoming_widths()
    h_out = grid.widths

    builder = _TripletBuilder(N, n)
    rhs = np.zeros(2 * N * n)
    if "mass" in terms:
        aniso = edges.projectors + params.epsilon * (tau[:, :, None] * tau[:, None, :])
        aniso_out = np.roll(aniso, -1, axis=0)
        scale = 1.0 / (6.0 * params.delta)
        blk_in = scale * q[:, None, None] * aniso
        blk_out = scale * q_out[:, None, None] * aniso_out
        blk_diag = 2.0 * (blk_in + blk_out)
        builder.block(0, 0, -1, blk_in)
        builder.block(0, 0, 0, blk_diag)
        builder.block(0, 0, 1, blk_out)
        x = state.x
        rhs_x = (
            np.einsum("vck,vk->vc", blk_in, np.roll(x, 1, axis=0))
            + np.einsum("vck,vk->vc", blk_diag, x)
            + np.einsum("vck,vk->vc", blk_out, np.roll(x, -1, axis=0))
        )
        rhs[: N * n] = rhs_x.ravel()
    if "bending" in terms:
        _bending_rows(builder, edges)
    if "transport" in terms:
        _transport_rows(builder, edges)
    if "length" in terms:
        _difference_stiffness_rows(builder, params.lam_tilde / q, params.lam_tilde / q_out)
    if "monitor" in terms:
        mon = params.monitor(state.x)
        mon_in = np.roll(mon, 1)
        mon_out = np.roll(mon, -1)
        w_in = params.epsilon * (mon_in + mon) / (2.0 * h_in)
        w_out = params.epsilon * (mon + mon_out) / (2.0 * h_out)
        _difference_stiffness_rows(builder, w_in, w_out)
    if "curvature" in terms:
        _curvature_identity_rows(builder, q, q_out)
    return LinearSystem(builder.tocsc(), rhs, N, n)
