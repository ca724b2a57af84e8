"""Closed polygonal curves over a periodic parameter grid.

Vertices live at parameter nodes of a partition of [0, 2*pi); all indexing
is cyclic.  Edge quantities are aligned with their right vertex: entry ``j``
of an edge array describes the edge from vertex ``j-1`` to vertex ``j``
(entry 0 is the wrap-around edge).  The same convention applies to element
widths of the parameter grid.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateMeshError,
    InvalidGridError,
    NonFiniteInputError,
    PresetError,
    TurningNumberError,
    UnsupportedDimensionError,
)

TWO_PI = 2.0 * np.pi

# Edges shorter than this fraction of the total polygon length count as
# degenerate; scale-aware stand-in for a uniform lower bound on |x_u|.
DEGENERACY_FRACTION = 1e-12


@dataclass(frozen=True, eq=False)
class Grid:
    """Periodic partition of [0, 2*pi] into N elements.

    Parameters
    ----------
    nodes : ndarray, shape (N+1,)
        Strictly increasing parameter values with ``nodes[0] == 0`` and
        ``nodes[N] == 2*pi``.  Vertex ``j`` sits at ``nodes[j]`` for
        ``j < N``; vertex 0 is identified with the closing node.
    """

    nodes: np.ndarray
    widths: np.ndarray = field(init=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 4:
            raise InvalidGridError("grid needs at least 3 elements (4 nodes)")
        if nodes[0] != 0.0:
            raise InvalidGridError("first grid node must be 0")
        if abs(nodes[-1] - TWO_PI) > 1e-12:
            raise InvalidGridError("last grid node must be 2*pi")
        widths = np.diff(nodes)
        if np.any(widths <= 0.0):
            raise InvalidGridError("grid widths must be positive")
        if abs(widths.sum() - TWO_PI) > 1e-12:
            raise InvalidGridError("grid widths must sum to 2*pi")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "widths", widths)

    @property
    def n_vertices(self) -> int:
        return self.nodes.size - 1

    @property
    def vertex_params(self) -> np.ndarray:
        """Parameter values of the N distinct vertices."""
        return self.nodes[:-1]

    def incoming_widths(self) -> np.ndarray:
        """Width of the element ending at each vertex (cyclic)."""
        return np.roll(self.widths, 1)


def uniform_grid(n_vertices: int) -> Grid:
    """Equispaced grid with nodes ``j * 2*pi / N``."""
    if n_vertices < 3:
        raise InvalidGridError(f"need at least 3 vertices, got {n_vertices}")
    nodes = np.arange(n_vertices + 1) * (TWO_PI / n_vertices)
    nodes[-1] = TWO_PI
    return Grid(nodes)


@dataclass(frozen=True, eq=False)
class CurveState:
    """Vertex positions of a closed polygonal curve at one time level."""

    x: np.ndarray  # (N, n)
    t: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.shape[1] not in (2, 3):
            raise ValueError(f"positions must have shape (N, 2) or (N, 3), got {x.shape}")
        if x.shape[0] < 3:
            raise ValueError("a closed polygon needs at least 3 vertices")
        if not np.isfinite(x).all():
            raise NonFiniteInputError("vertex positions contain NaN or inf")
        diffs = x - np.roll(x, 1, axis=0)
        if np.any(np.einsum("ij,ij->i", diffs, diffs) == 0.0):
            raise ValueError("consecutive vertices must be distinct")
        object.__setattr__(self, "x", x)

    @property
    def n_vertices(self) -> int:
        return self.x.shape[0]

    @property
    def dimension(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """Nodal discrete curvature vectors accompanying a CurveState."""

    y: np.ndarray  # (N, n)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 2 or y.shape[1] not in (2, 3):
            raise ValueError(f"curvature must have shape (N, 2) or (N, 3), got {y.shape}")
        if not np.isfinite(y).all():
            raise NonFiniteInputError("curvature vectors contain NaN or inf")
        object.__setattr__(self, "y", y)


@dataclass(frozen=True, eq=False)
class EdgeData:
    """Per-edge geometry of a polygon, aligned with the right vertex.

    ``lengths[j]`` is the length of the edge from vertex ``j-1`` to vertex
    ``j``; ``tangents`` the unit edge directions; ``projectors`` the
    matrices ``I - tangent tangent^T`` mapping onto the edge normal space;
    ``curvature_weights[j]`` the transport weight
    ``(|y_j|^2 + |y_{j-1}|^2) / (4 q_j)``.
    """

    lengths: np.ndarray           # (N,)
    tangents: np.ndarray          # (N, n)
    projectors: np.ndarray        # (N, n, n)
    curvature_weights: np.ndarray  # (N,)

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())


@dataclass
class Diagnostics:
    """Scalar per-state diagnostics recorded along a trajectory."""

    energy: float
    length: float
    sigma: float
    err: Optional[float] = None
    rotation_index: Optional[int] = None


# ---------------------------------------------------------------------------
# Curve presets


@dataclass(frozen=True)
class Circle:
    """Circle of given radius, equispaced vertices."""

    radius: float = 1.5


@dataclass(frozen=True)
class CircleNonequi:
    """Circle with intentionally uneven vertex spacing.

    Half of the vertices sit equally spaced on the quarter arc
    [pi/2, pi] of angles, the other half equally spaced on the remaining
    three quarters.  The parameter grid stays uniform; only the map from
    parameter to position is nonuniform.
    """

    radius: float = 1.5


@dataclass(frozen=True)
class Lemniscate:
    """Nonsymmetric figure-eight:
    ``x(u) = (cos u + 4) cos u / (1 + sin^2 u) * (1, sin u)``.
    """


@dataclass(frozen=True)
class Hypotrochoid:
    """Curve traced by a point at distance ``d_offset`` from the centre of a
    circle of radius ``r_roll`` rolling inside a circle of radius ``r_outer``,
    optionally lifted out of plane by ``z_amplitude * sin(3u)``.

    ``(r_outer - r_roll) / r_roll`` must be a positive integer so the curve
    closes over one parameter period.  The defaults trace a five-winding
    curve that relaxes to a multiply covered circle.
    """

    r_outer: float = 12.0
    r_roll: float = 2.0
    d_offset: float = 5.0
    z_amplitude: float = 0.0


@dataclass(frozen=True)
class CustomNodal:
    """Explicit list of vertex positions, one per grid vertex."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))


Preset = Circle | CircleNonequi | Lemniscate | Hypotrochoid | CustomNodal


def _nonequi_angles(n: int) -> np.ndarray:
    # Dense half on the quarter arc [pi/2, pi], sparse half on the rest.
    n_dense = n // 2
    n_sparse = n - n_dense
    dense = 0.5 * np.pi + 0.5 * np.pi * np.arange(n_dense) / n_dense
    sparse = np.pi + 1.5 * np.pi * np.arange(n_sparse) / n_sparse
    return np.concatenate([dense, sparse])


def sample_preset(preset: Preset, grid: Grid, dimension: Optional[int] = None) -> CurveState:
    """Vertex-interpolate a preset curve on the given grid.

    ``dimension`` forces the ambient dimension: planar presets may be
    embedded in R^3 with zero third coordinate.
    """
    u = grid.vertex_params
    n = grid.n_vertices

    if isinstance(preset, Circle):
        if preset.radius <= 0.0:
            raise PresetError(f"circle radius must be positive, got {preset.radius}")
        x = preset.radius * np.stack([np.cos(u), np.sin(u)], axis=1)
    elif isinstance(preset, CircleNonequi):
        if preset.radius <= 0.0:
            raise PresetError(f"circle radius must be positive, got {preset.radius}")
        theta = _nonequi_angles(n)
        x = preset.radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    elif isinstance(preset, Lemniscate):
        r = (np.cos(u) + 4.0) * np.cos(u) / (1.0 + np.sin(u) ** 2)
        x = np.stack([r, r * np.sin(u)], axis=1)
    elif isinstance(preset, Hypotrochoid):
        if preset.r_outer <= preset.r_roll or preset.r_roll <= 0.0:
            raise PresetError("hypotrochoid needs 0 < r_roll < r_outer")
        ratio = (preset.r_outer - preset.r_roll) / preset.r_roll
        k = round(ratio)
        if k < 1 or abs(ratio - k) > 1e-9:
            raise PresetError(
                f"(r_outer - r_roll) / r_roll = {ratio} is not a positive integer; "
                "the curve would not close"
            )
        base = preset.r_outer - preset.r_roll
        d = preset.d_offset
        xy = np.stack(
            [base * np.cos(u) + d * np.cos(k * u), base * np.sin(u) - d * np.sin(k * u)],
            axis=1,
        )
        if preset.z_amplitude != 0.0 or dimension == 3:
            z = preset.z_amplitude * np.sin(3.0 * u)
            x = np.column_stack([xy, z])
        else:
            x = xy
    elif isinstance(preset, CustomNodal):
        x = preset.points
        if x.ndim != 2 or x.shape[0] != n:
            raise PresetError(
                f"custom preset needs {n} points to match the grid, got shape {x.shape}"
            )
    else:
        raise PresetError(f"unknown preset {preset!r}")

    if dimension is not None:
        if dimension not in (2, 3):
            raise PresetError(f"ambient dimension must be 2 or 3, got {dimension}")
        if dimension == 3 and x.shape[1] == 2:
            x = np.column_stack([x, np.zeros(n)])
        elif dimension == 2 and x.shape[1] == 3:
            raise PresetError("cannot project a 3D preset to dimension 2")
    return CurveState(x=x, t=0.0)


# ---------------------------------------------------------------------------
# Edge geometry and diagnostics


def edge_data(state: CurveState, curvature: CurvatureField) -> EdgeData:
    """Edge lengths, unit tangents, normal projectors, transport weights.

    Raises DegenerateMeshError if any edge is shorter than
    ``DEGENERACY_FRACTION`` times the total polygon length.
    """
    x = state.x
    y = curvature.y
    if y.shape != x.shape:
        raise ValueError(f"curvature shape {y.shape} does not match positions {x.shape}")
    edges = x - np.roll(x, 1, axis=0)
    lengths = np.linalg.norm(edges, axis=1)
    threshold = DEGENERACY_FRACTION * lengths.sum()
    short = np.flatnonzero(lengths <= threshold)
    if short.size:
        j = int(short[np.argmin(lengths[short])])
        raise DegenerateMeshError(edge=j, length=lengths[j], threshold=threshold)
    tangents = edges / lengths[:, None]
    eye = np.eye(x.shape[1])
    projectors = eye[None, :, :] - tangents[:, :, None] * tangents[:, None, :]
    ysq = np.einsum("ij,ij->i", y, y)
    weights = (ysq + np.roll(ysq, 1)) / (4.0 * lengths)
    return EdgeData(lengths, tangents, projectors, weights)


def discrete_energy(
    state: CurveState, curvature: CurvatureField, dirichlet_weight: float, grid: Grid
) -> float:
    """Bending energy plus weighted parametric Dirichlet energy.

    Exact value of ``1/2 Int I_h(|y|^2)|x_u| + w |x_u|^2 du`` for piecewise
    linear fields: ``1/2 sum_j [ q_j (|y_{j-1}|^2+|y_j|^2)/2 + w q_j^2/h_j ]``.
    """
    edges = edge_data(state, curvature)
    q = edges.lengths
    ysq = np.einsum("ij,ij->i", curvature.y, curvature.y)
    h_in = grid.incoming_widths()
    bending = 0.5 * np.sum(q * (ysq + np.roll(ysq, 1)) / 2.0)
    stretching = 0.5 * dirichlet_weight * np.sum(q * q / h_in)
    return float(bending + stretching)


def mesh_ratio(edges: EdgeData) -> float:
    """Longest over shortest edge; 1 means equidistributed vertices."""
    return float(edges.lengths.max() / edges.lengths.min())


def rotation_index(state: CurveState) -> int:
    """Total turning of the edge tangents divided by 2*pi (planar curves).

    The pre-rounding turning sum must land within 1e-6 of an integer,
    otherwise the polygon is too coarse for the turning angles to be
    meaningful and a TurningNumberError is raised.
    """
    if state.dimension != 2:
        raise UnsupportedDimensionError("rotation index is defined for planar curves only")
    edges = edge_data(state, CurvatureField(np.zeros_like(state.x)))
    tau = edges.tangents
    tau_next = np.roll(tau, -1, axis=0)
    cross = tau[:, 0] * tau_next[:, 1] - tau[:, 1] * tau_next[:, 0]
    dot = np.einsum("ij,ij->i", tau, tau_next)
    turning = float(np.arctan2(cross, dot).sum()) / TWO_PI
    nearest = round(turning)
    if abs(turning - nearest) > 1e-6:
        raise TurningNumberError(
            f"turning sum {turning} is not within 1e-6 of an integer"
        )
    return int(nearest)
