"""Elastic flow of closed curves with Dirichlet-energy mesh redistribution.

Semi-implicit linear finite element schemes for the bending-energy gradient
flow of closed polygonal curves in 2D and 3D, penalized either by the
parametric Dirichlet energy or by curve length with an epsilon-weighted
tangential motion and monitor-driven vertex redistribution.
"""

from .errors import (
    BlowDownError,
    ConfigError,
    DegenerateMeshError,
    ElasticaError,
    EocUndefinedError,
    InvalidGridError,
    InvalidMonitorError,
    MeshCollapseError,
    NonFiniteInputError,
    PresetError,
    SolverAccuracyError,
    SolverFailureError,
    TurningNumberError,
    UnsupportedDimensionError,
    UnsupportedReferenceError,
)
from .mesh import (
    Circle,
    CircleNonequi,
    CurvatureField,
    CurveState,
    CustomNodal,
    Diagnostics,
    EdgeData,
    Grid,
    Hypotrochoid,
    Lemniscate,
    discrete_energy,
    edge_data,
    mesh_ratio,
    rotation_index,
    sample_preset,
    uniform_grid,
)
from .scheme import (
    DirichletScheme,
    ExtendedScheme,
    LinearSystem,
    Monitor,
    assemble_step,
    assemble_step_extended,
    init_curvature,
)
from .linsolve import Factorization, factorize, solve
from .flow import RunConfig, RunFailure, Snapshot, Trajectory, run, step
from .reference import (
    CircleOde,
    CircleReference,
    EocRow,
    EocTable,
    circle_radius_ode,
    curvature_error,
    eoc_table,
    exact_circle_curvature,
)

__version__ = "0.1.0"
