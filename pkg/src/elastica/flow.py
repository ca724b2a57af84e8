"""Time-stepping driver.

Advances a position/curvature pair through a fixed number of steps,
recording snapshots with diagnostics at a configurable stride.  A failing
step does not discard the run: the partial trajectory is returned together
with a failure record carrying the step index and the last good state.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import linsolve
from .errors import (
    ConfigError,
    ElasticaError,
    MeshCollapseError,
    UnsupportedReferenceError,
)
from .reference import CircleReference, circle_radius_ode, exact_circle_curvature
from .mesh import (
    Circle,
    CurvatureField,
    CurveState,
    Diagnostics,
    Grid,
    Preset,
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
    SchemeParams,
    assemble_step,
    assemble_step_extended,
    init_curvature,
)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved description of one run.

    ``step_count`` defaults to ``round(final_time / scheme.delta)``; the
    product ``scheme.delta * step_count`` must reproduce ``final_time`` to
    1e-12 relative.
    """

    n_vertices: int
    preset: Preset
    scheme: SchemeParams
    final_time: float
    step_count: Optional[int] = None
    record_stride: int = 1
    dimension: Optional[int] = None
    reference: Optional[CircleReference] = None

    def __post_init__(self):
        if self.final_time <= 0.0:
            raise ConfigError(f"final_time must be positive, got {self.final_time}")
        if self.record_stride < 1:
            raise ConfigError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.step_count is None:
            object.__setattr__(
                self, "step_count", max(1, round(self.final_time / self.scheme.delta))
            )
        if self.step_count < 1:
            raise ConfigError(f"step_count must be >= 1, got {self.step_count}")
        if abs(self.scheme.delta * self.step_count - self.final_time) > 1e-12 * self.final_time:
            raise ConfigError(
                f"delta * step_count = {self.scheme.delta * self.step_count} "
                f"does not reproduce final_time = {self.final_time}"
            )


@dataclass(eq=False)
class Snapshot:
    step: int
    time: float
    state: CurveState
    curvature: CurvatureField
    diagnostics: Diagnostics


@dataclass(eq=False)
class RunFailure:
    """Why and where a run stopped early."""

    step: int                  # 1-based index of the failed step
    error: ElasticaError
    state: CurveState          # last good state
    curvature: CurvatureField


@dataclass(eq=False)
class Trajectory:
    config: RunConfig
    grid: Grid
    snapshots: List[Snapshot] = field(default_factory=list)
    failure: Optional[RunFailure] = None

    @property
    def completed(self) -> bool:
        return self.failure is None

    @property
    def step_count(self) -> int:
        return self.config.step_count

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.diagnostics.energy for s in self.snapshots])

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([s.diagnostics.sigma for s in self.snapshots])


def step(state: CurveState, curvature: CurvatureField, params: SchemeParams, grid: Grid):
    """Advance one time step: assemble, solve, wrap, degeneracy-check."""
    if isinstance(params, DirichletScheme):
        system = assemble_step(state, curvature, params, grid)
    elif isinstance(params, ExtendedScheme):
        system = assemble_step_extended(state, curvature, params, grid)
    else:
        raise TypeError(f"unknown scheme parameters {params!r}")
    x_next, y_next = linsolve.solve(system)
    try:
        new_state = CurveState(x=x_next, t=state.t + params.delta)
        new_curvature = CurvatureField(y_next)
        edge_data(new_state, new_curvature)  # degeneracy check
    except (ValueError, ElasticaError) as exc:
        raise MeshCollapseError(f"step produced a degenerate polygon: {exc}") from exc
    return new_state, new_curvature


def _energy_of(state, curvature, scheme, grid):
    # Extended runs record the energy their flow derives from:
    # bending + lam_tilde * length + epsilon * Dirichlet part.
    if isinstance(scheme, DirichletScheme):
        return discrete_energy(state, curvature, scheme.lam, grid)
    edges = edge_data(state, curvature)
    base = discrete_energy(state, curvature, scheme.epsilon, grid)
    return base + scheme.lam_tilde * edges.total_length


def _diagnostics(state, curvature, scheme, grid, err=None):
    edges = edge_data(state, curvature)
    rot = rotation_index(state) if state.dimension == 2 else None
    return Diagnostics(
        energy=_energy_of(state, curvature, scheme, grid),
        length=edges.total_length,
        sigma=mesh_ratio(edges),
        err=err,
        rotation_index=rot,
    )


def run(config: RunConfig) -> Trajectory:
    """Execute a configured run and return its trajectory.

    The initial state is the vertex-interpolated preset; the initial
    curvature is determined from it.  Exactly ``step_count`` steps are
    attempted; snapshots are recorded every ``record_stride`` steps and
    always at the first and last level.
    """
    grid = uniform_grid(config.n_vertices)
    state = sample_preset(config.preset, grid, config.dimension)
    curvature = init_curvature(state, grid)

    exact = None
    if config.reference is not None:
        if not isinstance(config.preset, Circle):
            raise UnsupportedReferenceError(
                f"analytic reference covers the circle preset only, got {config.preset!r}"
            )
        ode = circle_radius_ode(
            config.reference.variant,
            config.reference.weight,
            config.reference.radius0,
            config.final_time,
            config.step_count,
            config.reference.substeps,
        )
        directions = state.x / np.linalg.norm(state.x, axis=1, keepdims=True)
        exact = exact_circle_curvature(ode, grid, directions)

    def snap_error(m, curv):
        if exact is None:
            return None
        diff = exact[m] - curv.y
        return (2.0 * np.pi / config.n_vertices) * float(np.einsum("ij,ij->", diff, diff))

    trajectory = Trajectory(config=config, grid=grid)
    trajectory.snapshots.append(
        Snapshot(0, 0.0, state, curvature,
                 _diagnostics(state, curvature, config.scheme, grid, snap_error(0, curvature)))
    )
    stride = config.record_stride
    for m in range(config.step_count):
        try:
            state_next, curvature_next = step(state, curvature, config.scheme, grid)
        except ElasticaError as exc:
            if isinstance(exc, MeshCollapseError):
                exc.step = m + 1
            trajectory.failure = RunFailure(
                step=m + 1, error=exc, state=state, curvature=curvature
            )
            return trajectory
        level = m + 1
        # Stamp the exact time level; accumulating delta would drift past
        # the 1e-12 tolerance on long runs.
        state = CurveState(x=state_next.x, t=level * config.scheme.delta)
        curvature = curvature_next
        if level % stride == 0 or level == config.step_count:
            trajectory.snapshots.append(
                Snapshot(
                    level,
                    state.t,
                    state,
                    curvature,
                    _diagnostics(state, curvature, config.scheme, grid,
                                 snap_error(level, curvature)),
                )
            )
    return trajectory
