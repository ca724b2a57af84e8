"""Analytic references and convergence measurement.

A circle evolving self-similarly reduces both flows to a scalar radius ODE,
which is integrated here to high accuracy and turned into exact nodal
curvature fields for error tracking.  The module also computes the lumped
squared-L2 curvature error and experimental orders of convergence.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import BlowDownError, EocUndefinedError
from .mesh import TWO_PI, Grid

VARIANT_DIRICHLET = "dirichlet"
VARIANT_LENGTH = "length"


@dataclass(frozen=True)
class CircleReference:
    """Request to track the curvature error against the circle solution.

    ``variant`` selects the radius law: ``dirichlet`` for
    ``R' = 1/(2R^3) - weight`` and ``length`` for
    ``R' = 1/(2R^3) - weight/R``.
    """

    variant: str
    weight: float
    radius0: float
    substeps: int = 10

    def __post_init__(self):
        if self.variant not in (VARIANT_DIRICHLET, VARIANT_LENGTH):
            raise ValueError(f"unknown radius-law variant {self.variant!r}")
        if self.radius0 <= 0.0 or self.weight <= 0.0:
            raise ValueError("radius and weight must be positive")


@dataclass(eq=False)
class CircleOde:
    """Radius path of the self-similar circle on a run's time grid."""

    variant: str
    weight: float
    radius0: float
    times: np.ndarray   # (m_T + 1,)
    radii: np.ndarray   # (m_T + 1,)


def circle_radius_ode(
    variant: str,
    weight: float,
    radius0: float,
    final_time: float,
    step_count: int,
    substeps: int = 10,
) -> CircleOde:
    """Integrate the circle radius law on the run's time grid.

    Classical fourth-order one-step integration with ``substeps`` stages
    per flow step; the truncation error sits far below the spatial error
    this reference is compared against.
    """
    if radius0 <= 0.0 or weight <= 0.0:
        raise ValueError("radius and weight must be positive")
    if step_count < 1 or final_time <= 0.0 or substeps < 1:
        raise ValueError("need final_time > 0, step_count >= 1, substeps >= 1")
    if variant == VARIANT_DIRICHLET:
        def rate(r):
            return 1.0 / (2.0 * r ** 3) - weight
    elif variant == VARIANT_LENGTH:
        def rate(r):
            return 1.0 / (2.0 * r ** 3) - weight / r
    else:
        raise ValueError(f"unknown radius-law variant {variant!r}")

    dt = final_time / step_count / substeps
    radius = radius0
    radii = np.empty(step_count + 1)
    radii[0] = radius
    for m in range(step_count):
        for _ in range(substeps):
            k1 = rate(radius)
            k2 = rate(radius + 0.5 * dt * k1)
            k3 = rate(radius + 0.5 * dt * k2)
            k4 = rate(radius + dt * k3)
            radius = radius + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not radius > 0.0:
                raise BlowDownError(
                    f"reference radius reached {radius} before t={final_time}"
                )
        radii[m + 1] = radius
    times = np.arange(step_count + 1) * (final_time / step_count)
    return CircleOde(variant, weight, radius0, times, radii)


def exact_circle_curvature(ode: CircleOde, grid: Grid, directions: np.ndarray) -> np.ndarray:
    """Exact nodal curvature ``-directions / R(t)`` at every time level.

    ``directions`` are the unit radial directions of the initial vertices;
    returns an array of shape ``(m_T + 1, N, n)``.
    """
    directions = np.asarray(directions, dtype=float)
    if directions.shape[0] != grid.n_vertices:
        raise ValueError("directions do not match the grid vertex count")
    norms = np.linalg.norm(directions, axis=1)
    if not np.allclose(norms, 1.0, atol=1e-9):
        raise ValueError("directions must be unit vectors")
    return -directions[None, :, :] / ode.radii[:, None, None]


def curvature_error(trajectory, exact: np.ndarray) -> Tuple[np.ndarray, float]:
    """Lumped squared-L2 curvature deviation along a trajectory.

    ``exact`` holds the reference nodal curvature at every step of the run
    (shape ``(m_T + 1, N, n)``).  Returns the per-snapshot series
    ``(2 pi / N) sum_j |exact - computed|^2`` (a squared quantity, no root)
    and its maximum over the recorded steps >= 1.
    """
    snapshots = trajectory.snapshots
    first = snapshots[0]
    n_vertices = first.state.n_vertices
    if exact.ndim != 3 or exact.shape[1] != n_vertices or exact.shape[2] != first.state.dimension:
        raise ValueError(f"reference shape {exact.shape} does not match the trajectory")
    if exact.shape[0] != trajectory.step_count + 1:
        raise ValueError(
            f"reference covers {exact.shape[0] - 1} steps, run has {trajectory.step_count}"
        )
    series = np.empty(len(snapshots))
    worst = 0.0
    for i, snap in enumerate(snapshots):
        diff = exact[snap.step] - snap.curvature.y
        value = (TWO_PI / n_vertices) * float(np.einsum("ij,ij->", diff, diff))
        series[i] = value
        if snap.step >= 1:
            worst = max(worst, value)
    return series, worst


@dataclass(frozen=True)
class EocRow:
    n_vertices: int
    h: float
    step_count: int
    delta: float
    err: float
    eoc: Optional[float]


@dataclass(frozen=True)
class EocTable:
    rows: Tuple[EocRow, ...]


def eoc_table(
    measurements: Sequence[Tuple[int, float]],
    step_counts: Optional[Sequence[int]] = None,
    final_time: float = 1.0,
) -> EocTable:
    """Experimental orders of convergence from (N, err) measurements.

    ``eoc_k = log(err_{k-1}/err_k) / log(h_{k-1}/h_k)`` with ``h = 2 pi / N``;
    the first row has no ratio.  ``step_counts`` defaults to ``N^2`` per row.
    """
    if len(measurements) < 2:
        raise EocUndefinedError("need at least two rows to form a convergence ratio")
    ns = [int(n) for n, _ in measurements]
    errs = [float(e) for _, e in measurements]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise EocUndefinedError(f"vertex counts must be strictly increasing, got {ns}")
    if any(e <= 0.0 for e in errs):
        raise EocUndefinedError(f"errors must be positive, got {errs}")
    if step_counts is None:
        step_counts = [n * n for n in ns]
    rows: List[EocRow] = []
    for k, (n, err) in enumerate(zip(ns, errs)):
        h = TWO_PI / n
        if k == 0:
            eoc = None
        else:
            eoc = math.log(errs[k - 1] / err) / math.log(ns[k] / ns[k - 1])
        rows.append(
            EocRow(
                n_vertices=n,
                h=h,
                step_count=int(step_counts[k]),
                delta=final_time / step_counts[k],
                err=err,
                eoc=eoc,
            )
        )
    return EocTable(tuple(rows))
