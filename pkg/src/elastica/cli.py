"""Command line interface and file output.

Runs are configured by flat ``key = value`` text files and export CSV plus
a JSON manifest for offline plotting; nothing is rendered here.  All float
output uses 17 significant digits so files round-trip doubles exactly and
identical configs reproduce byte-identical files.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import reference
from .errors import ConfigError, ElasticaError
from .flow import RunConfig, Trajectory, run
from .mesh import Circle, CircleNonequi, Hypotrochoid, Lemniscate
from .reference import CircleReference, EocTable, curvature_error, eoc_table
from .scheme import DirichletScheme, ExtendedScheme, Monitor

OUT_DIR_ENV = "ELASTICA_OUT_DIR"

_INT_KEYS = {"N", "m_T", "record_stride", "dimension"}
_FLOAT_KEYS = {"delta", "T", "lambda", "lambda_tilde", "epsilon",
               "radius", "r_outer", "r_roll", "d_offset", "alpha"}
_STR_KEYS = {"scheme", "monitor", "preset", "out_dir"}
KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS

_PRESET_PARAM_KEYS = {
    "circle": {"radius"},
    "circle-nonequi": {"radius"},
    "lemniscate": set(),
    "hypotrochoid": {"r_outer", "r_roll", "d_offset", "alpha"},
}

# Run constants of the bundled experiments, also shown by ``preset-list``.
PRESET_LIST_TEXT = """\
Available presets (defaults shown; keys are config-file keys):

circle            radius=1.5
                  reference run: scheme=dirichlet lambda=0.5 T=1 m_T=N^2
circle-nonequi    radius=1.5   (half the vertices on the quarter arc
                  [pi/2, pi], half on the rest; grid uniform in u)
                  reference run: scheme=dirichlet lambda=0.5 N=40 delta=0.0005 T=10
                  variant: scheme=extended lambda_tilde=0.5 epsilon=0.01 monitor=constant:1
lemniscate        (no parameters)
                  reference run: scheme=dirichlet lambda=0.1 N=100 delta=0.001 T=100
                  variant: scheme=extended lambda_tilde=0.2 epsilon=0.004
                           monitor=lemniscate-quadratic delta=1e-05
hypotrochoid      r_outer=12 r_roll=2 d_offset=5 alpha=0
                  reference run: scheme=dirichlet lambda=0.005 N=200 delta=0.05
                  planar for alpha=0; alpha=0.5 lifts into 3D
"""


def _fmt(value) -> str:
    if isinstance(value, (bool, int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def parse_config_text(text: str) -> dict:
    """Parse a flat key = value document into a typed dict."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: cannot parse {key} = {value!r}: {exc}") from None
    return values


def _build_preset(values: dict):
    name = values["preset"]
    if name not in _PRESET_PARAM_KEYS:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {sorted(_PRESET_PARAM_KEYS)}"
        )
    allowed = _PRESET_PARAM_KEYS[name]
    given = {k for k in values if k in {"radius", "r_outer", "r_roll", "d_offset", "alpha"}}
    stray = given - allowed
    if stray:
        raise ConfigError(f"keys {sorted(stray)} do not apply to preset {name!r}")
    try:
        if name == "circle":
            return Circle(radius=values.get("radius", 1.5))
        if name == "circle-nonequi":
            return CircleNonequi(radius=values.get("radius", 1.5))
        if name == "lemniscate":
            return Lemniscate()
        return Hypotrochoid(
            r_outer=values.get("r_outer", 12.0),
            r_roll=values.get("r_roll", 2.0),
            d_offset=values.get("d_offset", 5.0),
            z_amplitude=values.get("alpha", 0.0),
        )
    except ElasticaError as exc:
        raise ConfigError(str(exc)) from exc


def _build_monitor(spec: str) -> Monitor:
    if spec == "lemniscate-quadratic":
        return Monitor.lemniscate_quadratic()
    if spec.startswith("constant:"):
        try:
            value = float(spec.partition(":")[2])
        except ValueError:
            raise ConfigError(f"cannot parse monitor constant in {spec!r}") from None
        if value <= 0.0:
            raise ConfigError(f"monitor constant must be positive, got {value}")
        return Monitor.constant(value)
    raise ConfigError(
        f"unknown monitor {spec!r}; use 'constant:<c>' or 'lemniscate-quadratic'"
    )


def resolve_config(values: dict) -> Tuple[RunConfig, dict]:
    """Turn parsed key-values into a RunConfig plus the fully resolved
    (defaults included) manifest dictionary."""
    for key in ("N", "T", "scheme", "preset"):
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    if ("delta" in values) == ("m_T" in values):
        raise ConfigError("exactly one of 'delta' and 'm_T' must be given")

    final_time = values["T"]
    if final_time <= 0.0:
        raise ConfigError(f"T must be positive, got {final_time}")
    if "delta" in values:
        delta = values["delta"]
        if delta <= 0.0:
            raise ConfigError(f"delta must be positive, got {delta}")
        step_count = max(1, round(final_time / delta))
    else:
        step_count = values["m_T"]
        if step_count < 1:
            raise ConfigError(f"m_T must be >= 1, got {step_count}")
        delta = final_time / step_count

    scheme_name = values["scheme"]
    try:
        if scheme_name == "dirichlet":
            for key in ("lambda_tilde", "epsilon", "monitor"):
                if key in values:
                    raise ConfigError(f"key {key!r} does not apply to scheme=dirichlet")
            if "lambda" not in values:
                raise ConfigError("missing required key 'lambda' for scheme=dirichlet")
            scheme = DirichletScheme(lam=values["lambda"], delta=delta)
        elif scheme_name == "extended":
            if "lambda" in values:
                raise ConfigError("key 'lambda' does not apply to scheme=extended")
            for key in ("lambda_tilde", "epsilon"):
                if key not in values:
                    raise ConfigError(f"missing required key {key!r} for scheme=extended")
            monitor_spec = values.get("monitor", "constant:1")
            scheme = ExtendedScheme(
                lam_tilde=values["lambda_tilde"],
                epsilon=values["epsilon"],
                monitor=_build_monitor(monitor_spec),
                delta=delta,
            )
        else:
            raise ConfigError(f"unknown scheme {scheme_name!r}; use dirichlet or extended")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    preset = _build_preset(values)
    dimension = values.get("dimension")
    if dimension is not None and dimension not in (2, 3):
        raise ConfigError(f"dimension must be 2 or 3, got {dimension}")
    record_stride = values.get("record_stride", 1)
    if record_stride < 1:
        raise ConfigError(f"record_stride must be >= 1, got {record_stride}")

    try:
        config = RunConfig(
            n_vertices=values["N"],
            preset=preset,
            scheme=scheme,
            final_time=final_time,
            step_count=step_count,
            record_stride=record_stride,
            dimension=dimension,
        )
    except ElasticaError as exc:
        raise ConfigError(str(exc)) from exc

    manifest = {
        "N": values["N"],
        "T": final_time,
        "delta": delta,
        "m_T": step_count,
        "scheme": scheme_name,
        "preset": values["preset"],
        "record_stride": record_stride,
        "dimension": dimension,
    }
    if scheme_name == "dirichlet":
        manifest["lambda"] = values["lambda"]
    else:
        manifest["lambda_tilde"] = values["lambda_tilde"]
        manifest["epsilon"] = values["epsilon"]
        manifest["monitor"] = values.get("monitor", "constant:1")
    for key in sorted(_PRESET_PARAM_KEYS[values["preset"]]):
        default = {"radius": 1.5, "r_outer": 12.0, "r_roll": 2.0,
                   "d_offset": 5.0, "alpha": 0.0}[key]
        manifest[key] = values.get(key, default)
    return config, manifest


def _resolve_out_dir(explicit: Optional[str]) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env)
    raise ConfigError(
        f"no output directory: set 'out_dir' (or --out-dir) or the {OUT_DIR_ENV} env var"
    )


# ---------------------------------------------------------------------------
# Writers


def _write_lines(path: Path, lines):
    with open(path, "w", newline="\n") as handle:
        for line in lines:
            handle.write(line + "\n")


def write_diagnostics_csv(path: Path, trajectory: Trajectory):
    has_err = any(s.diagnostics.err is not None for s in trajectory.snapshots)
    header = "t,energy,length,sigma" + (",err" if has_err else "")
    lines = [header]
    for snap in trajectory.snapshots:
        d = snap.diagnostics
        row = [_fmt(snap.time), _fmt(d.energy), _fmt(d.length), _fmt(d.sigma)]
        if has_err:
            row.append(_fmt(d.err) if d.err is not None else "")
        lines.append(",".join(row))
    _write_lines(path, lines)


def write_snapshot_csv(path: Path, snapshot, grid, monitor: Optional[Monitor] = None):
    n = snapshot.state.dimension
    header = ["t", "j", "u"]
    header += [f"x{c}" for c in range(n)]
    header += [f"y{c}" for c in range(n)]
    mon_values = None
    if monitor is not None:
        header.append("monitor")
        mon_values = monitor(snapshot.state.x)
    lines = [",".join(header)]
    params = grid.vertex_params
    for j in range(snapshot.state.n_vertices):
        row = [_fmt(snapshot.time), str(j), _fmt(params[j])]
        row += [_fmt(v) for v in snapshot.state.x[j]]
        row += [_fmt(v) for v in snapshot.curvature.y[j]]
        if mon_values is not None:
            row.append(_fmt(mon_values[j]))
        lines.append(",".join(row))
    _write_lines(path, lines)


def write_manifest(path: Path, manifest: dict, trajectory: Trajectory):
    payload = {
        "config": manifest,
        "completed": trajectory.completed,
        "failure": None,
    }
    if trajectory.failure is not None:
        payload["failure"] = {
            "step": trajectory.failure.step,
            "error": type(trajectory.failure.error).__name__,
            "message": str(trajectory.failure.error),
        }
    with open(path, "w", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_outputs(out_dir: Path, trajectory: Trajectory, manifest: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(out_dir / "manifest.json", manifest, trajectory)
    write_diagnostics_csv(out_dir / "diagnostics.csv", trajectory)
    snap_dir = out_dir / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    monitor = None
    if isinstance(trajectory.config.scheme, ExtendedScheme):
        monitor = trajectory.config.scheme.monitor
    for snap in trajectory.snapshots:
        write_snapshot_csv(
            snap_dir / f"step_{snap.step:08d}.csv", snap, trajectory.grid, monitor
        )


# ---------------------------------------------------------------------------
# Commands


def cmd_run(config_path: str, out_dir: Optional[str] = None) -> int:
    try:
        text = Path(config_path).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        values = parse_config_text(text)
        config, manifest = resolve_config(values)
        target = _resolve_out_dir(out_dir or values.get("out_dir"))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    trajectory = run(config)
    write_outputs(target, trajectory, manifest)
    if not trajectory.completed:
        failure = trajectory.failure
        print(
            f"run failed at step {failure.step}/{config.step_count}: "
            f"{failure.error}",
            file=sys.stderr,
        )
        return 1
    print(f"run complete: {len(trajectory.snapshots)} snapshots in {target}")
    return 0


@dataclass(eq=False)
class ConvergenceResult:
    table: EocTable
    trajectories: List[Trajectory]
    completed: bool


def converge_circle(
    n_list: Sequence[int],
    lam: float = 0.5,
    radius0: float = 1.5,
    final_time: float = 1.0,
) -> ConvergenceResult:
    """Self-similar circle convergence sweep: per N, run with m_T = N^2
    steps and record the worst lumped squared-L2 curvature error."""
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError(f"N list must be strictly increasing, got {n_list}")
    if any(n < 3 for n in n_list):
        raise ConfigError(f"every N must be >= 3, got {n_list}")
    measurements = []
    step_counts = []
    trajectories = []
    completed = True
    for n in n_list:
        m_steps = n * n
        config = RunConfig(
            n_vertices=n,
            preset=Circle(radius=radius0),
            scheme=DirichletScheme(lam=lam, delta=final_time / m_steps),
            final_time=final_time,
            step_count=m_steps,
            record_stride=1,
            reference=CircleReference(
                variant=reference.VARIANT_DIRICHLET, weight=lam, radius0=radius0
            ),
        )
        trajectory = run(config)
        trajectories.append(trajectory)
        if not trajectory.completed:
            completed = False
            break
        ode = reference.circle_radius_ode(
            reference.VARIANT_DIRICHLET, lam, radius0, final_time, m_steps
        )
        directions = trajectory.snapshots[0].state.x / radius0
        exact = reference.exact_circle_curvature(ode, trajectory.grid, directions)
        _, err = curvature_error(trajectory, exact)
        measurements.append((n, err))
        step_counts.append(m_steps)
    if len(measurements) >= 2:
        table = eoc_table(measurements, step_counts, final_time)
    else:
        rows = tuple(
            reference.EocRow(n, 2.0 * np.pi / n, m, final_time / m, err, None)
            for (n, err), m in zip(measurements, step_counts)
        )
        table = EocTable(rows)
    return ConvergenceResult(table, trajectories, completed)


def _table_lines(table: EocTable):
    lines = ["N,h,m_T,delta,err,eoc"]
    for row in table.rows:
        eoc = _fmt(row.eoc) if row.eoc is not None else ""
        lines.append(
            ",".join([str(row.n_vertices), _fmt(row.h), str(row.step_count),
                      _fmt(row.delta), _fmt(row.err), eoc])
        )
    return lines


def cmd_converge_circle(
    n_list: Sequence[int],
    lam: float,
    radius0: float,
    final_time: float,
    out_dir: Optional[str],
) -> int:
    try:
        target = _resolve_out_dir(out_dir) if out_dir or os.environ.get(OUT_DIR_ENV) else Path(".")
        result = converge_circle(n_list, lam, radius0, final_time)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    target.mkdir(parents=True, exist_ok=True)
    _write_lines(target / "eoc_table.csv", _table_lines(result.table))
    print(f"{'N':>6} {'h':>12} {'m_T':>8} {'delta':>14} {'err':>14} {'eoc':>8}")
    for row in result.table.rows:
        eoc = f"{row.eoc:8.4f}" if row.eoc is not None else f"{'--':>8}"
        print(
            f"{row.n_vertices:>6} {row.h:>12.6g} {row.step_count:>8} "
            f"{row.delta:>14.6g} {row.err:>14.6g} {eoc}"
        )
    if not result.completed:
        failed = result.trajectories[-1]
        print(
            f"sweep aborted: N={failed.config.n_vertices} failed at step "
            f"{failed.failure.step}: {failed.failure.error}",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_preset_list() -> int:
    sys.stdout.write(PRESET_LIST_TEXT)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="elastica",
        description="Evolve closed polygonal curves by penalized elastic flow.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a run described by a config file")
    p_run.add_argument("--config", required=True, help="path to a key = value config file")
    p_run.add_argument("--out-dir", default=None, help="output directory override")

    p_conv = sub.add_parser("converge-circle", help="circle convergence sweep")
    p_conv.add_argument("--n-list", required=True,
                        help="comma-separated vertex counts, strictly increasing")
    p_conv.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p_conv.add_argument("--r0", type=float, default=1.5)
    p_conv.add_argument("--t", type=float, default=1.0)
    p_conv.add_argument("--out-dir", default=None)

    sub.add_parser("preset-list", help="list curve presets and their defaults")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out_dir)
    if args.command == "converge-circle":
        try:
            n_list = [int(part) for part in args.n_list.split(",") if part.strip()]
        except ValueError:
            print(f"config error: cannot parse --n-list {args.n_list!r}", file=sys.stderr)
            return 2
        return cmd_converge_circle(n_list, args.lam, args.r0, args.t, args.out_dir)
    return cmd_preset_list()


if __name__ == "__main__":
    sys.exit(main())
