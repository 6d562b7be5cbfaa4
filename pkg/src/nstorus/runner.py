"""Run orchestration: induction runs, oracle runs, certificate re-analysis,
and the smallness-threshold bisection driver.

All outputs are deterministic for a fixed configuration: numeric CSV cells
use the shortest round-trip decimal representation, row order is fixed, and
no timestamps are written. Each CSV starts with a '# schema=' line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from . import certificates
from .checkpoint import load_field, save_field
from .config import RunConfig, generate_ic, parse_config, serialize_config
from .errors import CheckpointError, ConfigError, ConvergenceError
from .fields import fmc_norm, phi_norm
from .induction import DecompositionState, apply_interval, solve_interval
from .picard import picard_solve

__all__ = [
    "STATUS_OK",
    "STATUS_CONFIG_ERROR",
    "STATUS_FP_FAILURE",
    "STATUS_ORACLE_MISMATCH",
    "RunOutcome",
    "run",
    "run_oracle",
    "check_run",
    "bisect_delta",
    "NORM_SERIES_SCHEMA",
    "CERTIFICATES_SCHEMA",
]

STATUS_OK = 0
STATUS_CONFIG_ERROR = 1
STATUS_FP_FAILURE = 3
STATUS_ORACLE_MISMATCH = 4

NORM_SERIES_SCHEMA = "nstorus.norm_series.v1"
CERTIFICATES_SCHEMA = "nstorus.certificates.v1"
ORACLE_SERIES_SCHEMA = "nstorus.oracle_series.v1"
CHECK_REPORT_SCHEMA = "nstorus.check_report.v1"
BISECT_SCHEMA = "nstorus.bisect_delta.v1"

NORM_SERIES_COLUMNS = ("m", "t", "phi_norm", "fmc_norm_g", "fp_iterations")
CERTIFICATE_COLUMNS = (
    "m", "gaussian_D", "remainder_D", "remainder_decay", "envelope_D",
    "c1", "c2", "c3", "contraction_ok", "fp_iterations", "phi_sup",
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, schema: str, columns, rows) -> None:
    lines = [f"# schema={schema}", ",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def read_csv(path) -> tuple[str, list[str], list[list[str]]]:
    """Read back a schema-tagged CSV as (schema, columns, raw string rows)."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or not lines[0].startswith("# schema="):
        raise ConfigError(f"{path}: missing schema line")
    schema = lines[0].split("=", 1)[1]
    columns = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    return schema, columns, rows


@dataclass
class RunOutcome:
    status: int
    message: str
    output_dir: Path
    records: list
    oracle_max_diff: float | None = None
    failed_step: int | None = None


def _record_row(rec) -> tuple:
    return (rec.m, rec.gaussian_D, rec.remainder_D, rec.remainder_decay,
            rec.envelope_D, rec.c1, rec.c2, rec.c3, rec.contraction_ok,
            rec.fp_iterations, rec.phi_sup)


def run(config: RunConfig) -> RunOutcome:
    """Advance horizon_m unit intervals, writing norm series, certificates,
    optional field checkpoints, and (for short horizons) an oracle cross
    check against the direct Picard solver."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_config.cfg").write_text(serialize_config(config), encoding="ascii")

    params = config.solver_params()
    v0 = generate_ic(config)
    state = DecompositionState.initial(v0)

    norm_rows = []
    records = []
    integer_velocities = [v0]
    status = STATUS_OK
    message = "ok"
    failed_step = None
    try:
        for _ in range(config.horizon_m):
            sol = solve_interval(state, params)
            velocities = sol.velocity_slices()
            g = sol.fixed_point.solution
            m_next = state.m + 1
            for n, t in enumerate(sol.times):
                norm_rows.append((
                    state.m, t,
                    phi_norm(velocities[n], params.alpha),
                    fmc_norm(g.slices[n], m_next, params.decay_c, params.beta),
                    sol.fixed_point.iterations,
                ))
            state, record = apply_interval(state, sol, params)
            records.append(record)
            integer_velocities.append(velocities[-1])
    except ConvergenceError as exc:
        status = STATUS_FP_FAILURE
        failed_step = state.m
        message = (f"fixed-point failure at step m={state.m}: {exc} "
                   f"(last ratio {exc.last_ratio:.3e})")

    if "norm_series" in config.emit:
        _write_csv(out_dir / "norm_series.csv", NORM_SERIES_SCHEMA,
                   NORM_SERIES_COLUMNS, norm_rows)
    if "certificates" in config.emit:
        _write_csv(out_dir / "certificates.csv", CERTIFICATES_SCHEMA,
                   CERTIFICATE_COLUMNS, [_record_row(r) for r in records])
    if status == STATUS_OK and "fields" in config.emit:
        fields_dir = out_dir / "fields"
        fields_dir.mkdir(exist_ok=True)
        save_field(v0, fields_dir / "c0.ckpt")
        for j, h in enumerate(state.gaussian_history, start=1):
            save_field(h, fields_dir / f"h_{j:04d}.ckpt")
        for j, g in enumerate(state.remainder_history, start=1):
            save_field(g, fields_dir / f"g_{j:04d}.ckpt")
        for m, v in enumerate(integer_velocities):
            save_field(v, fields_dir / f"v_{m:04d}.ckpt")

    oracle_max_diff = None
    if status == STATUS_OK and 0 < config.horizon_m <= config.oracle_horizon:
        try:
            trajectory = picard_solve(v0, float(config.horizon_m), params)
        except ConvergenceError as exc:
            return RunOutcome(STATUS_ORACLE_MISMATCH,
                              f"oracle solver failed to converge: {exc}",
                              out_dir, records, None, None)
        diffs = []
        for m, v in enumerate(integer_velocities):
            ref = trajectory.slices[m * params.substeps]
            diffs.append(float((v - ref).magnitudes().max(initial=0.0)))
        oracle_max_diff = max(diffs)
        if oracle_max_diff > config.oracle_tol:
            status = STATUS_ORACLE_MISMATCH
            message = (f"oracle mismatch: max mode-wise deviation "
                       f"{oracle_max_diff:.3e} exceeds {config.oracle_tol:.3e}")
        else:
            message = (f"ok (oracle agreement {oracle_max_diff:.3e} "
                       f"<= {config.oracle_tol:.3e})")

    return RunOutcome(status, message, out_dir, records, oracle_max_diff, failed_step)


def run_oracle(config: RunConfig) -> RunOutcome:
    """Picard-only run over horizon_m; writes oracle_series.csv."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_config.cfg").write_text(serialize_config(config), encoding="ascii")
    params = config.solver_params()
    v0 = generate_ic(config)
    try:
        trajectory = picard_solve(v0, float(config.horizon_m), params)
    except ConvergenceError as exc:
        return RunOutcome(STATUS_FP_FAILURE, f"oracle failed: {exc}", out_dir, [])
    rows = [(t, phi_norm(s, params.alpha)) for t, s in
            zip(trajectory.times, trajectory.slices)]
    _write_csv(out_dir / "oracle_series.csv", ORACLE_SERIES_SCHEMA,
               ("t", "phi_norm"), rows)
    return RunOutcome(
        STATUS_OK,
        f"ok ({trajectory.iterations_used} iterations, final update "
        f"{trajectory.final_update_norm:.3e})",
        out_dir, [],
    )


def check_run(run_dir) -> RunOutcome:
    """Certificate-only re-analysis of a saved run's field checkpoints.

    Re-fits the per-age bound constants from the h_/g_ history files and
    recomputes the data-norm of each integer-time velocity checkpoint,
    writing check_report.csv next to the originals.
    """
    run_dir = Path(run_dir)
    cfg_path = run_dir / "run_config.cfg"
    fields_dir = run_dir / "fields"
    if not cfg_path.is_file():
        return RunOutcome(STATUS_CONFIG_ERROR, f"{cfg_path} not found", run_dir, [])
    if not fields_dir.is_dir():
        return RunOutcome(STATUS_CONFIG_ERROR,
                          f"{fields_dir} not found (run with emit including 'fields')",
                          run_dir, [])
    config = parse_config(cfg_path.read_text(encoding="ascii"))
    params = config.solver_params()
    spec = config.lattice_spec()
    try:
        gauss_hist = [load_field(p, spec) for p in sorted(fields_dir.glob("h_*.ckpt"))]
        rem_hist = [load_field(p, spec) for p in sorted(fields_dir.glob("g_*.ckpt"))]
        velocity_paths = sorted(fields_dir.glob("v_*.ckpt"))
        velocities = [load_field(p, spec) for p in velocity_paths]
    except CheckpointError as exc:
        return RunOutcome(STATUS_CONFIG_ERROR, str(exc), run_dir, [])
    gauss_d = certificates.fit_gaussian_bound(gauss_hist, params)
    rem_d, rem_rate = certificates.fit_remainder_bound(rem_hist, params)
    rows = []
    for j in range(max(len(gauss_hist), len(velocities))):
        rows.append((
            j,
            gauss_d[j - 1] if 1 <= j <= len(gauss_hist) else float("nan"),
            rem_d[j - 1] if 1 <= j <= len(rem_hist) else float("nan"),
            rem_rate[j - 1] if 1 <= j <= len(rem_hist) else float("nan"),
            phi_norm(velocities[j], params.alpha) if j < len(velocities) else float("nan"),
        ))
    _write_csv(run_dir / "check_report.csv", CHECK_REPORT_SCHEMA,
               ("j", "gaussian_D", "remainder_D", "remainder_decay", "phi_norm"),
               rows)
    phis = [phi_norm(v, params.alpha) for v in velocities]
    envelope_ok = all(p <= 2 * config.delta for p in phis)
    message = (
        f"checked {len(gauss_hist)} history ages, {len(velocities)} snapshots; "
        f"max gaussian_D {gauss_d.max(initial=0.0):.6g}, "
        f"max remainder_D {rem_d.max(initial=0.0):.6g}, "
        f"phi envelope {'<= 2 delta' if envelope_ok else 'EXCEEDED'}"
    )
    return RunOutcome(STATUS_OK, message, run_dir, [])


@dataclass
class BisectOutcome:
    delta_lo: float
    delta_hi: float
    rows: list
    message: str
    status: int = STATUS_OK


def _converges(config: RunConfig, delta: float, horizon: int) -> bool:
    trial = replace(config, delta=delta, horizon_m=horizon)
    params = trial.solver_params()
    state = DecompositionState.initial(generate_ic(trial))
    try:
        for _ in range(horizon):
            sol = solve_interval(state, params)
            state, _ = apply_interval(state, sol, params)
    except ConvergenceError:
        return False
    return True


def bisect_delta(config: RunConfig, delta_lo: float = 1e-6, delta_hi: float = 1.0,
                 bisect_steps: int = 20, bisect_horizon: int = 50) -> BisectOutcome:
    """Bracket the largest smallness scale for which bisect_horizon steps
    converge; writes bisect_delta.csv rows (iteration, delta, converged)."""
    if not 0 < delta_lo < delta_hi:
        raise ConfigError("need 0 < delta_lo < delta_hi")
    rows = []
    if not _converges(config, delta_lo, bisect_horizon):
        return BisectOutcome(delta_lo, delta_hi, rows,
                             f"delta_lo={delta_lo!r} already fails to converge",
                             STATUS_FP_FAILURE)
    rows.append((0, delta_lo, True))
    if _converges(config, delta_hi, bisect_horizon):
        rows.append((0, delta_hi, True))
        out = BisectOutcome(delta_hi, delta_hi, rows,
                            f"delta_hi={delta_hi!r} converges; threshold is above it")
        _write_bisect(config, out)
        return out
    rows.append((0, delta_hi, False))
    lo, hi = delta_lo, delta_hi
    for i in range(1, bisect_steps + 1):
        mid = math.sqrt(lo * hi)  # bisect in log scale: the regimes span decades
        ok = _converges(config, mid, bisect_horizon)
        rows.append((i, mid, ok))
        if ok:
            lo = mid
        else:
            hi = mid
    out = BisectOutcome(lo, hi, rows,
                        f"contraction threshold bracketed in [{lo!r}, {hi!r}] "
                        f"after {bisect_steps} bisection steps")
    _write_bisect(config, out)
    return out


def _write_bisect(config: RunConfig, outcome: BisectOutcome) -> None:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "bisect_delta.csv", BISECT_SCHEMA,
               ("iteration", "delta", "converged"), outcome.rows)
