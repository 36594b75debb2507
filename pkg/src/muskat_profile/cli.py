"""Command-line surface: solves, sweeps, and verification with artifacts.

Four subcommands:

* ``selftest`` -- the analytic anchor suite (closed-form comparisons);
* ``solve``    -- one fixed-point solve, persisting the profile, its
  spectral correction, the iteration history, and diagnostics;
* ``sweep``    -- solves across a slope ladder and fits the scaling laws;
* ``verify``   -- a named module invariant suite (operators, nonlinear,
  taylor).

Every run creates a directory under the output root and writes
``manifest.json`` there *before* any other artifact, so interrupted runs
are detectable (``status`` stays ``"running"``).  The directory name is
derived from a digest of the command and the full configuration
snapshot, which makes reruns land in the same place and -- because all
outputs are deterministic functions of the configuration -- makes the
overwrite byte-identical.  CSV artifacts carry ``#``-prefixed metadata
lines stating the conventions in force (the Hankel normalization string
appears in every spectral file); floats are written with repr-faithful
precision.

Exit codes: 0 success, 1 check failure, 2 configuration error,
3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .checks import SUITES, CheckResult, run_selftest, run_suite
from .config import (
    OUTPUT_ROOT_ENV,
    RunSettings,
    default_settings,
    load_settings,
    resolve_output_root,
    settings_with_overrides,
)
from .errors import (
    AccuracyError,
    ConsistencyError,
    NonConvergenceError,
    ParameterError,
)
from .grids import radial_gradient
from .hankel import NORMALIZATION
from .profile import LinearProfile, klin_gradient, klin_value
from .solver import solve, sweep_s

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NO_CONVERGENCE = 3

DEFAULT_SWEEP = "0.0125,0.025,0.05,0.1"


# ---------------------------------------------------------------------------
# formatting and artifact helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    """Deterministic cell formatting: ints verbatim, floats at full precision."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _jsonable(obj):
    """Recursively convert to plain JSON types; non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _write_json(path: Path, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")


def _write_csv(
    path: Path, header: Sequence[str], rows, meta: Sequence[str] = ()
) -> None:
    buf = io.StringIO()
    for line in meta:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _run_dir_name(command: str, snapshot: dict, params: dict) -> str:
    payload = json.dumps(
        {"command": command, "config": snapshot, "params": params},
        sort_keys=True,
        default=str,
    )
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:10]
    return f"{command}-{digest}"


def _start_run(
    command: str, settings: RunSettings, out_flag: Optional[str], params: dict
) -> tuple[Path, dict]:
    """Create the run directory and write the manifest before anything else."""
    root = Path(resolve_output_root(settings, out_flag))
    run_dir = root / _run_dir_name(command, settings.snapshot, params)
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "parameters": params,
        "config": settings.snapshot,
        "tool_version": __version__,
        "started_at": _utc_now(),
        "finished_at": None,
        "status": "running",
        "outputs": ["manifest.json"],
        "summary": {},
    }
    _write_json(run_dir / "manifest.json", manifest)
    return run_dir, manifest


def _finish_run(
    run_dir: Path,
    manifest: dict,
    status: str,
    outputs: Sequence[str],
    summary: dict,
) -> None:
    manifest["finished_at"] = _utc_now()
    manifest["status"] = status
    manifest["outputs"] = sorted(set(outputs) | {"manifest.json"})
    manifest["summary"] = summary
    _write_json(run_dir / "manifest.json", manifest)


def _print_checks(results: Sequence[CheckResult]) -> None:
    width = max(len(r.name) for r in results)
    print(f"{'check':<{width}}  {'measured':>11}  {'tolerance':>11}  verdict")
    for r in results:
        verdict = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {r.measured:>11.3e}  {r.tolerance:>11.3e}  {verdict}")
    n_fail = sum(not r.passed for r in results)
    total = len(results)
    print(f"{total - n_fail}/{total} checks passed")


def _checks_artifacts(
    run_dir: Path, manifest: dict, results: Sequence[CheckResult]
) -> int:
    _print_checks(results)
    _write_csv(
        run_dir / "checks.csv",
        ("check", "measured", "tolerance", "verdict", "seconds", "detail"),
        [
            (r.name, r.measured, r.tolerance, "pass" if r.passed else "fail", r.seconds, r.detail)
            for r in results
        ],
        meta=("verdict compares measured error against tolerance",),
    )
    passed = all(r.passed for r in results)
    _finish_run(
        run_dir,
        manifest,
        "completed" if passed else "failed",
        ["checks.csv"],
        {r.name: ("pass" if r.passed else "fail") for r in results},
    )
    print(f"artifacts: {run_dir}")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _settings_for(args) -> RunSettings:
    if getattr(args, "config", None):
        return load_settings(args.config)
    return default_settings()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_selftest(args) -> int:
    settings = _settings_for(args)
    run_dir, manifest = _start_run(
        "selftest",
        settings,
        args.out,
        {"tolerance_override": args.tolerance, "seed": args.seed},
    )
    results = run_selftest(tolerance_override=args.tolerance, seed=args.seed)
    return _checks_artifacts(run_dir, manifest, results)


def cmd_verify(args) -> int:
    settings = _settings_for(args)
    run_dir, manifest = _start_run(
        "verify", settings, args.out, {"suite": args.suite, "seed": args.seed}
    )
    results = run_suite(args.suite, seed=args.seed)
    return _checks_artifacts(run_dir, manifest, results)


def _iteration_meta(settings: RunSettings) -> tuple[str, ...]:
    s = settings.snapshot["solver"]
    return (
        f"s = {_fmt(s['s'])}, t1 = {_fmt(s['t1'])}",
        "norm: working-space intersection norm of the spectral correction",
        "delta: norm of the update step; ratio: delta / previous delta",
        "j_cross_deviation: spectral vs physical reconstruction routes (band max-rel)",
        "spectral_consistency: -rho^2 * transform(correction) vs spectral state (band max-rel)",
    )


def cmd_solve(args) -> int:
    settings = settings_with_overrides(
        _settings_for(args), s=args.s, t1=args.t1, tolerance=args.tolerance
    )
    cfg = settings.solver
    run_dir, manifest = _start_run("solve", settings, args.out, {"s": cfg.s, "t1": cfg.t1})
    t0 = time.perf_counter()
    try:
        state, diag = solve(cfg.s, cfg.t1, cfg)
    except NonConvergenceError as exc:
        header = (
            "iteration",
            "norm",
            "delta",
            "ratio",
            "j_cross_deviation",
            "spectral_consistency",
        )
        rows = [
            (r.iteration, r.norm, r.delta, r.ratio, r.j_cross_deviation, r.spectral_consistency)
            for r in exc.history
        ]
        _write_csv(run_dir / "iterations.csv", header, rows, meta=_iteration_meta(settings))
        _finish_run(
            run_dir,
            manifest,
            "failed",
            ["iterations.csv"],
            {"error": str(exc), "iterations": len(rows)},
        )
        print(f"non-convergence: {exc}", file=sys.stderr)
        print(f"history persisted in {run_dir}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    r = cfg.physical_grid.nodes
    lin = LinearProfile(cfg.s)
    klin_vals = klin_value(lin, r)
    klin_prime = klin_gradient(lin, r)
    corr = state.Jg_physical
    corr_prime = radial_gradient(corr)
    corr_second = radial_gradient(corr_prime)
    _write_csv(
        run_dir / "profile.csv",
        (
            "r",
            "k",
            "klin",
            "correction",
            "k_prime",
            "klin_prime",
            "correction_prime",
            "correction_second",
        ),
        zip(
            r,
            klin_vals + corr.values,
            klin_vals,
            corr.values,
            klin_prime + corr_prime.values,
            klin_prime,
            corr_prime.values,
            corr_second.values,
        ),
        meta=(
            f"profile k(r) = klin(r) + correction(r) at s = {_fmt(cfg.s)}, t1 = {_fmt(cfg.t1)}",
            "additive constants fixed to 0; correction is the inverse Laplacian of the solved spectral field",
            f"grid: {cfg.physical_grid.scheme}",
            "derivatives: radial, via fourth-order log-spaced differences of the sampled fields",
        ),
    )
    g = state.g_spectral
    _write_csv(
        run_dir / "spectral.csv",
        ("rho", "g_hat"),
        zip(g.freq_grid.nodes, g.values),
        meta=(
            NORMALIZATION,
            f"spectral correction g_hat at s = {_fmt(cfg.s)}, t1 = {_fmt(cfg.t1)}",
            f"grid: {g.freq_grid.scheme}",
            f"below-grid model: g_hat(rho_min) * (rho/rho_min)^{_fmt(g.low_freq_exponent)}",
            f"above-grid model: {_fmt(g.tail.amplitude)} * exp(-{_fmt(g.tail.decay_rate)}*rho) * rho^{_fmt(g.tail.power)}",
        ),
    )
    header, rows = diag.iteration_rows()
    _write_csv(run_dir / "iterations.csv", header, rows, meta=_iteration_meta(settings))
    payload = diag.to_json_dict()
    payload["t_star"] = state.t_star
    _write_json(run_dir / "diagnostics.json", payload)
    outputs = ["profile.csv", "spectral.csv", "iterations.csv", "diagnostics.json"]
    _finish_run(
        run_dir,
        manifest,
        "completed",
        outputs,
        {
            "converged": diag.converged,
            "iterations": diag.iterations,
            "final_norm": diag.final_norm,
            "residual_relative": diag.residual.relative,
        },
    )
    print(
        f"converged in {diag.iterations} iterations "
        f"({time.perf_counter() - t0:.1f}s): final norm {diag.final_norm:.4e}, "
        f"profile-equation residual {diag.residual.relative:.2e} (relative)"
    )
    print(f"artifacts: {run_dir}")
    return EXIT_OK


def _parse_s_list(raw: str) -> list[float]:
    try:
        values = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ParameterError(f"--s-list: cannot parse {raw!r}") from exc
    if not values:
        raise ParameterError("--s-list: empty list")
    return values


def cmd_sweep(args) -> int:
    settings = settings_with_overrides(_settings_for(args), t1=args.t1)
    cfg = settings.solver
    s_list = _parse_s_list(args.s_list)
    run_dir, manifest = _start_run(
        "sweep", settings, args.out, {"s_list": s_list, "t1": cfg.t1, "jobs": args.jobs}
    )
    t0 = time.perf_counter()
    report = sweep_s(s_list, cfg.t1, cfg, jobs=args.jobs)
    _write_json(run_dir / "sweep.json", report.to_json_dict())
    _write_csv(
        run_dir / "sweep.csv",
        (
            "s",
            "converged",
            "iterations",
            "norm",
            "gradient_norm",
            "weighted_sup_gamma1",
            "weighted_sup_gamma2",
            "residual_relative",
            "error",
        ),
        [
            (
                e.s,
                e.converged,
                e.iterations,
                e.norm,
                e.gradient_norm,
                e.weighted_sup_gamma1,
                e.weighted_sup_gamma2,
                e.residual_relative,
                e.error or "",
            )
            for e in report.entries
        ],
        meta=(
            f"slope ladder at t1 = {_fmt(cfg.t1)}",
            "norm: working-space intersection norm of the converged spectral correction",
            "weighted sups: max of |derivative| / r^(t1-gamma) for gamma in {1, 2}",
        ),
    )
    _write_csv(
        run_dir / "fits.csv",
        ("quantity", "slope", "intercept", "ci95", "window_slope_low", "window_slope_high", "stable"),
        [
            (f.quantity, f.slope, f.intercept, f.ci95, f.window_slopes[0], f.window_slopes[1], f.stable)
            for f in report.fits
        ],
        meta=(
            "log-log least squares of each quantity against s",
            "window slopes drop the largest / smallest s respectively; stable if they differ by <= 0.15",
        ),
    )
    for f in report.fits:
        print(
            f"{f.quantity}: slope {f.slope:.3f} (ci95 {f.ci95:.3f}, "
            f"windows {f.window_slopes[0]:.3f}/{f.window_slopes[1]:.3f}, "
            f"{'stable' if f.stable else 'UNSTABLE'})"
        )
    if report.flagged:
        for e in report.entries:
            if e.error:
                print(f"s = {e.s:g} failed: {e.error}", file=sys.stderr)
    outputs = ["sweep.json", "sweep.csv", "fits.csv"]
    _finish_run(
        run_dir,
        manifest,
        "failed" if report.flagged else "completed",
        outputs,
        {
            "flagged": report.flagged,
            "elapsed_seconds": time.perf_counter() - t0,
            "slopes": {f.quantity: f.slope for f in report.fits},
        },
    )
    print(f"artifacts: {run_dir}")
    return EXIT_NO_CONVERGENCE if report.flagged else EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muskat-profile",
        description=(
            "Construct the self-similar radial interface profile by fixed-point "
            "iteration and verify its operator identities."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="config file (sections: grid, quadrature, solver, output)")
        p.add_argument(
            "--out",
            metavar="DIR",
            help=f"output root (precedence: this flag, ${OUTPUT_ROOT_ENV}, config, 'runs')",
        )

    p = sub.add_parser("selftest", help="run the analytic anchor checks")
    add_io(p)
    p.add_argument("--tolerance", type=float, metavar="X", help="override every check tolerance")
    p.add_argument("--seed", type=int, metavar="N", help="seed for sampled check points")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("solve", help="run one fixed-point solve and persist the profile")
    add_io(p)
    p.add_argument("--s", type=float, metavar="X", help="asymptotic cone slope (>= 0)")
    p.add_argument("--t1", type=float, metavar="X", help="working regularity exponent in (1.5, 2)")
    p.add_argument("--tolerance", type=float, metavar="X", help="convergence tolerance on the update norm")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve across a slope ladder and fit scaling slopes")
    add_io(p)
    p.add_argument(
        "--s-list",
        dest="s_list",
        default=DEFAULT_SWEEP,
        metavar="S1,S2,...",
        help=f"comma-separated log-spaced slopes, at least 4 (default {DEFAULT_SWEEP})",
    )
    p.add_argument("--t1", type=float, metavar="X", help="working regularity exponent in (1.5, 2)")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="parallel worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run one module invariant suite")
    add_io(p)
    p.add_argument("--suite", required=True, choices=sorted(SUITES), help="suite to run")
    p.add_argument("--seed", type=int, metavar="N", help="seed for sampled check points")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (AccuracyError, ConsistencyError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
