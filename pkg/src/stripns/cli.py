"""``strip-ns <eig|ineq|evolve|stokes|audit> --config <path> [--out <dir>] [--seed <n>]``."""

from __future__ import annotations

import argparse
import logging
import platform
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__, kernels
from .config import ConfigError, RunConfig, check_stability, evaluate_on_grid, parse_config
from .galerkin import (
    LEDGER_COLUMNS,
    ForcingSpec,
    GalerkinState,
    gronwall_audit,
    identity_residuals,
    integrate_run,
    ledger,
    ledger_magnitude,
    ledger_rows,
    modal_operators,
    project_initial,
    uniqueness_experiment,
    write_checkpoint,
)
from .grid import ScalarField, SlipPair, StripGeometry, VectorField, build_grid
from .inequalities import SWEEP_COLUMNS, check_l4_scalar, matched_grid, random_admissible_field, sweep, sweep_rows
from .io import sha256_file, write_csv, write_json
from .plotting import emit_plot
from .regularity import StokesProblem, manufactured_free_slip, stokes_solve, strong_solution_audit
from .spaces import robin_project, velocity_from_stream
from .spectral import ShiftParams, export_basis, solve_eigenpairs, verify_basis

log = logging.getLogger("stripns")

REPORT_SCHEMA = "stripns.report/1"
MANIFEST_SCHEMA = "stripns.manifest/1"


@dataclass
class Setup:
    cfg: RunConfig

    def __post_init__(self) -> None:
        c = self.cfg
        self.grid = build_grid(StripGeometry(c.L), c.nx, c.ny)
        self.slip = SlipPair(c.k0, c.k1)
        self.shift = ShiftParams.from_slip(self.slip, c.mu, c.resolved_epsilon(), c.beta)
        self._basis = None
        self._ops = None

    @property
    def basis(self):
        if self._basis is None:
            self._basis = solve_eigenpairs(self.cfg.m, self.grid, self.slip, self.cfg.mu, self.shift, self.cfg.a_max)
        return self._basis

    @property
    def ops(self):
        if self._ops is None:
            self._ops = modal_operators(self.basis)
        return self._ops

    def forcing(self) -> ForcingSpec:
        c = self.cfg
        params = {"mu": c.mu, "k0": c.k0, "k1": c.k1}
        if c.forcing_f1.strip() in ("0", "0.0") and c.forcing_f2.strip() in ("0", "0.0"):
            return ForcingSpec()
        grid = self.grid

        def f(t: float):
            return evaluate_on_grid(c.forcing_f1, grid, t, **params), evaluate_on_grid(c.forcing_f2, grid, t, **params)

        df = None
        if c.forcing_df1 is not None or c.forcing_df2 is not None:
            e1 = c.forcing_df1 or "0"
            e2 = c.forcing_df2 or "0"

            def df(t: float):
                return evaluate_on_grid(e1, grid, t, **params), evaluate_on_grid(e2, grid, t, **params)

        return ForcingSpec(f, df)

    def initial_field(self) -> VectorField:
        c = self.cfg
        if c.initial == "random":
            u = random_admissible_field(self.grid, self.slip, c.mu, (c.seed, 0))
        elif c.initial == "mode1":
            u = self.basis.pairs[0].field
        else:
            psi = evaluate_on_grid(c.initial[4:], self.grid, 0.0, mu=c.mu, k0=c.k0, k1=c.k1)
            psi = robin_project(psi, self.grid, self.slip, c.mu)
            u = velocity_from_stream(ScalarField(self.grid, psi), robin=True, tol=1e-8)
        norm = float(np.sqrt(np.sum(self.grid.weights * (u.u1.values**2 + u.u2.values**2))))
        if norm == 0:
            return u
        return u.scaled(c.amplitude / norm)


def _report(kind: str, cfg: RunConfig, body: dict) -> dict:
    return {"schema": REPORT_SCHEMA, "kind": kind, "config_sha256": cfg.digest(), **body}


def _clean(obj):
    """JSON-friendly copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# subcommands


def run_eig(s: Setup, out: Path) -> list[Path]:
    basis = s.basis
    files = export_basis(basis, out)
    rows = [(j, p.x_mode, p.Lambda) for j, p in enumerate(basis.pairs)]
    files.append(write_csv(out / "spectrum.csv", ("j", "a", "Lambda"), rows))
    rep = verify_basis(basis)
    files.append(
        write_json(
            out / "eig_report.json",
            _clean(_report("eig", s.cfg, {"verify": rep.as_dict(), "beta": s.shift.beta, "epsilon": s.shift.epsilon})),
        )
    )
    files.append(emit_plot(out / "spectrum.csv", "spectrum"))
    return files


def run_ineq(s: Setup, out: Path) -> list[Path]:
    c = s.cfg
    reports = sweep(c.lemmas, c.L_values, c.ensemble_size, c.seed, s.slip, c.mu, c.ineq_ny)
    files = []
    for name, rep in reports.items():
        files.append(write_json(out / f"ineq_{name}.json", _clean(_report("ineq", c, rep.as_dict()))))
    scalar = check_l4_scalar(matched_grid(c.L_values[0], c.ineq_ny), c.ensemble_size, c.seed)
    files.append(write_json(out / "ineq_l4_scalar.json", _clean(_report("ineq", c, scalar.as_dict()))))
    files.append(write_csv(out / "ineq_sweep.csv", SWEEP_COLUMNS, sweep_rows(reports)))
    files.append(emit_plot(out / "ineq_sweep.csv", "sweep"))
    return files


def _evolve(s: Setup):
    c = s.cfg
    check_stability(c)
    state, resid = project_initial(s.initial_field(), s.basis)
    forcing = s.forcing()
    traj = integrate_run(state, c.dt, c.T, forcing, s.ops)
    return state, resid, forcing, traj


def run_evolve(s: Setup, out: Path) -> list[Path]:
    c = s.cfg
    state, resid, forcing, traj = _evolve(s)
    recs = ledger(traj)
    files = [write_csv(out / "ledger.csv", LEDGER_COLUMNS, ledger_rows(recs))]
    fnorms = [forcing.l2_norm(float(t), s.grid) for t in traj.times]
    gron = gronwall_audit(recs, fnorms)
    ires = identity_residuals(traj)
    mag = ledger_magnitude(recs)
    summary = {
        "projection_residual": resid,
        "backend": kernels.BACKEND,
        "stability_bound": s.ops.stability_bound(),
        "tensor_defect": s.ops.tensor.defect,
        "sup_kinetic": max(r.kinetic for r in recs),
        "sup_h1": max(r.h1_norm for r in recs),
        "sup_dt_norm": max(r.dt_norm for r in recs),
        "identity_residual_max": float(ires.max()),
        "identity_residual_scaled": float(ires.max() / (c.dt**3 * mag)) if mag > 0 else 0.0,
        "gronwall": gron.as_dict(),
    }
    if c.delta > 0:
        u = uniqueness_experiment(state, c.delta, c.dt, c.T, forcing, s.ops, seed=c.seed)
        summary["uniqueness"] = u.as_dict()
    files.append(write_json(out / "run_summary.json", _clean(_report("evolve", c, summary))))
    final = GalerkinState(traj.coeffs[-1], float(traj.times[-1]), s.basis)
    files.append(write_checkpoint(final, out / "checkpoint.json"))
    files.append(emit_plot(out / "ledger.csv", "energy"))
    return files


def run_stokes(s: Setup, out: Path) -> list[Path]:
    c = s.cfg
    grid = s.grid
    exact = None
    if c.stokes_rhs == "manufactured":
        exact, F = manufactured_free_slip(grid, c.mu)
    else:
        f = s.forcing()
        if f.is_zero:
            F = VectorField.zeros(grid)
        else:
            f1, f2 = f.f(0.0)
            F = VectorField(ScalarField(grid, f1), ScalarField(grid, f2))
    sol = stokes_solve(StokesProblem(F, s.slip, c.mu, s.shift.beta, c.resolved_epsilon()))
    body = {"solution": sol.summary(), "beta": s.shift.beta}
    if exact is not None:
        err = np.sqrt(np.sum(grid.weights * ((sol.u.u1.values - exact.u1.values) ** 2 + (sol.u.u2.values - exact.u2.values) ** 2)))
        ref = np.sqrt(np.sum(grid.weights * (exact.u1.values**2 + exact.u2.values**2)))
        body["manufactured_rel_l2_error"] = float(err / ref)
    files = [write_json(out / "stokes_report.json", _clean(_report("stokes", c, body)))]
    X, Y = grid.mesh()
    cols = ("x", "y", "u1", "u2", "dpx", "dpy", "w", "psi")
    arrays = [X, Y, sol.u.u1.values, sol.u.u2.values, sol.p_grad.u1.values, sol.p_grad.u2.values, sol.w.values, sol.psi.values]
    rows = zip(*(a.ravel().tolist() for a in arrays))
    files.append(write_csv(out / "stokes_solution.csv", cols, rows))
    return files


def run_audit(s: Setup, out: Path) -> list[Path]:
    c = s.cfg
    _, _, forcing, traj = _evolve(s)
    rep = strong_solution_audit(traj, forcing, c.audit_samples)
    return [write_json(out / "audit_report.json", _clean(_report("audit", c, rep)))]


COMMANDS = {
    "eig": run_eig,
    "ineq": run_ineq,
    "evolve": run_evolve,
    "stokes": run_stokes,
    "audit": run_audit,
}


def write_manifest(out: Path, command: str, cfg: RunConfig, files: list[Path]) -> Path:
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "config": {k: v for k, v in cfg.as_dict().items() if k != "out"},
        "config_sha256": cfg.digest(),
        "seed": cfg.seed,
        "versions": {
            "stripns": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "kernel_backend": kernels.BACKEND,
        },
        "outputs": {p.name: sha256_file(p) for p in sorted(files)},
    }
    return write_json(out / "manifest.json", _clean(manifest))


def run(command: str, cfg: RunConfig) -> list[Path]:
    if command not in COMMANDS:
        raise ValueError(f"unknown subcommand {command!r}")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files = COMMANDS[command](Setup(cfg), out)
    files.append(write_manifest(out, command, cfg, files))
    return files


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strip-ns", description=__doc__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="key = value configuration file")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="random seed (overrides the config)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(args.config, {"out": args.out, "seed": args.seed})
        files = run(args.command, cfg)
    except ConfigError as exc:
        print(f"strip-ns: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surface module context with a nonzero status
        print(f"strip-ns {args.command}: {type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for f in files:
        log.info("wrote %s", f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
