"""Command-line entry point: verify-protocol, error-sweep, rate-sweep, simulate, physics."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Sequence

from . import ensemble_physics, error_model, protocols, repeater_sim
from .config import ConfigError, RunConfig, load_config
from .engine import basis_state, fidelity

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG = 0, 1, 2

# CNOT truth table, one row per input; "=>" marks blockade-suppressed steps.
CNOT_TRUTH_TABLE = (
    "s_Bu s_Bd -> r_Bu s_Bd => r_Bu s_Bd -> r_Bu s_Bd => r_Bu s_Bd -> s_Bu s_Bd",
    "s_Bu t_Bd -> r_Bu t_Bd -> r_Bu t_Bd => r_Bu t_Bd -> r_Bu t_Bd -> s_Bu t_Bd",
    "t_Bu s_Bd -> t_Bu s_Bd -> t_Bu r_Bd -> t_Bu t_Bd -> t_Bu t_Bd -> t_Bu t_Bd",
    "t_Bu t_Bd -> t_Bu t_Bd -> t_Bu t_Bd -> t_Bu r_Bd -> t_Bu s_Bd -> t_Bu s_Bd",
)

ERROR_COLUMNS = (
    "delta_dd_MHz", "tau_us", "omega_opt_rad_s", "e_loc_min", "e_cnot_min",
    "omega_cnot_rad_s", "e_loc_numeric", "e_cnot_numeric",
)
RATE_COLUMNS = (
    "L_km", "n", "variant", "p_link", "T_analytic_s", "T_mc_mean_s", "T_mc_ci95_s",
    "rate_per_s", "final_F", "purify_rounds", "non_converged",
)
TRAJECTORY_COLUMNS = ("level", "action", "F", "q1", "success_prob")

FIDELITY_TOL = 1e-10


# --- output helpers ----------------------------------------------------------------

def _csv_text(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in columns})
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(text: str, out: str | None) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def _figure_path(args) -> Path | None:
    if args.plot is None:
        return None
    if args.plot is not True:
        return Path(args.plot)
    if not args.out:
        raise ConfigError("--plot without a path needs --out to place the figure next to")
    return Path(args.out).with_suffix(".png")


def _table(columns, rows, fmt) -> str:
    if fmt == "json":
        return _json_text([{k: r[k] for k in columns} for r in rows])
    return _csv_text(columns, rows)


# --- verify-protocol -----------------------------------------------------------------

class _Checks:
    def __init__(self, out):
        self.out = out
        self.results: list[tuple[str, bool]] = []

    def record(self, name: str, passed: bool, detail: str = "") -> None:
        self.results.append((name, passed))
        self.out.write(f"{name}: {detail} [{'ok' if passed else 'FAIL'}]\n")

    @property
    def first_failure(self) -> str | None:
        return next((n for n, ok in self.results if not ok), None)


def verify_protocol(row: int | None = None, corrupt: bool = False, out=None) -> int:
    out = out or sys.stdout
    checks = _Checks(out)

    out.write("# CNOT Bu (control) -> Bd (target)\n")
    pulses = protocols.cnot_pulses("Bu", "Bd")
    out.write("pulses: " + " | ".join(f"{i} {p.label()}" for i, p in enumerate(pulses, 1)) + "\n")
    rows = range(1, 5) if row is None else [row]
    for k in rows:
        c, t = protocols.CNOT_ROWS[k - 1]
        steps = protocols.cnot_trace(protocols.cnot_pair_state(c, t), "Bu", "Bd")
        line = protocols.format_trace_row(steps, ("Bu", "Bd"))
        out.write(f"row {k}: {line}\n")
        checks.record(f"truth table row {k}", line == CNOT_TRUTH_TABLE[k - 1], "matches truth table")
    if row is not None:
        return _finish_checks(checks, out)

    out.write("\n# Bell generation in ensemble A\n")
    start = basis_state(("A",))
    steps = protocols.run_traced(start, protocols.bell_generation_pulses("A", corrupt=corrupt))
    for i, st in enumerate(steps):
        label = "start" if st.pulse is None else st.pulse.label()
        arrow = "  " if st.pulse is None else st.arrow
        out.write(f"  {i} {arrow} {label:<26} {st.state.pretty()}\n")
    f_bell = fidelity(steps[-1].state, protocols.bell_target_local("A"))
    checks.record("bell generation", f_bell >= 1 - FIDELITY_TOL, f"fidelity {f_bell:.12f}")

    out.write("\n# Entanglement swap A-Bu x Bd-C -> A-C\n")
    for res in protocols.swap_protocol(protocols.swap_input()):
        name = f"swap outcome ({','.join(res.outcome)})"
        ok = res.fidelity >= 1 - FIDELITY_TOL and abs(res.probability - 0.25) < FIDELITY_TOL
        checks.record(name, ok, f"p={res.probability:.12f} fidelity={res.fidelity:.12f}")

    out.write("\n# Purification (ideal gates)\n")
    for F in (0.6, 0.7, 0.8, 0.9, 0.95):
        kept, fid = protocols.purify_fidelity_check(F)
        want_kept = F * F + (1 - F) ** 2
        want_fid = F * F / want_kept
        ok = abs(kept - want_kept) < FIDELITY_TOL and abs(fid - want_fid) < FIDELITY_TOL
        checks.record(
            f"purify F={F:.2f}", ok,
            f"kept={kept:.12f} (expect {want_kept:.12f}) fidelity={fid:.12f} (expect {want_fid:.12f})",
        )
    return _finish_checks(checks, out)


def _finish_checks(checks: _Checks, out) -> int:
    failed = checks.first_failure
    n_ok = sum(ok for _, ok in checks.results)
    if failed:
        out.write(f"result: FAIL ({n_ok}/{len(checks.results)} checks); first failure: {failed}\n")
        return EXIT_ASSERT
    out.write(f"result: PASS ({n_ok}/{len(checks.results)} checks)\n")
    return EXIT_OK


# --- subcommands ---------------------------------------------------------------------

def cmd_verify_protocol(args, cfg: RunConfig) -> int:
    if args.row is not None and not 1 <= args.row <= 4:
        raise ConfigError("--row must be 1..4")
    buf = io.StringIO()
    status = verify_protocol(args.row, args.corrupt_convention, out=buf)
    _emit(buf.getvalue(), args.out)
    return status


def cmd_error_sweep(args, cfg: RunConfig) -> int:
    taus = args.tau_us or list(cfg.tau_us)
    deltas = args.delta_dd_mhz or list(cfg.delta_dd_MHz)
    rows = error_model.error_sweep(deltas, taus, cfg.angular_convention)
    _emit(_table(ERROR_COLUMNS, [asdict(r) for r in rows], args.format), args.out)
    fig = _figure_path(args)
    if fig:
        from .plotting import plot_error_sweep

        plot_error_sweep(rows, fig)
    return EXIT_OK


def cmd_rate_sweep(args, cfg: RunConfig) -> int:
    cfg.require_seed()
    L_grid = args.L_km or list(cfg.L_km)
    variants = args.variants or list(cfg.variants)
    trials = cfg.trials if args.trials is None else args.trials
    rows = repeater_sim.rate_sweep(cfg.chain, L_grid, variants, trials=trials, workers=args.workers)
    _emit(_table(RATE_COLUMNS, [asdict(r) for r in rows], args.format), args.out)
    for r in rows:
        if r.non_converged:
            sys.stderr.write(f"warning: NonConvergence at L={r.L_km:g} km, variant {r.variant}\n")
    fig = _figure_path(args)
    if fig:
        from .plotting import plot_rate_sweep

        plot_rate_sweep(rows, fig)
    return EXIT_OK


def simulate_report(cfg: RunConfig, trials: int, workers: int = 1) -> dict:
    chain = cfg.chain
    stats = repeater_sim.monte_carlo(chain, trials, workers=workers)
    traj = chain.trajectory()
    report = stats.to_dict()
    report.update(
        scenario=cfg.scenario,
        config=asdict(chain),
        T_analytic_s=repeater_sim.analytic_total_time(chain, stats),
        exact_alpha0=repeater_sim.exact_alpha0(chain.segments, stats.p_link),
        good_subspace_weight=traj.good_subspace_weight(),
        trajectory=traj.to_rows(),
    )
    return _clean(report)


def cmd_simulate(args, cfg: RunConfig) -> int:
    cfg.require_seed()
    if args.L_km:
        cfg = cfg.with_chain(L=args.L_km[0])
    if args.variant:
        cfg = replace(cfg, chain=replace(cfg.chain, **repeater_sim.VARIANTS[args.variant]))
    trials = cfg.trials if args.trials is None else args.trials
    if trials < 1:
        raise ConfigError("simulate needs at least one trial")
    report = simulate_report(cfg, trials, args.workers)
    if args.format == "csv":
        _emit(_csv_text(TRAJECTORY_COLUMNS, report["trajectory"]), args.out)
    else:
        _emit(_json_text(report), args.out)
    if args.trajectory:
        _emit(_csv_text(TRAJECTORY_COLUMNS, report["trajectory"]), args.trajectory)
    return EXIT_OK


def cmd_physics(args, cfg: RunConfig) -> int:
    params = cfg.physics
    overrides = {}
    if args.diameter_um is not None:
        overrides["diameter_um"] = args.diameter_um
    if args.delta_dd_mhz:
        overrides["delta_dd_MHz"] = args.delta_dd_mhz[0]
    try:
        params = replace(params, **overrides)
        report = ensemble_physics.ensemble_report(params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    as_json = args.json or args.format == "json"
    _emit(_json_text(report.to_dict()) if as_json else report.to_text() + "\n", args.out)
    for w in report.warnings:
        sys.stderr.write(f"warning: {w}\n")
    return EXIT_OK


COMMANDS = {
    "verify-protocol": cmd_verify_protocol,
    "error-sweep": cmd_error_sweep,
    "rate-sweep": cmd_rate_sweep,
    "simulate": cmd_simulate,
    "physics": cmd_physics,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (defaults to the shipped default chain)")
    common.add_argument("--seed", type=int, help="RNG seed, overrides the config")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--workers", type=int, default=1, help="worker processes for Monte Carlo")
    common.add_argument("--out", help="output file (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--angular-convention", choices=("2pi", "1"), help="MHz -> rad/s factor")
    common.add_argument(
        "--plot", nargs="?", const=True, default=None,
        help="render a figure; without a value it goes next to --out as .png",
    )

    parser = argparse.ArgumentParser(prog="rydberg-repeater", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-protocol", parents=[common], help="replay the pulse protocols")
    p.add_argument("--row", type=int, help="print only this truth-table row (1-4)")
    p.add_argument("--corrupt-convention", action="store_true", help="negative control: flip a pulse sign")

    p = sub.add_parser("error-sweep", parents=[common], help="optimized errors vs interaction shift")
    p.add_argument("--tau-us", type=float, nargs="+")
    p.add_argument("--delta-dd-mhz", type=float, nargs="+")

    p = sub.add_parser("rate-sweep", parents=[common], help="distribution time vs distance")
    p.add_argument("--L-km", dest="L_km", type=float, nargs="+")
    p.add_argument("--variants", nargs="+", choices=sorted(repeater_sim.VARIANTS))

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo report for one scenario")
    p.add_argument("--L-km", dest="L_km", type=float, nargs=1)
    p.add_argument("--variant", choices=sorted(repeater_sim.VARIANTS))
    p.add_argument("--trajectory", help="also write the fidelity trajectory CSV here")

    p = sub.add_parser("physics", parents=[common], help="ensemble parameter consistency report")
    p.add_argument("--json", action="store_true")
    p.add_argument("--diameter-um", type=float)
    p.add_argument("--delta-dd-mhz", type=float, nargs=1)
    return parser


DEFAULT_FORMAT = {"simulate": "json", "physics": "text"}


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = replace(cfg, seed=args.seed, chain=replace(cfg.chain, rng_seed=args.seed))
    if args.angular_convention:
        cfg = replace(
            cfg,
            angular_convention=args.angular_convention,
            physics=replace(cfg.physics, angular_convention=args.angular_convention),
        )
    if args.trials is not None and args.trials < 0:
        raise ConfigError("--trials must be non-negative")
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = DEFAULT_FORMAT.get(args.command, "csv")
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
