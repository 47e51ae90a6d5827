"""Command-line front end.

    sim <experiment> --config <file> [--seed u64] [--trials n] [--out dir]
        [--phase equal:<radians>|random:<seed>|file:<path>]
        [--correlation correlated|independent] [--ptilde-grid csv-list] ...

Exit codes: 0 success, 2 tolerance breach (or blocked by a failed validation
marker), 1 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import (
    DEFAULT_PHASE,
    ToleranceError,
    apply_overrides,
    check_marker,
    dump_correlation,
    dump_estimator_stats,
    run_asymptotic,
    run_cdf,
    run_phase_compare,
    run_sweep_ptilde,
    run_validate,
)

EXPERIMENTS = ("validate", "sweep-ptilde", "cdf", "phase-compare", "asymptotic")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 on usage errors (argparse default is 2)
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_floats(text: str):
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _csv_ints(text: str):
    return [int(v) for v in text.split(",") if v.strip() != ""]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sim", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="experiment", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None, help="override master_seed")
        p.add_argument("--trials", type=int, default=None, help="override Monte-Carlo trials")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--phase", default=DEFAULT_PHASE, help="equal:<radians>|random:<seed>|file:<path>")
        p.add_argument("--force", action="store_true", help="ignore a failed validation marker")
        return p

    p = common(sub.add_parser("validate", help="closed form vs Monte-Carlo oracle"))
    p.add_argument("--ptilde", type=float, default=None, help="override unblocked probability")
    p.add_argument("--rel-tol", type=float, default=0.03)
    p.add_argument("--stderr-cap", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dump-stats", action="store_true", help="also dump per-link estimator statistics")
    p.add_argument("--dump-correlation", action="store_true", help="also dump the correlation matrix")

    p = common(sub.add_parser("sweep-ptilde", help="mean sum throughput vs unblocked probability"))
    p.add_argument("--ptilde-grid", type=_csv_floats, default=None)
    p.add_argument("--draws", type=int, default=50)

    p = common(sub.add_parser("cdf", help="CDF of the per-draw sum throughput"))
    p.add_argument("--ptilde", type=float, default=None)
    p.add_argument("--draws", type=int, default=100)

    p = common(sub.add_parser("phase-compare", help="equal vs random phases, correlated vs independent"))
    p.add_argument("--ptilde", type=float, default=None)
    p.add_argument("--draws", type=int, default=50)

    p = common(sub.add_parser("asymptotic", help="deviation from the large-system limits"))
    p.add_argument("--m-grid", type=_csv_ints, default=[50, 100, 200, 400])
    p.add_argument("--n-grid", type=_csv_ints, default=[16, 64, 144])
    p.add_argument("--mc-trials", type=int, default=2000)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, seed=args.seed, trials=args.trials, p_tilde=getattr(args, "ptilde", None))
    except (ConfigError, OSError) as exc:
        print(f"sim: error: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(args.out)
    try:
        if args.experiment == "validate":
            result = run_validate(
                cfg,
                out_dir,
                phase_spec=args.phase,
                rel_tol=args.rel_tol,
                stderr_cap=args.stderr_cap,
                workers=args.workers,
            )
            if args.dump_stats:
                dump_estimator_stats(cfg, out_dir, phase_spec=args.phase)
            if args.dump_correlation:
                dump_correlation(cfg, out_dir)
            print(f"validate: PASS (worst rel gap {result.worst_gap:.4f}, user {result.worst_user})")
            print(f"wrote {result.csv_path}")
        elif args.experiment == "sweep-ptilde":
            check_marker(out_dir, cfg, force=args.force)
            path = run_sweep_ptilde(cfg, out_dir, grid=args.ptilde_grid, draws=args.draws, phase_spec=args.phase)
            print(f"wrote {path}")
        elif args.experiment == "cdf":
            check_marker(out_dir, cfg, force=args.force)
            path = run_cdf(cfg, out_dir, draws=args.draws, phase_spec=args.phase)
            print(f"wrote {path}")
        elif args.experiment == "phase-compare":
            check_marker(out_dir, cfg, force=args.force)
            path = run_phase_compare(cfg, out_dir, draws=args.draws)
            print(f"wrote {path}")
        elif args.experiment == "asymptotic":
            check_marker(out_dir, cfg, force=args.force)
            path = run_asymptotic(
                cfg, out_dir, m_grid=args.m_grid, n_grid=args.n_grid, trials=args.mc_trials, phase_spec=args.phase
            )
            print(f"wrote {path}")
    except ToleranceError as exc:
        print(f"sim {args.experiment}: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"sim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
