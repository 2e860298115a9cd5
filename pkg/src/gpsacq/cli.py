"""Command-line entry point: acq {codes, simulate, sweep, complexity, bench}."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments
from .codes import CA_LENGTH, PREFERRED_PAIRS, code_family, generate_ca_code, \
    max_cross_correlation
from .config import load_sim_config, load_sweep_config, with_overrides


def cmd_codes(args) -> int:
    code = generate_ca_code(args.prn, args.m0)
    chips = ",".join("+1" if c > 0 else "-1" for c in code.chips)
    print(f"# prn={args.prn} m0={args.m0}")
    print(f"# chips={chips}")
    if args.m0 == CA_LENGTH:
        n_listed = 32
    else:
        n_listed = min(args.m0, 32)
    family = code_family(n_listed, args.m0)
    print("prn_a,prn_b,max_abs_cross_correlation")
    for other in range(1, n_listed + 1):
        if other == args.prn:
            continue
        print(f"{args.prn},{other},"
              f"{max_cross_correlation(code, family[other]):.9f}")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_sim_config(args.config)
    if args.seed is not None:
        cfg = with_overrides(cfg, seed=args.seed)
    if args.receiver is not None:
        cfg = with_overrides(cfg, receiver=args.receiver)
    record = experiments.run_trial(cfg, cfg.seed, cfg.receiver)
    print(f"receiver={record.receiver} seed={record.seed} "
          f"snr_db={record.snr_db} n_sym={record.n_sym}")
    print(f"success={record.success} identified_frac={record.partial_frac:.3f}")
    if record.delay_err_s:
        rq = float(np.sqrt(np.mean(np.square(record.delay_err_s))))
        rk = float(np.sqrt(np.mean(np.square(record.dopp_err_rads))))
        print(f"rmse_q_s={rq:.6e} rmse_k_rads={rk:.6e}")
    print(f"ops={record.op_count} wall_s={record.wall_time:.4f}")
    return 0 if record.success else 1


def cmd_sweep(args) -> int:
    sweep_cfg = load_sweep_config(args.config)
    experiments.sweep(sweep_cfg, args.out, plot=not args.no_plot,
                      progress=True)
    print(f"Wrote {args.out}")
    return 0


def cmd_complexity(args) -> int:
    cfg = load_sim_config(args.config)
    rows = experiments.complexity_report(cfg, args.out)
    print("receiver,stage,measured,predicted,ratio")
    for row in rows:
        print(f"{row['receiver']},{row['stage']},{row['measured']},"
              f"{row['predicted']},{row['ratio']:.4f}")
    if args.out:
        print(f"Wrote {args.out}")
    return 0


def cmd_bench(args) -> int:
    cfg = load_sim_config(args.config)
    p_list = [int(p) for p in args.p_list.split(",")] if args.p_list \
        else [20, 40, 80, 160, 320, 480]
    rows = experiments.bench(cfg, p_list, args.out, reps=args.reps)
    print("receiver,P,n_sym,reps,median_s,iqr_s")
    for row in rows:
        print(f"{row['receiver']},{row['P']},{row['n_sym']},{row['reps']},"
              f"{row['median_s']:.6f},{row['iqr_s']:.6f}")
    if args.out:
        from . import plots
        plots.render_bench_figure(rows, args.out)
        print(f"Wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acq",
        description="GPS acquisition simulator: exhaustive matched filtering "
                    "vs compressive multichannel acquisition")
    sub = parser.add_subparsers(dest="command", required=True)

    p_codes = sub.add_parser("codes", help="print chips and cross-correlation table")
    p_codes.add_argument("--prn", type=int, required=True)
    p_codes.add_argument("--m0", type=int, default=CA_LENGTH,
                         choices=[CA_LENGTH, *sorted(PREFERRED_PAIRS)])
    p_codes.set_defaults(func=cmd_codes)

    p_sim = sub.add_parser("simulate", help="run one seeded trial")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--receiver", choices=["mf", "cs"], default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="Monte-Carlo sweep to CSV + figures")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--no-plot", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cx = sub.add_parser("complexity", help="operation-count report")
    p_cx.add_argument("--config", required=True)
    p_cx.add_argument("--out", default=None)
    p_cx.set_defaults(func=cmd_complexity)

    p_bench = sub.add_parser("bench", help="wall-clock runtime report")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--out", default=None)
    p_bench.add_argument("--p-list", default=None,
                         help="comma-separated CS channel counts")
    p_bench.add_argument("--reps", type=int, default=10)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
