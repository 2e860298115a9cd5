"""Seeded Monte-Carlo trials, sweeps, complexity and runtime reports.

Seed discipline: a sweep derives the seed for trial t of grid point j from
the master seed via numpy's SeedSequence(entropy=master, spawn_key=(j, t)),
and each trial splits its own seed into independent channel / noise /
solver streams.  Any trial can therefore be re-run in isolation.  The CS
sensing matrix is drawn once per channel count P (spawn_key=(1000000+P,))
so its kernels are precomputed once and shared by every trial at that P,
mirroring an offline kernel bank.
"""

from __future__ import annotations

import csv
import math
import platform
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import channel as ch
from . import frontend, mf, recovery
from .codes import CodeFamily, code_family
from .config import SimConfig, SweepConfig, config_lines, with_overrides
from .opcount import OpCounter

SWEEP_COLUMNS = ["receiver", "P", "snr_db", "n_sym", "trials", "success_rate",
                 "rmse_q_s", "rmse_k_rads", "mean_ops", "mean_wall_s",
                 "partial_rate"]

# The CS trial pipeline gives the solver headroom beyond the nominal
# sparsity (off-grid paths straddle adjacent bins and burn support slots)
# and caps how many covariance modes the reduction keeps.
SOLVER_BUDGET_FACTOR = 2
CTF_RANK_FACTOR = 4


@dataclass
class TrialRecord:
    seed: int
    snr_db: float
    receiver: str
    p_channels: int | None
    n_sym: int
    success: bool
    partial_frac: float
    delay_err_s: list = field(default_factory=list)
    dopp_err_rads: list = field(default_factory=list)
    delay_err_bins: list = field(default_factory=list)
    dopp_err_bins: list = field(default_factory=list)
    op_count: int = 0
    wall_time: float = 0.0


@dataclass
class TrialContext:
    """Precomputed per-configuration state shared across trials."""

    codes: CodeFamily
    grid: ch.GridSpec
    shift_matrix: np.ndarray
    matrix: frontend.SensingMatrix | None = None
    kernels: np.ndarray | None = None
    solver_dict: frontend.SensingMatrix | None = None
    whitener: np.ndarray | None = None


def build_context(cfg: SimConfig, p_channels: int | None = None,
                  matrix_seed=None, solver_response: bool = True) -> TrialContext:
    """Build codes, grid, shifted-code rows and (for CS) the kernel bank.

    solver_response=True additionally precomputes the whitened effective
    dictionary the sparse solver scores against: the compressed response of
    every grid hypothesis, decorrelated by the Cholesky factor of the kernel
    Gram (the compressed noise covariance up to sigma^2).
    """
    grid = cfg.grid()
    codes = code_family(cfg.i_total, cfg.m0, cfg.n_periods)
    shift = mf.shifted_code_matrix(codes, grid, cfg.pulse, cfg.tg_chips)
    ctx = TrialContext(codes=codes, grid=grid, shift_matrix=shift)
    if p_channels is not None:
        if matrix_seed is None:
            matrix_seed = np.random.SeedSequence(
                entropy=cfg.seed, spawn_key=(1_000_000 + p_channels,))
        ctx.matrix = frontend.build_sensing_matrix(
            p_channels, grid.n_columns(cfg.i_total), cfg.matrix_kind,
            matrix_seed)
        ctx.kernels = frontend.build_kernels(ctx.matrix, codes, grid,
                                             cfg.pulse, cfg.tg_chips, shift)
        if solver_response:
            response = frontend.effective_dictionary(ctx.kernels, codes, grid,
                                                     cfg.pulse, cfg.tg_chips,
                                                     shift)
            gram_psi = np.conj(ctx.kernels) @ ctx.kernels.T
            jitter = 1e-12 * np.real(np.trace(gram_psi)) / p_channels
            ctx.whitener = np.linalg.cholesky(
                gram_psi + jitter * np.eye(p_channels))
            ctx.solver_dict = frontend.SensingMatrix(
                entries=scipy.linalg.solve_triangular(ctx.whitener, response,
                                                      lower=True),
                kind="whitened_response", seed=ctx.matrix.seed)
        else:
            ctx.solver_dict = ctx.matrix
    return ctx


def trial_seed(master_seed: int, n_sym: int, snr_db: float,
               trial_index: int) -> int:
    """Documented counter scheme mapping a sweep coordinate to one seed.

    The key deliberately excludes the receiver and channel count, so both
    receivers face identical channel and noise draws at matching grid
    points (paired comparison); any trial can be re-run in isolation.
    """
    snr_key = 2_000_000 + round(float(snr_db) * 1000.0)
    ss = np.random.SeedSequence(entropy=master_seed,
                                spawn_key=(int(n_sym), snr_key, trial_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_trial(cfg: SimConfig, seed: int, receiver: str | None = None,
              context: TrialContext | None = None) -> TrialRecord:
    """One seeded acquisition trial; deterministic in (cfg, seed, receiver).

    MF path: synthesize, correlator bank, noncoherent accumulation, path
    selection.  CS path: synthesize, compress, (covariance reduction when
    several symbols are available), sparse solver, support translation.
    """
    receiver = receiver or cfg.receiver
    if receiver not in ("mf", "cs"):
        raise ValueError(f"receiver must be 'mf' or 'cs', got {receiver!r}")
    if context is None:
        context = build_context(
            cfg, cfg.p_channels if receiver == "cs" else None,
            matrix_seed=np.random.SeedSequence(entropy=int(seed), spawn_key=(3,)))
    grid, codes = context.grid, context.codes

    root = np.random.SeedSequence(entropy=int(seed))
    chan_seed, noise_seed, solver_seed = root.spawn(3)
    chan = ch.draw_channel(chan_seed, grid, cfg.i_total, cfg.i_active,
                           cfg.paths_r, cfg.tau_max_chips, cfg.doppler_max_hz,
                           cfg.n_sym, cfg.on_grid)
    x = ch.synthesize_received(chan, grid, codes, cfg.n_sym, cfg.snr_db,
                               noise_seed, cfg.pulse, cfg.tg_chips)

    counter = OpCounter()
    t0 = time.perf_counter()
    if receiver == "mf":
        tensor = mf.correlate_bank(x, codes, grid, cfg.pulse, cfg.tg_chips,
                                   counter, shift_matrix=context.shift_matrix)
        stat = mf.accumulate(tensor, counter=counter)
        result = mf.select_paths(stat, cfg.i_active, cfg.paths_r, grid, counter)
        result = mf.reselect_with_cancellation(
            result, x, tensor, codes, grid, cfg.i_active, cfg.paths_r,
            cfg.pulse, cfg.tg_chips, context.shift_matrix, counter)
    else:
        if context.kernels is None or context.matrix is None:
            raise ValueError("CS trial needs a context with kernels")
        meas = frontend.compress(x, context.kernels, grid, counter)
        observations = meas
        if context.whitener is not None:
            observations = frontend.CompressedMeasurements(
                c=scipy.linalg.solve_triangular(context.whitener, meas.c,
                                                lower=True))
            counter.add("cs_whitening",
                        cfg.n_sym * context.matrix.p_channels ** 2)
        budget = min(SOLVER_BUDGET_FACTOR * cfg.sparsity,
                     context.matrix.p_channels)
        if cfg.n_sym > 1:
            problem = recovery.ctf_reduce(observations, context.solver_dict,
                                          budget,
                                          max_rank=CTF_RANK_FACTOR * cfg.sparsity,
                                          counter=counter)
        else:
            problem = recovery.raw_problem(observations, context.solver_dict,
                                           budget)
        estimate = recovery.solve_problem(problem, cfg.solver, cfg.boosts,
                                          solver_seed, grid=grid,
                                          counter=counter)
        result = recovery.support_to_acquisition(estimate, grid, cfg.i_active,
                                                 cfg.paths_r, cfg.i_total)
    wall = time.perf_counter() - t0

    active = chan.active_set
    identified = result.detected_set & active
    record = TrialRecord(
        seed=int(seed), snr_db=cfg.snr_db, receiver=receiver,
        p_channels=context.matrix.p_channels if receiver == "cs" else None,
        n_sym=cfg.n_sym,
        success=(not result.partial) and result.detected_set == active,
        partial_frac=len(identified) / len(active),
        op_count=counter.total_macs(), wall_time=wall)
    for sat in sorted(identified):
        det = result.detection_for(sat)
        row = int(np.where(chan.sats == sat)[0][0])
        r_star = chan.strongest_path(row)
        record.delay_err_s.append(
            det.q_bin * grid.delta_tau_s - chan.tau_chips[row, r_star] * grid.t_chip)
        record.dopp_err_rads.append(
            det.k_bin * grid.delta_omega - chan.omega[row, r_star])
        record.delay_err_bins.append(det.q_bin - int(chan.q_bins[row, r_star]))
        record.dopp_err_bins.append(det.k_bin - int(chan.k_bins[row, r_star]))
    return record


def monotone_concordance(xs, ys, tie_band) -> float:
    """Rank concordance of y against x with a noise tie band.

    Classic rank correlations treat Monte-Carlo jitter between statistically
    indistinguishable points as evidence against monotonicity (a saturated
    success curve with one 0.995 among 1.0s scores badly).  Here a pair
    counts as tied when |y_i - y_j| <= tie_band(y_i, y_j); the statistic is
    (concordant - discordant) / decided pairs over the rest, and a series
    with no decided pairs (flat within noise) is monotone by vacuity (1.0).
    """
    xs = list(xs)
    ys = list(ys)
    concordant = discordant = 0
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            if xs[i] == xs[j] or abs(ys[i] - ys[j]) <= tie_band(ys[i], ys[j]):
                continue
            rising = (ys[j] > ys[i]) == (xs[j] > xs[i])
            concordant += rising
            discordant += not rising
    decided = concordant + discordant
    if decided == 0:
        return 1.0
    return (concordant - discordant) / decided


def success_tie_band(trials: int):
    """Two-sigma binomial band for comparing success rates at `trials`."""
    def band(p1, p2):
        var = (p1 * (1 - p1) + p2 * (1 - p2)) / trials
        return 2.0 * math.sqrt(var) + 1e-12
    return band


def relative_tie_band(fraction: float):
    def band(a, b):
        return fraction * max(abs(a), abs(b))
    return band


def rmse_aggregate(records) -> tuple[float, float | None, float | None]:
    """Pooled success rate and conditional RMSEs over trial records.

    Errors are pooled over every (trial, identified satellite) pair; if no
    satellite was ever identified the RMSEs are reported absent (None),
    never zero.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    success_rate = float(np.mean([r.success for r in records]))
    delay = np.concatenate([np.asarray(r.delay_err_s) for r in records]) \
        if any(r.delay_err_s for r in records) else np.zeros(0)
    dopp = np.concatenate([np.asarray(r.dopp_err_rads) for r in records]) \
        if any(r.dopp_err_rads for r in records) else np.zeros(0)
    rmse_q = float(np.sqrt(np.mean(delay ** 2))) if delay.size else None
    rmse_k = float(np.sqrt(np.mean(dopp ** 2))) if dopp.size else None
    return success_rate, rmse_q, rmse_k


def sweep_points(sweep_cfg: SweepConfig):
    """Deterministic grid-point order: receiver, n_sym, P (CS only), SNR."""
    points = []
    for receiver in sweep_cfg.receivers:
        p_values = sweep_cfg.p_list if receiver == "cs" else [None]
        for n_sym in sweep_cfg.n_sym_list:
            for p_channels in p_values:
                for snr_db in sweep_cfg.snr_grid_db:
                    points.append((receiver, n_sym, p_channels, snr_db))
    return points


def run_sweep_point(sweep_cfg: SweepConfig, point_index: int,
                    context: TrialContext) -> tuple[dict, list]:
    receiver, n_sym, p_channels, snr_db = sweep_points(sweep_cfg)[point_index]
    cfg = with_overrides(sweep_cfg.base, n_sym=n_sym, snr_db=snr_db,
                         receiver=receiver,
                         p_channels=p_channels or sweep_cfg.base.p_channels)
    records = [run_trial(cfg, trial_seed(sweep_cfg.base.seed, n_sym, snr_db, t),
                         receiver, context)
               for t in range(sweep_cfg.trials)]
    success_rate, rmse_q, rmse_k = rmse_aggregate(records)
    row = {
        "receiver": receiver,
        "P": p_channels if receiver == "cs" else "",
        "snr_db": snr_db, "n_sym": n_sym, "trials": sweep_cfg.trials,
        "success_rate": success_rate,
        "rmse_q_s": "" if rmse_q is None else repr(rmse_q),
        "rmse_k_rads": "" if rmse_k is None else repr(rmse_k),
        "mean_ops": float(np.mean([r.op_count for r in records])),
        "mean_wall_s": float(np.mean([r.wall_time for r in records])),
        "partial_rate": float(np.mean([r.partial_frac for r in records])),
    }
    return row, records


def sweep(sweep_cfg: SweepConfig, out_path, plot: bool = True,
          progress: bool = False) -> list[dict]:
    """Run the full grid and write one CSV row per point.

    The header comment embeds the complete base configuration and the seed
    scheme; data rows are byte-identical across runs with the same config
    and master seed (timing columns exempt).
    """
    points = sweep_points(sweep_cfg)
    contexts: dict = {}
    rows = []
    for j, (receiver, n_sym, p_channels, snr_db) in enumerate(points):
        key = (receiver, p_channels)
        if key not in contexts:
            contexts[key] = build_context(
                sweep_cfg.base, p_channels if receiver == "cs" else None)
        row, _ = run_sweep_point(sweep_cfg, j, contexts[key])
        rows.append(row)
        if progress:
            print(f"[{j + 1}/{len(points)}] {receiver} n={n_sym} "
                  f"P={p_channels} snr={snr_db} -> "
                  f"success={row['success_rate']:.3f}", flush=True)
    write_sweep_csv(sweep_cfg, rows, out_path)
    if plot:
        from . import plots
        plots.render_sweep_figures(rows, out_path)
    return rows


def write_sweep_csv(sweep_cfg: SweepConfig, rows, out_path) -> None:
    with open(out_path, "w", newline="") as fh:
        fh.write("# gpsacq sweep\n")
        for line in config_lines(sweep_cfg.base):
            fh.write(f"# {line}\n")
        fh.write(f"# snr_grid_db={','.join(str(s) for s in sweep_cfg.snr_grid_db)}\n")
        fh.write(f"# p_list={','.join(str(p) for p in sweep_cfg.p_list)}\n")
        fh.write(f"# n_sym_list={','.join(str(n) for n in sweep_cfg.n_sym_list)}\n")
        fh.write(f"# receivers={','.join(sweep_cfg.receivers)}\n")
        fh.write(f"# trials={sweep_cfg.trials}\n")
        fh.write("# seeds: trial t at (n_sym, snr_db) uses SeedSequence("
                 "master, spawn_key=(n_sym, 2e6+1000*snr_db, t))\n")
        fh.write("# snr convention: noise variance = mean signal power "
                 "per sample * 10^(-snr_db/10)\n")
        fh.write("# ops are complex MACs; wall seconds exclude synthesis\n")
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def read_sweep_csv(path) -> list[dict]:
    with open(path) as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.DictReader(lines))
    for row in rows:
        for key in ("snr_db", "success_rate", "mean_ops", "mean_wall_s",
                    "partial_rate"):
            row[key] = float(row[key])
        for key in ("rmse_q_s", "rmse_k_rads"):
            row[key] = float(row[key]) if row[key] else None
        row["n_sym"] = int(row["n_sym"])
        row["trials"] = int(row["trials"])
        row["P"] = int(row["P"]) if row["P"] else None
    return rows


# -- complexity accounting ---------------------------------------------------

def predicted_counts(cfg: SimConfig, receiver: str) -> dict:
    """Analytic per-stage operation counts for the configured dimensions."""
    grid = cfg.grid()
    dims = grid.n_columns(cfg.i_total)
    sps = grid.samples_per_symbol
    n, s = cfg.n_sym, cfg.sparsity
    if receiver == "mf":
        return {
            "mf_correlations": n * sps * dims,
            "mf_accumulation": n * dims,
            "mf_path_selection": round(n * cfg.i_total * cfg.paths_r
                                       * math.log2(grid.n_bins)),
        }
    pred = {
        "cs_compression": n * sps * cfg.p_channels,
        "omp1_residual": n * s ** 2,
        "omp2_inner_products": n * cfg.p_channels * dims * s,
        "omp3_max_projection": round(s * math.log2(dims)),
        "omp4_least_squares": s ** 3,
        "omp5_stopping": n * cfg.p_channels * s,
    }
    if n > 1:
        pred["ctf_covariance"] = n * cfg.p_channels ** 2
        pred["ctf_eig"] = n ** 2 * cfg.p_channels
    return pred


def dominant_term_ratio(cfg: SimConfig) -> float:
    """CS-to-MF complexity ratio P/(I|K||Q|) + P|S|/M from the dimensions."""
    grid = cfg.grid()
    dims = grid.n_columns(cfg.i_total)
    return cfg.p_channels / dims + cfg.p_channels * cfg.sparsity / grid.m_chips


def complexity_report(cfg: SimConfig, out_path=None, seed: int | None = None):
    """Measured vs predicted per-stage operation counts for both receivers.

    Runs one instrumented trial per receiver at the configured dimensions
    and reports measured counts, the analytic predictions and their ratio,
    plus the dominant-term CS/MF ratio against the measured total ratio.
    """
    seed = cfg.seed if seed is None else seed
    rows = []
    totals = {}
    for receiver in ("mf", "cs"):
        context = build_context(cfg, cfg.p_channels if receiver == "cs" else None,
                                solver_response=False)
        counter = _instrumented_trial(cfg, seed, receiver, context)
        predicted = predicted_counts(cfg, receiver)
        for stage, pred in predicted.items():
            measured = counter.get(stage)
            rows.append({"receiver": receiver, "stage": stage,
                         "measured": measured, "predicted": pred,
                         "ratio": measured / pred if pred else math.nan})
        totals[receiver] = counter.total_macs()
    measured_ratio = totals["cs"] / totals["mf"]
    predicted_ratio = dominant_term_ratio(cfg)
    rows.append({"receiver": "cs/mf", "stage": "total_macs_ratio",
                 "measured": measured_ratio, "predicted": predicted_ratio,
                 "ratio": measured_ratio / predicted_ratio})
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            fh.write("# gpsacq complexity report\n")
            for line in config_lines(cfg):
                fh.write(f"# {line}\n")
            writer = csv.DictWriter(
                fh, fieldnames=["receiver", "stage", "measured", "predicted",
                                "ratio"])
            writer.writeheader()
            writer.writerows(rows)
    return rows


def _instrumented_trial(cfg: SimConfig, seed: int, receiver: str,
                        context: TrialContext) -> OpCounter:
    root = np.random.SeedSequence(entropy=int(seed))
    chan_seed, noise_seed, solver_seed = root.spawn(3)
    chan = ch.draw_channel(chan_seed, context.grid, cfg.i_total, cfg.i_active,
                           cfg.paths_r, cfg.tau_max_chips, cfg.doppler_max_hz,
                           cfg.n_sym, cfg.on_grid)
    x = ch.synthesize_received(chan, context.grid, context.codes, cfg.n_sym,
                               cfg.snr_db, noise_seed, cfg.pulse, cfg.tg_chips)
    counter = OpCounter()
    if receiver == "mf":
        tensor = mf.correlate_bank(x, context.codes, context.grid, cfg.pulse,
                                   cfg.tg_chips, counter,
                                   shift_matrix=context.shift_matrix)
        stat = mf.accumulate(tensor, counter=counter)
        mf.select_paths(stat, cfg.i_active, cfg.paths_r, context.grid, counter)
    else:
        meas = frontend.compress(x, context.kernels, context.grid, counter)
        if cfg.n_sym > 1:
            problem = recovery.ctf_reduce(meas, context.solver_dict,
                                          cfg.sparsity,
                                          max_rank=2 * cfg.sparsity,
                                          counter=counter)
        else:
            problem = recovery.raw_problem(meas, context.solver_dict,
                                           cfg.sparsity)
        estimate = recovery.solve_problem(problem, cfg.solver, cfg.boosts,
                                          solver_seed, counter=counter)
        recovery.support_to_acquisition(estimate, context.grid, cfg.i_active,
                                        cfg.paths_r, cfg.i_total)
    return counter


# -- wall-clock benchmark -----------------------------------------------------

def bench(cfg: SimConfig, p_list, out_path=None, reps: int = 10,
          contexts: dict | None = None,
          solver_response: bool = True) -> list[dict]:
    """Median/IQR receiver runtimes on this machine, one row per receiver/P.

    Times only the processing that follows sampling (bank + selection for
    MF; compression + recovery for CS, kernels precomputed), with one
    warm-up repetition before the timed loop.  Prebuilt per-P contexts can
    be injected (e.g. sliced from one large sensing matrix); without a
    whitened response dictionary the CS side times the canonical solver.
    """
    if reps < 10:
        raise ValueError("bench needs at least 10 repetitions")
    contexts = contexts or {}
    context_mf = contexts.get("mf") or build_context(cfg)
    root = np.random.SeedSequence(entropy=cfg.seed)
    chan_seed, noise_seed = root.spawn(2)
    chan = ch.draw_channel(chan_seed, context_mf.grid, cfg.i_total,
                           cfg.i_active, cfg.paths_r, cfg.tau_max_chips,
                           cfg.doppler_max_hz, cfg.n_sym, cfg.on_grid)
    x = ch.synthesize_received(chan, context_mf.grid, context_mf.codes,
                               cfg.n_sym, cfg.snr_db, noise_seed, cfg.pulse,
                               cfg.tg_chips)

    def time_loop(fn):
        fn()  # warm-up
        times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        q1, med, q3 = np.percentile(times, [25, 50, 75])
        return float(med), float(q3 - q1)

    rows = []

    def run_mf():
        tensor = mf.correlate_bank(x, context_mf.codes, context_mf.grid,
                                   cfg.pulse, cfg.tg_chips,
                                   shift_matrix=context_mf.shift_matrix)
        stat = mf.accumulate(tensor)
        result = mf.select_paths(stat, cfg.i_active, cfg.paths_r,
                                 context_mf.grid)
        mf.reselect_with_cancellation(result, x, tensor, context_mf.codes,
                                      context_mf.grid, cfg.i_active,
                                      cfg.paths_r, cfg.pulse, cfg.tg_chips,
                                      context_mf.shift_matrix)

    med, iqr = time_loop(run_mf)
    rows.append({"receiver": "mf", "P": "", "n_sym": cfg.n_sym,
                 "reps": reps, "median_s": med, "iqr_s": iqr})

    for p_channels in p_list:
        context = contexts.get(p_channels) \
            or build_context(cfg, p_channels, solver_response=solver_response)

        def run_cs():
            meas = frontend.compress(x, context.kernels, context.grid)
            observations = meas
            if context.whitener is not None:
                observations = frontend.CompressedMeasurements(
                    c=scipy.linalg.solve_triangular(context.whitener, meas.c,
                                                    lower=True))
            budget = min(SOLVER_BUDGET_FACTOR * cfg.sparsity,
                         context.matrix.p_channels)
            if cfg.n_sym > 1:
                problem = recovery.ctf_reduce(observations,
                                              context.solver_dict, budget,
                                              max_rank=CTF_RANK_FACTOR * cfg.sparsity)
            else:
                problem = recovery.raw_problem(observations,
                                               context.solver_dict, budget)
            refine_grid = context.grid if context.whitener is not None else None
            estimate = recovery.solve_problem(problem, cfg.solver, cfg.boosts,
                                              seed=0, grid=refine_grid)
            recovery.support_to_acquisition(estimate, context.grid,
                                            cfg.i_active, cfg.paths_r,
                                            cfg.i_total)

        med, iqr = time_loop(run_cs)
        rows.append({"receiver": "cs", "P": p_channels, "n_sym": cfg.n_sym,
                     "reps": reps, "median_s": med, "iqr_s": iqr})

    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            fh.write("# gpsacq bench\n")
            fh.write(f"# platform={platform.platform()}\n")
            fh.write(f"# python={platform.python_version()} numpy={np.__version__}\n")
            fh.write(f"# processor={platform.processor() or 'unknown'}\n")
            for line in config_lines(cfg):
                fh.write(f"# {line}\n")
            writer = csv.DictWriter(
                fh, fieldnames=["receiver", "P", "n_sym", "reps", "median_s",
                                "iqr_s"])
            writer.writeheader()
            writer.writerows(rows)
    return rows
