"""Jointly-sparse support recovery from the compressed measurements.

Covers the continuous-to-finite reduction of many measurement vectors to a
compact frame, greedy orthogonal matching pursuit in single- and
multiple-vector form, the reduce-and-boost wrapper, and the translation of
a recovered support back into an acquisition decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import GridSpec
from .frontend import CompressedMeasurements, SensingMatrix
from .mf import AcquisitionResult, SatelliteDetection
from .opcount import OpCounter

RIDGE_SCALE = 1e-12  # ridge on the restricted normal equations, times trace


def _project(bh: np.ndarray, columns: np.ndarray) -> np.ndarray:
    """bh @ columns without promoting a large real matrix to complex."""
    if np.iscomplexobj(bh) or not np.iscomplexobj(columns):
        return bh @ columns
    return bh @ np.ascontiguousarray(columns.real) \
        + 1j * (bh @ np.ascontiguousarray(columns.imag))


@dataclass
class MmvProblem:
    """Measurements sharing one sparse support: solve C = B Y."""

    matrix: SensingMatrix
    observations: np.ndarray  # (P, d)
    sparsity: int
    empty: bool = False


@dataclass
class SupportEstimate:
    indices: np.ndarray        # sorted flattened (i, k, q) positions
    coefficients: np.ndarray   # (|S|, d) least-squares rows, aligned
    residual_norm: float
    residual_history: list = field(default_factory=list)


def _restricted_least_squares(b_cols: np.ndarray, c: np.ndarray):
    """Solve min ||C - B_S Y||_F with a small ridge for degenerate B_S."""
    gram = np.conj(b_cols.T) @ b_cols
    ridge = RIDGE_SCALE * np.real(np.trace(gram))
    if ridge == 0.0:
        ridge = RIDGE_SCALE
    coef = np.linalg.solve(gram + ridge * np.eye(gram.shape[0]), np.conj(b_cols.T) @ c)
    return coef, c - b_cols @ coef


def ctf_reduce(measurements, matrix: SensingMatrix, sparsity: int,
               rank_tol: float = 1e-8, max_rank: int | None = None,
               counter: OpCounter | None = None) -> MmvProblem:
    """Continuous-to-finite reduction of the measurement stream.

    Forms the sample covariance sum_n c[n] c[n]^H, eigendecomposes it and
    keeps the eigenvectors above rank_tol * lambda_max, each scaled by the
    square root of its eigenvalue.  max_rank additionally caps how many of
    the strongest directions survive (useful in noise, where every mode is
    nonzero).  All-zero measurements yield an empty, flagged problem.
    """
    cmat = measurements.c if isinstance(measurements, CompressedMeasurements) \
        else np.asarray(measurements)
    if cmat.ndim != 2:
        raise ValueError("measurements must be a (P, n_sym) matrix")
    p_channels, n_sym = cmat.shape
    if n_sym < 1:
        raise ValueError("need at least one measurement vector")
    if not np.any(cmat):
        return MmvProblem(matrix=matrix, observations=np.zeros((p_channels, 0)),
                          sparsity=sparsity, empty=True)
    cov = cmat @ np.conj(cmat.T)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = np.maximum(eigvals, 0.0)
    keep = eigvals > rank_tol * eigvals[-1]
    if max_rank is not None:
        order = np.argsort(eigvals)[::-1]
        allowed = np.zeros_like(keep)
        allowed[order[:max_rank]] = True
        keep &= allowed
    frame = eigvecs[:, keep] * np.sqrt(eigvals[keep])
    if counter is not None:
        counter.add("ctf_covariance", n_sym * p_channels ** 2)
        counter.add("ctf_eig", p_channels ** 3)
    return MmvProblem(matrix=matrix, observations=frame, sparsity=sparsity)


def raw_problem(measurements, matrix: SensingMatrix, sparsity: int) -> MmvProblem:
    """Skip the covariance step and use the measurement columns directly."""
    cmat = measurements.c if isinstance(measurements, CompressedMeasurements) \
        else np.asarray(measurements)
    return MmvProblem(matrix=matrix, observations=np.array(cmat, copy=True),
                      sparsity=sparsity, empty=not np.any(cmat))


def omp_mmv(matrix: SensingMatrix, observations: np.ndarray, sparsity: int,
            stop_tol: float = 1e-9,
            counter: OpCounter | None = None) -> SupportEstimate:
    """Simultaneous orthogonal matching pursuit over the residual columns.

    Per iteration: subtract the current estimate from the observations,
    project the residual onto every dictionary column (scores are residual
    energies normalized by column norm), keep the column with the largest
    score (ties go to the lowest flattened index, and a column is never
    reselected), refit all coefficients by least squares on the selected
    subdictionary, and stop at the sparsity cap or when the residual norm
    falls below stop_tol times the observation norm.
    """
    b = matrix.entries
    c = np.atleast_2d(np.asarray(observations, dtype=np.complex128))
    if c.shape[0] != matrix.p_channels:
        c = c.T
    if sparsity > matrix.p_channels:
        raise ValueError("sparsity target exceeds the number of channels")
    p_channels, dims = b.shape
    d = c.shape[1]
    norm_c = np.linalg.norm(c)
    if norm_c == 0.0 or c.shape[1] == 0:
        return SupportEstimate(indices=np.array([], dtype=int),
                               coefficients=np.zeros((0, max(d, 0)), dtype=complex),
                               residual_norm=0.0, residual_history=[0.0])

    col_norms = matrix.column_norms()
    safe_norms = np.where(col_norms > 0, col_norms, np.inf)
    bh = matrix.conj_t()
    residual = c.copy()
    selected: list[int] = []
    coef = np.zeros((0, d), dtype=np.complex128)
    history = [float(np.linalg.norm(residual))]

    for _ in range(sparsity):
        proj = _project(bh, residual)
        scores = np.sum(np.abs(proj) ** 2, axis=1) / safe_norms ** 2
        if selected:
            scores[selected] = -1.0
        pick = int(np.argmax(scores))
        selected.append(pick)
        coef, residual = _restricted_least_squares(b[:, selected], c)
        rnorm = float(np.linalg.norm(residual))
        history.append(rnorm)
        if counter is not None:
            t = len(selected)
            counter.add("omp2_inner_products", p_channels * dims * d)
            counter.add("omp3_max_projection", dims)
            counter.add("omp1_residual", p_channels * t * d)
            counter.add("omp4_least_squares", t ** 3)
            counter.add("omp5_stopping", p_channels * d)
        if rnorm <= stop_tol * norm_c:
            break

    order = np.argsort(selected)
    indices = np.asarray(selected)[order]
    return SupportEstimate(indices=indices, coefficients=coef[order],
                           residual_norm=history[-1], residual_history=history)


def omp_smv(matrix: SensingMatrix, c_vec: np.ndarray, sparsity: int,
            stop_tol: float = 1e-9,
            counter: OpCounter | None = None) -> SupportEstimate:
    """Single-measurement orthogonal matching pursuit."""
    c_vec = np.asarray(c_vec).reshape(-1, 1)
    return omp_mmv(matrix, c_vec, sparsity, stop_tol, counter)


def rembo(matrix: SensingMatrix, observations: np.ndarray, sparsity: int,
          boosts: int = 20, seed=0, stop_tol: float = 1e-9,
          counter: OpCounter | None = None) -> SupportEstimate:
    """Reduce the MMV problem to random single-vector problems and boost.

    Each boost draws a standard-normal combination of the observation
    columns, solves the single-vector problem, then validates the candidate
    support by least squares against the full observation matrix.  The first
    support whose full residual passes max(stop_tol*||C||, 1e-8) is
    returned; otherwise the best candidate seen.  Deterministic in seed.
    """
    if boosts < 1:
        raise ValueError("boosts must be >= 1")
    c = np.atleast_2d(np.asarray(observations, dtype=np.complex128))
    if c.shape[0] != matrix.p_channels:
        c = c.T
    norm_c = np.linalg.norm(c)
    if norm_c == 0.0 or c.shape[1] == 0:
        return SupportEstimate(indices=np.array([], dtype=int),
                               coefficients=np.zeros((0, c.shape[1]), dtype=complex),
                               residual_norm=0.0, residual_history=[0.0])
    threshold = max(stop_tol * norm_c, 1e-8)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(boosts):
        alpha = rng.standard_normal(c.shape[1])
        candidate = omp_smv(matrix, c @ alpha, sparsity, stop_tol, counter)
        if len(candidate.indices) == 0:
            continue
        coef, residual = _restricted_least_squares(
            matrix.entries[:, candidate.indices], c)
        rnorm = float(np.linalg.norm(residual))
        validated = SupportEstimate(indices=candidate.indices,
                                    coefficients=coef, residual_norm=rnorm,
                                    residual_history=candidate.residual_history)
        if rnorm <= threshold:
            return validated
        if best is None or rnorm < best.residual_norm:
            best = validated
    return best


def refine_support(matrix: SensingMatrix, observations: np.ndarray,
                   est: SupportEstimate, grid: GridSpec | None = None,
                   max_sweeps: int = 5,
                   counter: OpCounter | None = None) -> SupportEstimate:
    """Deterministic local search on a greedy support estimate.

    Greedy pursuit on a grid dictionary with correlated neighbor columns can
    straddle a true atom with two adjacent picks, or spend a slot on a
    sidelobe.  Each sweep tries two kinds of exchanges and keeps any that
    strictly lowers the least-squares residual: removing one atom and
    re-picking the best column against the remaining residual, and (when the
    grid geometry is supplied) moving one atom to a nearby delay bin of the
    same satellite and Doppler row.  The residual never increases.
    """
    support = [int(j) for j in est.indices]
    if not support:
        return est
    c = np.atleast_2d(np.asarray(observations, dtype=np.complex128))
    if c.shape[0] != matrix.p_channels:
        c = c.T
    b = matrix.entries
    col_norms = matrix.column_norms()
    safe_norms = np.where(col_norms > 0, col_norms, np.inf)
    bh = matrix.conj_t()
    best_coef, resid = _restricted_least_squares(b[:, support], c)
    best_norm = float(np.linalg.norm(resid))

    def try_swap(pos, candidate):
        nonlocal support, best_coef, best_norm
        trial = list(support)
        trial[pos] = candidate
        coef, r = _restricted_least_squares(b[:, trial], c)
        if counter is not None:
            counter.add("omp4_least_squares", len(trial) ** 3)
        norm = float(np.linalg.norm(r))
        if norm < best_norm * (1.0 - 1e-12):
            support, best_coef, best_norm = trial, coef, norm
            return True
        return False

    for _ in range(max_sweeps):
        improved = False
        for pos in range(len(support)):
            others = support[:pos] + support[pos + 1:]
            if others:
                _, part_resid = _restricted_least_squares(b[:, others], c)
            else:
                part_resid = c
            scores = np.sum(np.abs(_project(bh, part_resid)) ** 2, axis=1) \
                / safe_norms ** 2
            scores[others] = -1.0
            if counter is not None:
                counter.add("omp2_inner_products",
                            matrix.p_channels * matrix.dims * c.shape[1])
                counter.add("omp3_max_projection", matrix.dims)
            candidate = int(np.argmax(scores))
            if candidate != support[pos] and try_swap(pos, candidate):
                improved = True
        if grid is not None:
            for pos in range(len(support)):
                sat_idx, k_pos, q = grid.unflatten(support[pos])
                for dq in (-2, -1, 1, 2):
                    q_new = int(q) + dq
                    if not 0 <= q_new < grid.n_delay_bins:
                        continue
                    candidate = int(grid.flat_index(int(sat_idx), int(k_pos),
                                                    q_new))
                    if candidate in support:
                        continue
                    if try_swap(pos, candidate):
                        improved = True
        if not improved:
            break

    order = np.argsort(support)
    indices = np.asarray(support)[order]
    return SupportEstimate(indices=indices, coefficients=best_coef[order],
                           residual_norm=best_norm,
                           residual_history=list(est.residual_history) + [best_norm])


def solve_problem(problem: MmvProblem, solver: str = "omp", boosts: int = 20,
                  seed=0, stop_tol: float = 1e-9,
                  grid: GridSpec | None = None,
                  counter: OpCounter | None = None) -> SupportEstimate:
    """Dispatch an MmvProblem to the configured solver.

    When the grid geometry is supplied the greedy solve is followed by the
    local-search refinement, which is what the half-chip grid dictionary
    needs in practice.
    """
    if problem.empty:
        return SupportEstimate(indices=np.array([], dtype=int),
                               coefficients=np.zeros((0, 0), dtype=complex),
                               residual_norm=0.0, residual_history=[0.0])
    if solver == "omp":
        est = omp_mmv(problem.matrix, problem.observations, problem.sparsity,
                      stop_tol, counter)
    elif solver == "rembo":
        est = rembo(problem.matrix, problem.observations, problem.sparsity,
                    boosts, seed, stop_tol, counter)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    if grid is not None:
        est = refine_support(problem.matrix, problem.observations, est, grid,
                             counter=counter)
    return est


def support_to_acquisition(est: SupportEstimate, grid: GridSpec,
                           detect_count: int, n_paths: int,
                           n_sats: int | None = None) -> AcquisitionResult:
    """Translate a recovered support into per-satellite delay-Doppler picks.

    Entries are grouped by satellite and ranked by coefficient energy summed
    over the measurement columns; satellites rank by their strongest entry.
    A result with fewer than detect_count distinct satellites is flagged
    partial (it counts as a detection failure in the metrics).
    """
    if len(est.indices) and n_sats is not None:
        if est.indices.max() >= grid.n_columns(n_sats):
            raise ValueError("support index outside the dictionary")
    energies = np.sum(np.abs(np.atleast_2d(est.coefficients)) ** 2, axis=1) \
        if len(est.indices) else np.zeros(0)
    sat_idx, k_pos, q_bin = grid.unflatten(est.indices) if len(est.indices) \
        else (np.zeros(0, int), np.zeros(0, int), np.zeros(0, int))

    per_sat: dict[int, list] = {}
    for j in range(len(est.indices)):
        sat = int(sat_idx[j]) + 1
        per_sat.setdefault(sat, []).append(
            (float(energies[j]), int(k_pos[j]), int(q_bin[j])))

    detections = []
    for sat, entries in per_sat.items():
        entries.sort(key=lambda e: (-e[0], e[1], e[2]))
        top = entries[:n_paths]
        paths = [(q, k - grid.k_half, energy) for energy, k, q in top]
        detections.append(SatelliteDetection(
            sat=sat, q_bin=top[0][2], k_bin=top[0][1] - grid.k_half,
            peak=top[0][0], paths=paths))
    detections.sort(key=lambda det: (-det.peak, det.sat))
    partial = len(detections) < detect_count
    return AcquisitionResult(detections=detections[:detect_count], partial=partial)
