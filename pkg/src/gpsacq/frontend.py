"""Randomized compressive front end: sensing matrix, kernels, measurements.

Each of the P compressive correlators is a weighted combination of every
matched-filter kernel, with weights taken from one row of the sensing
matrix.  Applying the P kernels to the signal therefore equals multiplying
the sensing matrix into the stacked matched-filter outputs; that exchange
identity is the contract the whole front end is tested against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import GridSpec, SampledSignal
from .codes import CodeFamily
from .mf import shifted_code_matrix
from .opcount import OpCounter


@dataclass
class SensingMatrix:
    """P x (I*|K|*|Q|) combination weights.

    Columns follow the flattened (i, k, q) order: satellite-major, then
    Doppler bin position, then delay bin (GridSpec.flat_index).
    """

    entries: np.ndarray
    kind: str = "user_supplied"
    seed: int | None = None

    @property
    def p_channels(self) -> int:
        return self.entries.shape[0]

    @property
    def dims(self) -> int:
        return self.entries.shape[1]

    # solvers hit these on every call; cache the big derived arrays
    def conj_t(self) -> np.ndarray:
        cached = getattr(self, "_conj_t", None)
        if cached is None:
            cached = np.ascontiguousarray(np.conj(self.entries).T)
            self._conj_t = cached
        return cached

    def column_norms(self) -> np.ndarray:
        cached = getattr(self, "_col_norms", None)
        if cached is None:
            cached = np.linalg.norm(self.entries, axis=0)
            self._col_norms = cached
        return cached


@dataclass
class CompressedMeasurements:
    """Compressed correlator outputs, one column per symbol.

    Noise is implicit: it propagates from the sampled signal through the
    kernels rather than being modeled separately.
    """

    c: np.ndarray  # complex, (P, n_sym)

    @property
    def p_channels(self) -> int:
        return self.c.shape[0]

    @property
    def n_sym(self) -> int:
        return self.c.shape[1]


def build_sensing_matrix(p_channels: int, dims: int,
                         kind: str = "random_binary",
                         seed: int | None = 0) -> SensingMatrix:
    """Draw a seeded random sensing matrix (+/-1 binary or standard normal)."""
    if p_channels < 1:
        raise ValueError("p_channels must be >= 1")
    if p_channels > dims:
        warnings.warn(
            f"P={p_channels} exceeds the {dims}-column dictionary: "
            "no compression", stacklevel=2)
    rng = np.random.default_rng(seed)
    if kind == "random_binary":
        entries = rng.choice(np.array([-1.0, 1.0]), size=(p_channels, dims))
    elif kind == "random_gaussian":
        entries = rng.standard_normal((p_channels, dims))
    else:
        raise ValueError(f"unknown sensing matrix kind {kind!r}")
    return SensingMatrix(entries=entries, kind=kind, seed=seed)


def build_kernels(matrix: SensingMatrix, codes: CodeFamily, grid: GridSpec,
                  pulse: str = "ideal", tg_chips: float = 8.0,
                  shift_matrix: np.ndarray | None = None) -> np.ndarray:
    """Precompute the P compressive kernel tap vectors.

    Row p is sum over (i, k, q) of conj(B[p, (i,k,q)]) times the delayed,
    Doppler-modulated spreading waveform, on the same window used by the
    matched-filter bank (samples_per_symbol + delay guard taps).  The
    conjugate makes <x, psi_p> equal sum_j B[p, j] z_j for any B.
    """
    if matrix.dims != grid.n_columns(codes.n_sats):
        raise ValueError(
            f"matrix has {matrix.dims} columns, grid expects "
            f"{grid.n_columns(codes.n_sats)}")
    if shift_matrix is None:
        shift_matrix = shifted_code_matrix(codes, grid, pulse, tg_chips)
    width = grid.window_samples
    nk, nq = grid.n_doppler_bins, grid.n_delay_bins
    t = np.arange(width) * grid.dt
    weights = np.conj(matrix.entries)
    kernels = np.zeros((matrix.p_channels, width), dtype=np.complex128)
    sat_idx = np.repeat(np.arange(codes.n_sats), nq)
    q_idx = np.tile(np.arange(nq), codes.n_sats)
    for kpos in range(nk):
        cols = grid.flat_index(sat_idx, kpos, q_idx)
        w_k = weights[:, cols]
        mod = np.exp(1j * grid.k_values[kpos] * grid.delta_omega * t)
        if np.iscomplexobj(w_k):
            kernels += (w_k @ shift_matrix) * mod
        else:
            kernels += (w_k @ shift_matrix).astype(np.complex128) * mod
    return kernels


def compress(x: SampledSignal, kernels: np.ndarray, grid: GridSpec,
             counter: OpCounter | None = None) -> CompressedMeasurements:
    """Apply the precomputed kernels: c[p, n] = <x window n, psi_p>."""
    width = grid.window_samples
    sps = grid.samples_per_symbol
    needed = x.n_sym * sps + grid.guard_samples
    if len(x.samples) < needed:
        raise ValueError(f"signal has {len(x.samples)} samples, needs {needed}")
    starts = np.arange(x.n_sym) * sps
    idx = starts[None, :] + np.arange(width)[:, None]
    windows = x.samples[idx]
    # conj(kernels) @ windows without copying the (large) kernel bank
    c = np.conj(kernels @ np.conj(windows))
    if counter is not None:
        counter.add("cs_compression", x.n_sym * kernels.shape[0] * sps)
    return CompressedMeasurements(c=c)


def effective_dictionary(kernels: np.ndarray, codes: CodeFamily,
                         grid: GridSpec, pulse: str = "ideal",
                         tg_chips: float = 8.0,
                         shift_matrix: np.ndarray | None = None) -> np.ndarray:
    """Compressed response of every grid hypothesis: column (i,k,q) is the
    measurement vector produced by a unit-amplitude path at that bin.

    Equals the sensing matrix times the kernel Gram.  On an integer-chip
    delay grid the Gram is near-identity and this reduces to the sensing
    matrix itself, but at half-chip spacing adjacent delay bins overlap by
    about half a peak, so sparse solvers must score against this response
    rather than the raw sensing matrix.
    """
    if shift_matrix is None:
        shift_matrix = shifted_code_matrix(codes, grid, pulse, tg_chips)
    width = grid.window_samples
    t = np.arange(width) * grid.dt
    conj_kernels = np.conj(kernels)
    blocks = []
    for k in grid.k_values:
        modulated = shift_matrix * np.exp(1j * k * grid.delta_omega * t)
        blocks.append(conj_kernels @ modulated.T)
    # blocks are (P, I*|Q|) per Doppler bin; interleave to i-major flat order
    p_channels = kernels.shape[0]
    nk, nq = grid.n_doppler_bins, grid.n_delay_bins
    n_sats = shift_matrix.shape[0] // nq
    out = np.empty((p_channels, n_sats * nk * nq), dtype=np.complex128)
    for kpos, block in enumerate(blocks):
        per_sat = block.reshape(p_channels, n_sats, nq)
        for i in range(n_sats):
            cols = grid.flat_index(i, kpos, np.arange(nq))
            out[:, cols] = per_sat[:, i, :]
    return out


def save_sensing_matrix(matrix: SensingMatrix, path) -> None:
    """Write the matrix as CSV with a reproducibility header."""
    header = (f"P={matrix.p_channels},dims={matrix.dims},"
              f"kind={matrix.kind},seed={matrix.seed}")
    np.savetxt(path, matrix.entries, delimiter=",", header=header)


def load_sensing_matrix(path) -> SensingMatrix:
    with open(path) as fh:
        first = fh.readline().strip().lstrip("# ")
    meta = dict(item.split("=", 1) for item in first.split(","))
    entries = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    seed = None if meta.get("seed") in (None, "None") else int(meta["seed"])
    return SensingMatrix(entries=entries, kind=meta.get("kind", "user_supplied"),
                         seed=seed)
