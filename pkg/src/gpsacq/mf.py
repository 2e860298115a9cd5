"""Exhaustive matched-filter acquisition over the delay-Doppler grid.

One correlator per (satellite, Doppler bin, delay bin) hypothesis.  Outputs
are raw inner-product sums (no 1/M), so a noiseless on-grid path in
ideal-pulse mode peaks at oversample * M * |gain|.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import GridSpec, SampledSignal
from .codes import CodeFamily
from .opcount import OpCounter

GRAM_KERNEL_CAP = 2000


@dataclass
class CorrelationTensor:
    """Correlator outputs indexed (satellite, Doppler bin, delay bin, symbol)."""

    values: np.ndarray  # complex, (I, |K|, |Q|, n_sym)
    grid: GridSpec

    @property
    def n_sats(self) -> int:
        return self.values.shape[0]

    @property
    def n_sym(self) -> int:
        return self.values.shape[3]

    def vec(self, n: int) -> np.ndarray:
        """Flattened (i-major, then k, then q) snapshot for symbol n."""
        return self.values[:, :, :, n].reshape(-1)


@dataclass
class SatelliteDetection:
    sat: int
    q_bin: int
    k_bin: int                      # signed Doppler index
    peak: float
    paths: list = field(default_factory=list)  # (q_bin, k_bin, statistic)


@dataclass
class AcquisitionResult:
    detections: list                # SatelliteDetection, strongest first
    partial: bool = False
    op_count: int = 0

    @property
    def detected_set(self) -> set[int]:
        return {d.sat for d in self.detections}

    def detection_for(self, sat: int):
        for d in self.detections:
            if d.sat == sat:
                return d
        return None


def shifted_code_matrix(codes: CodeFamily, grid: GridSpec,
                        pulse: str = "ideal", tg_chips: float = 8.0) -> np.ndarray:
    """Rows of delayed spreading waveforms, one per (satellite, delay bin).

    Row (i, q) holds waveform i starting at sample q*delay_step within a
    window of samples_per_symbol + guard samples.  Shared by the correlator
    bank and the compressive kernel builder.
    """
    from .channel import spread_waveform

    sps = grid.samples_per_symbol
    width = grid.window_samples
    ds = grid.delay_step_samples
    rows = np.zeros((codes.n_sats * grid.n_delay_bins, width))
    for i in range(codes.n_sats):
        phi = spread_waveform(codes[i + 1], grid, pulse, tg_chips)
        for q in range(grid.n_delay_bins):
            rows[i * grid.n_delay_bins + q, q * ds:q * ds + sps] = phi
    return rows


def correlate_bank(x: SampledSignal, codes: CodeFamily, grid: GridSpec,
                   pulse: str = "ideal", tg_chips: float = 8.0,
                   counter: OpCounter | None = None, method: str = "direct",
                   shift_matrix: np.ndarray | None = None) -> CorrelationTensor:
    """Correlate the signal against every delay/Doppler-shifted kernel.

    method='direct' evaluates the inner products as matrix products;
    method='fft' uses circular FFT correlation over the delay axis and must
    match the direct path to 1e-9 relative.  A precomputed shift_matrix
    (from shifted_code_matrix) can be passed to amortize setup across calls.
    """
    sps = grid.samples_per_symbol
    width = grid.window_samples
    n_sym = x.n_sym
    needed = n_sym * sps + grid.guard_samples
    if len(x.samples) < needed:
        raise ValueError(f"signal has {len(x.samples)} samples, needs {needed}")
    if method not in ("direct", "fft"):
        raise ValueError(f"unknown method {method!r}")

    nk, nq, n_sats = grid.n_doppler_bins, grid.n_delay_bins, codes.n_sats
    t = np.arange(len(x.samples)) * grid.dt
    out = np.empty((n_sats, nk, nq, n_sym), dtype=np.complex128)

    if method == "direct":
        if shift_matrix is None:
            shift_matrix = shifted_code_matrix(codes, grid, pulse, tg_chips)
        # windows[:, n] = demodulated signal covering symbol n plus guard;
        # real/imag are gathered contiguously so BLAS takes the products
        starts = np.arange(n_sym) * sps
        idx = starts[None, :] + np.arange(width)[:, None]
        for kpos, k in enumerate(grid.k_values):
            xk = x.samples * np.exp(-1j * k * grid.delta_omega * t)
            xr = np.ascontiguousarray(xk.real)
            xi = np.ascontiguousarray(xk.imag)
            z = shift_matrix @ xr[idx] + 1j * (shift_matrix @ xi[idx])
            out[:, kpos] = z.reshape(n_sats, nq, n_sym)
    else:
        from .channel import spread_waveform

        ds = grid.delay_step_samples
        nfft = int(2 ** np.ceil(np.log2(width)))
        kernels_f = np.stack([
            np.conj(np.fft.fft(spread_waveform(codes[i + 1], grid, pulse,
                                               tg_chips), nfft))
            for i in range(n_sats)])
        for kpos, k in enumerate(grid.k_values):
            xk = x.samples * np.exp(-1j * k * grid.delta_omega * t)
            for n in range(n_sym):
                seg_f = np.fft.fft(xk[n * sps:n * sps + width], nfft)
                corr = np.fft.ifft(seg_f[None, :] * kernels_f, axis=1)
                out[:, kpos, :, n] = corr[:, :grid.guard_samples + 1:ds]

    if counter is not None:
        counter.add("mf_correlations", n_sats * nk * nq * n_sym * sps)
    return CorrelationTensor(values=out, grid=grid)


def gram_matrix(codes: CodeFamily, grid: GridSpec, subset,
                pulse: str = "ideal", tg_chips: float = 8.0):
    """Gram matrix of digitized kernels over one (cyclic) symbol.

    subset is a sequence of (sat, k, q_bin) kernel labels with sat 1-based
    and k the signed Doppler index.  Returns (gram, max_ratio) where
    max_ratio is the largest |off-diagonal| / mean diagonal -- the empirical
    size of the Gram perturbation relative to the processing gain.
    """
    from .channel import spread_waveform

    subset = list(subset)
    if len(subset) > GRAM_KERNEL_CAP:
        raise ValueError(
            f"subset of {len(subset)} kernels exceeds cap {GRAM_KERNEL_CAP}; "
            "sample kernel pairs instead of forming the dense Gram")
    sps = grid.samples_per_symbol
    t = np.arange(sps) * grid.dt
    waveforms = {}
    kernels = np.empty((len(subset), sps), dtype=np.complex128)
    for row, (sat, k, q) in enumerate(subset):
        if sat not in waveforms:
            waveforms[sat] = spread_waveform(codes[sat], grid, pulse, tg_chips)
        kernels[row] = np.roll(waveforms[sat], q * grid.delay_step_samples) \
            * np.exp(1j * k * grid.delta_omega * t)
    gram = np.conj(kernels) @ kernels.T
    diag = np.real(np.diag(gram))
    off = np.abs(gram - np.diag(np.diag(gram)))
    max_ratio = float(off.max() / diag.mean()) if len(subset) > 1 else 0.0
    return gram, max_ratio


def accumulate(tensor: CorrelationTensor, n_range=None,
               counter: OpCounter | None = None) -> np.ndarray:
    """Noncoherent sum over symbols: sum_n |z[i,k,q,n]|^2."""
    if n_range is None:
        n_range = range(tensor.n_sym)
    n_range = list(n_range)
    if not n_range:
        raise ValueError("empty symbol range")
    if min(n_range) < 0 or max(n_range) >= tensor.n_sym:
        raise ValueError("symbol range outside tensor")
    stat = np.sum(np.abs(tensor.values[:, :, :, n_range]) ** 2, axis=3)
    if counter is not None:
        counter.add("mf_accumulation",
                    len(n_range) * tensor.values[:, :, :, 0].size)
    return stat


def _selected_bins(result: AcquisitionResult) -> list:
    bins = []
    for det in result.detections:
        for q, k, _ in det.paths:
            if (det.sat, k, q) not in bins:
                bins.append((det.sat, k, q))
    return bins


def _joint_fit(bins, tensor: CorrelationTensor, grid: GridSpec,
               shift_matrix: np.ndarray):
    """Kernels, Gram and joint least-squares amplitudes for selected bins."""
    width = grid.window_samples
    t = np.arange(width) * grid.dt
    kernels = np.empty((len(bins), width), dtype=np.complex128)
    for row, (sat, k, q) in enumerate(bins):
        kernels[row] = shift_matrix[(sat - 1) * grid.n_delay_bins + q] \
            * np.exp(1j * k * grid.delta_omega * t)
    gram = np.conj(kernels) @ kernels.T
    ridge = 1e-12 * np.real(np.trace(gram))
    z_sel = np.stack([tensor.values[sat - 1, k + grid.k_half, q, :]
                      for sat, k, q in bins])
    amps = np.linalg.solve(gram + ridge * np.eye(len(bins)), z_sel)
    return kernels, gram, amps


def refit_amplitudes(result: AcquisitionResult, tensor: CorrelationTensor,
                     codes: CodeFamily, grid: GridSpec, pulse: str = "ideal",
                     tg_chips: float = 8.0,
                     shift_matrix: np.ndarray | None = None) -> AcquisitionResult:
    """Joint least-squares amplitude refit over every selected bin.

    Raw peak magnitudes of overlapping hypotheses (neighboring delay bins,
    same-Doppler code sidelobes) bias the per-satellite path ranking when
    two gains are close.  Solving the small normal system over all selected
    kernels unmixes the amplitudes; each detection's paths are re-ranked by
    refit energy summed over symbols and its best pair updated.
    """
    bins = _selected_bins(result)
    if not bins:
        return result
    if shift_matrix is None:
        shift_matrix = shifted_code_matrix(codes, grid, pulse, tg_chips)
    _, _, amps = _joint_fit(bins, tensor, grid, shift_matrix)
    energy = {bins[row]: float(np.sum(np.abs(amps[row]) ** 2))
              for row in range(len(bins))}

    refined = []
    for det in result.detections:
        ranked = sorted(((energy[(det.sat, k, q)], k + grid.k_half, q)
                         for q, k, _ in det.paths),
                        key=lambda e: (-e[0], e[1], e[2]))
        paths = [(q, kpos - grid.k_half, e) for e, kpos, q in ranked]
        refined.append(SatelliteDetection(
            sat=det.sat, q_bin=paths[0][0], k_bin=paths[0][1],
            peak=paths[0][2], paths=paths))
    return AcquisitionResult(detections=refined, partial=result.partial,
                             op_count=result.op_count)


def reselect_with_cancellation(result: AcquisitionResult, x: SampledSignal,
                               tensor: CorrelationTensor, codes: CodeFamily,
                               grid: GridSpec, detect_count: int,
                               n_paths: int, pulse: str = "ideal",
                               tg_chips: float = 8.0,
                               shift_matrix: np.ndarray | None = None,
                               counter: OpCounter | None = None) -> AcquisitionResult:
    """One successive-interference-cancellation pass over the bank output.

    The code cross-talk of strong paths puts a deterministic floor under the
    correlation map, which can bury a weak satellite or promote a strong
    path's neighbor bin over a genuinely weak path.  This pass fits the
    currently selected bins jointly, subtracts their modeled contribution
    from the signal, re-runs the bank on the residual, and re-selects from
    the map whose selected bins carry their interference-free fitted
    statistics while all other bins carry the residual statistics.
    """
    bins = _selected_bins(result)
    if not bins:
        return result
    if shift_matrix is None:
        shift_matrix = shifted_code_matrix(codes, grid, pulse, tg_chips)
    kernels, gram, amps = _joint_fit(bins, tensor, grid, shift_matrix)

    model = np.zeros_like(x.samples)
    sps = grid.samples_per_symbol
    for n in range(x.n_sym):
        block = slice(n * sps, n * sps + grid.window_samples)
        model[block] += amps[:, n] @ kernels
    residual = SampledSignal(samples=x.samples - model, n_sym=x.n_sym,
                             snr_db=x.snr_db, noise_sigma2=x.noise_sigma2)
    tensor_r = correlate_bank(residual, codes, grid, pulse, tg_chips,
                              shift_matrix=shift_matrix)
    if counter is not None:
        counter.add("mf_cancellation",
                    tensor_r.values.size * grid.samples_per_symbol)
    stat = accumulate(tensor_r)
    diag = np.real(np.diag(gram))
    for row, (sat, k, q) in enumerate(bins):
        fitted = diag[row] ** 2 * float(np.sum(np.abs(amps[row]) ** 2))
        stat[sat - 1, k + grid.k_half, q] = fitted
    reselected = select_paths(stat, detect_count, n_paths, grid)
    return refit_amplitudes(reselected, tensor, codes, grid, pulse, tg_chips,
                            shift_matrix)


def select_paths(stat: np.ndarray, detect_count: int, n_paths: int,
                 grid: GridSpec, counter: OpCounter | None = None) -> AcquisitionResult:
    """Pick the strongest satellites and their top delay-Doppler bins.

    Per satellite the top n_paths bins are kept; satellites are ranked by
    their single strongest bin.  Ties break toward the lower satellite
    index, then the lower Doppler bin position, then the lower delay bin.
    """
    n_sats, nk, nq = stat.shape
    if detect_count > n_sats:
        raise ValueError(f"detect_count {detect_count} exceeds {n_sats} satellites")
    k_pos_grid, q_grid = np.divmod(np.arange(nk * nq), nq)
    detections = []
    for i in range(n_sats):
        flat = stat[i].reshape(-1)
        order = np.lexsort((q_grid, k_pos_grid, -flat))
        top = order[:n_paths]
        paths = [(int(q_grid[j]), int(k_pos_grid[j] - grid.k_half),
                  float(flat[j])) for j in top]
        best = top[0]
        detections.append(SatelliteDetection(
            sat=i + 1, q_bin=int(q_grid[best]),
            k_bin=int(k_pos_grid[best] - grid.k_half),
            peak=float(flat[best]), paths=paths))
    detections.sort(key=lambda d: (-d.peak, d.sat))
    if counter is not None:
        counter.add("mf_path_selection", n_sats * nk * nq)
    result = AcquisitionResult(detections=detections[:detect_count])
    if counter is not None:
        result.op_count = counter.total()
    return result
