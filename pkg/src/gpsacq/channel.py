"""Delay-Doppler search grid and synthesis of the sampled received signal.

The received waveform is a sum over active satellites and multipath
components of delayed, Doppler-modulated spreading waveforms carrying the
navigation bits, plus complex AWGN, rendered on a uniform grid of
`oversample` samples per chip.  Doppler phase always uses absolute time, so
it is continuous across symbol boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codes import CaCode, CodeFamily

T_CHIP = 977.5e-9  # L1 C/A chip period, seconds


@dataclass(frozen=True)
class GridSpec:
    """Binned delay-Doppler search space plus code/signal dimensions.

    Delay bins are q * delta_tau_chips chips for q = 0..n_delay_bins-1;
    Doppler bins are k * delta_omega for k = -k_half..k_half, with
    delta_omega = 2*pi*doppler_j / t_symbol (integer doppler_j keeps the
    per-symbol modulations exactly orthogonal).
    """

    m0: int = 1023
    n_periods: int = 1
    oversample: int = 2
    delta_tau_chips: float = 0.5
    doppler_j: int = 1
    n_delay_bins: int = 41
    k_half: int = 5
    t_chip: float = T_CHIP

    def __post_init__(self):
        if self.doppler_j < 1:
            raise ValueError("doppler_j must be a positive integer")
        ds = self.delta_tau_chips * self.oversample
        if abs(ds - round(ds)) > 1e-9 or round(ds) < 1:
            raise ValueError(
                "delta_tau_chips * oversample must be a positive integer "
                f"(got {ds}); delay bins must land on the sample grid"
            )

    # -- derived dimensions -------------------------------------------------

    @property
    def m_chips(self) -> int:
        return self.n_periods * self.m0

    @property
    def t_symbol(self) -> float:
        return self.m_chips * self.t_chip

    @property
    def dt(self) -> float:
        return self.t_chip / self.oversample

    @property
    def delta_omega(self) -> float:
        return 2.0 * math.pi * self.doppler_j / self.t_symbol

    @property
    def delta_tau_s(self) -> float:
        return self.delta_tau_chips * self.t_chip

    @property
    def samples_per_symbol(self) -> int:
        return self.oversample * self.m_chips

    @property
    def delay_step_samples(self) -> int:
        return round(self.delta_tau_chips * self.oversample)

    @property
    def guard_samples(self) -> int:
        return (self.n_delay_bins - 1) * self.delay_step_samples

    @property
    def window_samples(self) -> int:
        return self.samples_per_symbol + self.guard_samples

    @property
    def n_doppler_bins(self) -> int:
        return 2 * self.k_half + 1

    @property
    def k_values(self) -> np.ndarray:
        return np.arange(-self.k_half, self.k_half + 1)

    @property
    def n_bins(self) -> int:
        return self.n_doppler_bins * self.n_delay_bins

    def n_columns(self, n_sats: int) -> int:
        """Flattened dictionary size I*|K|*|Q|."""
        return n_sats * self.n_bins

    # -- flattened (i, k, q) ordering: i-major, then k, then q --------------

    def flat_index(self, sat_idx, k_pos, q_bin):
        return (np.asarray(sat_idx) * self.n_doppler_bins + np.asarray(k_pos)) \
            * self.n_delay_bins + np.asarray(q_bin)

    def unflatten(self, flat):
        flat = np.asarray(flat)
        q = flat % self.n_delay_bins
        rest = flat // self.n_delay_bins
        k_pos = rest % self.n_doppler_bins
        sat_idx = rest // self.n_doppler_bins
        return sat_idx, k_pos, q

    @classmethod
    def from_ranges(cls, m0, n_periods, oversample, delta_tau_chips,
                    tau_max_chips, doppler_step_hz, doppler_max_hz,
                    t_chip=T_CHIP) -> "GridSpec":
        """Build the grid from max delay/Doppler and nominal step sizes.

        The nominal Doppler step is rounded to the nearest exact
        2*pi*j/t_symbol so the orthogonality condition holds.
        """
        t_symbol = n_periods * m0 * t_chip
        j = round(doppler_step_hz * t_symbol)
        if j < 1:
            raise ValueError(
                f"doppler_step_hz={doppler_step_hz} is below 1/t_symbol="
                f"{1.0 / t_symbol:.1f} Hz; no integer j fits"
            )
        delta_omega = 2.0 * math.pi * j / t_symbol
        n_delay = int(math.ceil(tau_max_chips / delta_tau_chips - 1e-9)) + 1
        k_half = int(math.ceil(2.0 * math.pi * doppler_max_hz / delta_omega - 1e-9))
        return cls(m0=m0, n_periods=n_periods, oversample=oversample,
                   delta_tau_chips=delta_tau_chips, doppler_j=j,
                   n_delay_bins=n_delay, k_half=k_half, t_chip=t_chip)


@dataclass
class ChannelRealization:
    """Multipath taps and navigation bits for the active satellites.

    Arrays are indexed (active satellite, path).  True delay/Doppler are kept
    alongside their nearest grid bins; in on-grid mode they coincide.
    """

    sats: np.ndarray          # 1-based satellite indices, shape (n_active,)
    gains: np.ndarray         # complex, (n_active, n_paths)
    tau_chips: np.ndarray     # true delays in chips
    omega: np.ndarray         # true Dopplers in rad/s
    q_bins: np.ndarray        # nearest delay bin
    k_bins: np.ndarray        # nearest Doppler bin (signed)
    nav_bits: np.ndarray      # +/-1, (n_active, n_sym)

    @property
    def n_active(self) -> int:
        return len(self.sats)

    @property
    def n_paths(self) -> int:
        return self.gains.shape[1]

    @property
    def active_set(self) -> set[int]:
        return set(int(s) for s in self.sats)

    def strongest_path(self, row: int) -> int:
        return int(np.argmax(np.abs(self.gains[row]) ** 2))

    def paths(self):
        """Iterate (sat, path, gain, q_bin, k_bin) tuples."""
        for a in range(self.n_active):
            for r in range(self.n_paths):
                yield (int(self.sats[a]), r, self.gains[a, r],
                       int(self.q_bins[a, r]), int(self.k_bins[a, r]))


@dataclass
class SampledSignal:
    samples: np.ndarray
    n_sym: int
    snr_db: float
    noise_sigma2: float = 0.0


def pulse_shape(t, mode: str = "ideal", tg_chips: float = 8.0,
                t_chip: float = T_CHIP):
    """Transmit pulse amplitude at time t (seconds; scalar or array).

    ideal: unit sample held over one chip, 1 on [0, t_chip).
    sinc:  sqrt(t_chip) * sinc(t/t_chip), truncated to |t| <= tg_chips*t_chip.
    """
    if tg_chips <= 0:
        raise ValueError("tg_chips must be positive")
    t = np.asarray(t, dtype=float)
    if mode == "ideal":
        out = np.where((t >= 0) & (t < t_chip), 1.0, 0.0)
    elif mode == "sinc":
        out = np.sqrt(t_chip) * np.sinc(t / t_chip)
        out = np.where(np.abs(t) <= tg_chips * t_chip + 1e-15 * t_chip, out, 0.0)
    else:
        raise ValueError(f"unknown pulse mode {mode!r}")
    return out if out.ndim else float(out)


def spread_waveform(code: CaCode, grid: GridSpec, pulse: str = "ideal",
                    tg_chips: float = 8.0) -> np.ndarray:
    """One symbol of the spreading waveform at oversample/t_chip.

    The code is extended periodically (the symbol is n_periods full code
    periods and the waveform wraps cyclically), so a delayed replica is a
    circular shift of this array.
    """
    chips = np.tile(code.chips.astype(float), grid.n_periods)
    os = grid.oversample
    if pulse == "ideal":
        return np.repeat(chips, os)
    if pulse != "sinc":
        raise ValueError(f"unknown pulse mode {pulse!r}")
    sps = grid.samples_per_symbol
    train = np.zeros(sps)
    train[::os] = chips
    half = int(round(tg_chips * os))
    out = np.zeros(sps)
    for lag in range(-half, half + 1):
        tap = pulse_shape(lag * grid.dt, "sinc", tg_chips, grid.t_chip)
        if tap != 0.0:
            out += tap * np.roll(train, lag)
    return out


def draw_channel(seed, grid: GridSpec, n_sats_total: int, n_active: int,
                 n_paths: int, tau_max_chips: float, doppler_max_hz: float,
                 n_sym: int, on_grid: bool = True) -> ChannelRealization:
    """Draw a random multipath channel, fully determined by the seed.

    Satellites are chosen uniformly without replacement; per path the gain is
    complex normal CN(0,1), the delay uniform on [0, tau_max] and the Doppler
    uniform on [-omega_max, omega_max].  With on_grid=True delays and
    Dopplers snap to the grid; otherwise the continuous values are kept and
    the nearest bin recorded.
    """
    if n_active > n_sats_total:
        raise ValueError("n_active cannot exceed n_sats_total")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    span = (grid.n_delay_bins - 1) * grid.delta_tau_chips
    if tau_max_chips > span + 1e-9:
        raise ValueError(f"tau_max_chips={tau_max_chips} exceeds grid span {span}")
    omega_max = 2.0 * math.pi * doppler_max_hz
    if omega_max > grid.k_half * grid.delta_omega + 0.5 * grid.delta_omega:
        raise ValueError("doppler_max_hz exceeds the Doppler grid span")

    rng = np.random.default_rng(seed)
    sats = np.sort(rng.choice(np.arange(1, n_sats_total + 1), size=n_active,
                              replace=False))
    shape = (n_active, n_paths)
    gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / math.sqrt(2.0)
    tau = rng.uniform(0.0, tau_max_chips, shape)
    omega = rng.uniform(-omega_max, omega_max, shape)
    nav = rng.choice(np.array([-1, 1], dtype=np.int8), size=(n_active, n_sym))

    q_bins = np.clip(np.round(tau / grid.delta_tau_chips).astype(int),
                     0, grid.n_delay_bins - 1)
    k_bins = np.clip(np.round(omega / grid.delta_omega).astype(int),
                     -grid.k_half, grid.k_half)
    if on_grid:
        tau = q_bins * grid.delta_tau_chips
        omega = k_bins * grid.delta_omega
    return ChannelRealization(sats=sats, gains=gains, tau_chips=tau,
                              omega=omega, q_bins=q_bins, k_bins=k_bins,
                              nav_bits=nav)


def synthesize_received(chan: ChannelRealization, grid: GridSpec,
                        codes: CodeFamily, n_sym: int, snr_db: float,
                        seed=0, pulse: str = "ideal",
                        tg_chips: float = 8.0) -> SampledSignal:
    """Render the discretized received signal for one channel realization.

    The noise is complex AWGN whose per-sample variance satisfies
    10*log10(mean signal power per sample / sigma^2) = snr_db, with the mean
    taken over the realized noiseless signal; snr_db = +inf is noiseless.
    An empty channel (no signal power) falls back to unit noise variance.
    """
    if n_sym < 1:
        raise ValueError("n_sym must be >= 1")
    if chan.nav_bits.shape[1] < n_sym:
        raise ValueError("channel has fewer navigation bits than n_sym")
    sps = grid.samples_per_symbol
    total = n_sym * sps + grid.guard_samples
    x = np.zeros(total, dtype=np.complex128)
    t = np.arange(total) * grid.dt

    waveforms = {}
    for a in range(chan.n_active):
        sat = int(chan.sats[a])
        if sat not in waveforms:
            waveforms[sat] = spread_waveform(codes[sat], grid, pulse, tg_chips)
        phi = waveforms[sat]
        for r in range(chan.n_paths):
            delay = int(round(chan.tau_chips[a, r] * grid.oversample))
            amp = chan.gains[a, r] * chan.nav_bits[a, :n_sym].astype(float)
            seg = np.repeat(amp, sps) * np.tile(phi, n_sym)
            sl = slice(delay, delay + n_sym * sps)
            x[sl] += seg * np.exp(1j * chan.omega[a, r] * t[sl])

    sigma2 = 0.0
    if np.isfinite(snr_db):
        mean_power = float(np.mean(np.abs(x) ** 2))
        if mean_power == 0.0:
            mean_power = 1.0
        sigma2 = mean_power * 10.0 ** (-snr_db / 10.0)
        rng = np.random.default_rng(seed)
        x += math.sqrt(sigma2 / 2.0) * (rng.standard_normal(total)
                                        + 1j * rng.standard_normal(total))
    return SampledSignal(samples=x, n_sym=n_sym, snr_db=snr_db,
                         noise_sigma2=sigma2)
