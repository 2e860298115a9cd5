"""Gold spreading-code generation and correlation properties.

Chips are +/-1 (bit b maps to chip 1-2b), so correlations are plain inner
products.  The 1023-chip codes come from the standard GPS dual-LFSR
construction (G1: taps 3,10; G2: taps 2,3,6,8,9,10) with the published
per-satellite phase-selector pairs.  Shorter lengths for desk-scale runs use
preferred-pair Gold generators:

    m0 = 31   G1 = x^5+x^2+1            G2 = x^5+x^4+x^3+x^2+1
    m0 = 127  G1 = x^7+x^3+1            G2 = x^7+x^3+x^2+x+1
    m0 = 511  G1 = x^9+x^4+1            G2 = x^9+x^6+x^4+x^3+1

All correlations are cyclic over the code period.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CA_LENGTH = 1023

# G2 output taps per PRN (IS-GPS-200 phase-selector pairs, 1-indexed stages)
PHASE_SELECTORS = {
    1: (2, 6), 2: (3, 7), 3: (4, 8), 4: (5, 9), 5: (1, 9), 6: (2, 10),
    7: (1, 8), 8: (2, 9), 9: (3, 10), 10: (2, 3), 11: (3, 4), 12: (5, 6),
    13: (6, 7), 14: (7, 8), 15: (8, 9), 16: (9, 10), 17: (1, 4), 18: (2, 5),
    19: (3, 6), 20: (4, 7), 21: (5, 8), 22: (6, 9), 23: (1, 3), 24: (4, 6),
    25: (5, 7), 26: (6, 8), 27: (7, 9), 28: (8, 10), 29: (1, 6), 30: (2, 7),
    31: (3, 8), 32: (4, 9),
}

# Preferred-pair feedback taps for desk-scale lengths (1-indexed stages).
PREFERRED_PAIRS = {
    31: ((5, 2), (5, 4, 3, 2)),
    127: ((7, 3), (7, 3, 2, 1)),
    511: ((9, 4), (9, 6, 4, 3)),
}


@dataclass(frozen=True)
class CaCode:
    """One satellite's spreading code: prn index plus +/-1 chip array."""

    prn: int
    chips: np.ndarray

    def __post_init__(self):
        chips = np.asarray(self.chips, dtype=np.int8)
        if not np.all(np.abs(chips) == 1):
            raise ValueError("chips must be +1 or -1")
        object.__setattr__(self, "chips", chips)

    @property
    def m0(self) -> int:
        return len(self.chips)


@dataclass(frozen=True)
class CodeFamily:
    """Codes for prn 1..I sharing one period length and repetition count."""

    codes: list[CaCode]
    n_periods: int = 1
    m0: int = field(init=False)

    def __post_init__(self):
        if not self.codes:
            raise ValueError("family needs at least one code")
        lengths = {c.m0 for c in self.codes}
        if len(lengths) != 1:
            raise ValueError("all codes in a family must share m0")
        object.__setattr__(self, "m0", self.codes[0].m0)

    @property
    def n_sats(self) -> int:
        return len(self.codes)

    def __getitem__(self, prn: int) -> CaCode:
        return self.codes[prn - 1]


def _lfsr_sequence(taps: tuple[int, ...], degree: int) -> np.ndarray:
    """Maximal-length 0/1 sequence from a Fibonacci LFSR seeded all-ones.

    Output is the last stage; feedback is the XOR of the tapped stages.
    """
    length = 2**degree - 1
    reg = [1] * degree
    out = np.empty(length, dtype=np.int8)
    for i in range(length):
        out[i] = reg[degree - 1]
        fb = 0
        for t in taps:
            fb ^= reg[t - 1]
        reg = [fb] + reg[:-1]
    return out


def generate_ca_code(prn: int, m0: int = CA_LENGTH) -> CaCode:
    """Generate the +/-1 spreading code for one satellite.

    For m0=1023 this is the standard GPS C/A generator with phase selectors
    for prn 1..32.  For m0 in {31, 127, 511} a preferred-pair Gold family is
    used, with prn p taking the G2 sequence delayed by p-1 chips (so distinct
    prn always yield distinct chips).
    """
    if m0 == CA_LENGTH:
        if prn not in PHASE_SELECTORS:
            raise ValueError(f"unknown prn {prn}: valid range is 1..32 for m0=1023")
        g1 = _lfsr_sequence((3, 10), 10)
        # G2 with the full feedback polynomial; the selector taps replace the
        # classic code-delay formulation and give identical sequences.
        degree = 10
        reg = [1] * degree
        ta, tb = PHASE_SELECTORS[prn]
        g2sel = np.empty(m0, dtype=np.int8)
        for i in range(m0):
            g2sel[i] = reg[ta - 1] ^ reg[tb - 1]
            fb = reg[1] ^ reg[2] ^ reg[5] ^ reg[7] ^ reg[8] ^ reg[9]
            reg = [fb] + reg[:-1]
        bits = g1 ^ g2sel
    elif m0 in PREFERRED_PAIRS:
        n_codes = m0  # one Gold code per relative phase
        if not 1 <= prn <= n_codes:
            raise ValueError(f"unknown prn {prn}: valid range is 1..{n_codes} for m0={m0}")
        taps1, taps2 = PREFERRED_PAIRS[m0]
        degree = taps1[0]
        seq1 = _lfsr_sequence(taps1, degree)
        seq2 = _lfsr_sequence(taps2, degree)
        bits = seq1 ^ np.roll(seq2, -(prn - 1))
    else:
        raise ValueError(
            f"unsupported m0 {m0}: use 1023 or one of {sorted(PREFERRED_PAIRS)}"
        )
    return CaCode(prn=prn, chips=(1 - 2 * bits.astype(np.int8)).astype(np.int8))


def code_family(n_sats: int, m0: int = CA_LENGTH, n_periods: int = 1) -> CodeFamily:
    return CodeFamily(
        codes=[generate_ca_code(p, m0) for p in range(1, n_sats + 1)],
        n_periods=n_periods,
    )


def cross_correlation(a: CaCode, b: CaCode, u: int, n_periods: int = 1) -> float:
    """Normalized cyclic cross-correlation (1/M) sum_m a[m-u] b[m].

    The lag wraps cyclically over the M = n_periods*m0 chip symbol (the code
    repeats every m0 chips, so the value only depends on u mod m0).
    """
    if a.m0 != b.m0:
        raise ValueError("codes must share m0")
    m_total = n_periods * a.m0
    if abs(u) > m_total - 1:
        raise ValueError(f"|u| must be <= M-1 = {m_total - 1}")
    shifted = np.roll(a.chips, u % a.m0).astype(np.int64)
    return float(shifted @ b.chips.astype(np.int64)) / a.m0


def cross_correlation_all_lags(a: CaCode, b: CaCode) -> np.ndarray:
    """Cyclic cross-correlation at every lag u = 0..m0-1, FFT-accelerated."""
    if a.m0 != b.m0:
        raise ValueError("codes must share m0")
    fa = np.fft.fft(a.chips)
    fb = np.fft.fft(b.chips)
    # r[u] = (1/m0) sum_m a[m-u] b[m] = ifft(conj(fft(a)) * fft(b)) / m0
    vals = np.fft.ifft(np.conj(fa) * fb).real / a.m0
    return vals


def max_cross_correlation(a: CaCode, b: CaCode) -> float:
    return float(np.max(np.abs(cross_correlation_all_lags(a, b))))


def cross_spectral_error(a: CaCode, b: CaCode, n_freqs: int = 4096) -> float:
    """Flatness deviation of the code pair's cyclic cross-spectral density.

    Evaluates S(w) = sum_u R[u] e^{-i u w Tc} (one code period of lags) on a
    uniform grid of n_freqs frequencies over one 2*pi/Tc period, subtracts
    the Kronecker delta on the satellite indices, and returns the RMS of the
    deviation normalized by sqrt(m0).  By Parseval this equals the lag-domain
    RMS distance of R from a unit impulse, so Gold pairs come out well below
    one while generic +/-1 pairs stay finite.
    """
    if a.m0 != b.m0:
        raise ValueError("codes must share m0")
    if n_freqs < a.m0:
        raise ValueError("n_freqs must be at least m0")
    r = cross_correlation_all_lags(a, b).astype(np.complex128)
    if a.prn == b.prn and np.array_equal(a.chips, b.chips):
        r[0] -= 1.0
    spectrum = np.fft.fft(r, n_freqs)
    return float(np.sqrt(np.mean(np.abs(spectrum) ** 2) / a.m0))
