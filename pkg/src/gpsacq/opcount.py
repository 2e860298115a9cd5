"""Per-stage operation tallies for the receiver complexity comparison.

MAC stages count complex multiply-accumulates; selection stages count
comparisons.  Counters are plain dictionaries so callers can diff, merge and
report them without ceremony.
"""

from __future__ import annotations

from dataclasses import dataclass, field

MAC_STAGES = (
    "mf_correlations",
    "mf_accumulation",
    "mf_cancellation",
    "cs_compression",
    "cs_whitening",
    "ctf_covariance",
    "ctf_eig",
    "omp1_residual",
    "omp2_inner_products",
    "omp4_least_squares",
    "omp5_stopping",
)
COMPARE_STAGES = (
    "mf_path_selection",
    "omp3_max_projection",
)


@dataclass
class OpCounter:
    counts: dict = field(default_factory=dict)

    def add(self, stage: str, n: int) -> None:
        self.counts[stage] = self.counts.get(stage, 0) + int(n)

    def get(self, stage: str) -> int:
        return self.counts.get(stage, 0)

    def total_macs(self) -> int:
        return sum(v for k, v in self.counts.items() if k in MAC_STAGES)

    def total(self) -> int:
        return sum(self.counts.values())

    def merge(self, other: "OpCounter") -> None:
        for k, v in other.counts.items():
            self.add(k, v)
