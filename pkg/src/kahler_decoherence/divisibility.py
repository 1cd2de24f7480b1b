"""CP- and P-divisibility of time-dependent dephasing rates.

At each sampled time the instantaneous generator is tested twice:

* CP: all gamma_k(t) >= 0, cross-checked by scanning the diffusion matrix
  A(theta, phi; t) for a negative eigenvalue;
* P: all pairwise sums gamma_i(t) + gamma_j(t) >= 0, cross-checked against
  the dipole block G_1(t), whose eigenvalues are minus those sums.

Assessment is pointwise on the sampled grid; nothing happens between samples.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import ALGEBRAIC_TOL, DEFAULT_SCAN, RATE_TOL, SCAN_TOL
from .deformed_laplacian import block_growth_rates, is_elliptic
from .errors import OutOfDomain
from .pauli_channel import RatesSchedule


class Divisibility(str, enum.Enum):
    CP_DIVISIBLE = "CPDivisible"
    P_DIVISIBLE = "PDivisible"
    NEITHER = "Neither"


@dataclass(frozen=True)
class TimeVerdict:
    t: float
    cp: bool
    p: bool
    min_symbol_eigenvalue: float
    pairwise_min: float
    cp_numeric: bool
    p_numeric: bool
    strictly: bool
    rates: tuple[float, float, float]

    @property
    def consistent(self) -> bool:
        return self.cp == self.cp_numeric and self.p == self.p_numeric


@dataclass
class DivisibilityReport:
    verdicts: list[TimeVerdict] = field(default_factory=list)

    @property
    def overall(self) -> Divisibility:
        if all(v.cp for v in self.verdicts):
            return Divisibility.CP_DIVISIBLE
        if all(v.p for v in self.verdicts):
            return Divisibility.P_DIVISIBLE
        return Divisibility.NEITHER

    @property
    def consistent(self) -> bool:
        return all(v.consistent for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "overall": self.overall.value,
            "consistent": self.consistent,
            "verdicts": [
                {
                    "t": v.t,
                    "rates": list(v.rates),
                    "cp": v.cp,
                    "p": v.p,
                    "strictly": v.strictly,
                    "min_symbol_eigenvalue": v.min_symbol_eigenvalue,
                    "pairwise_min": v.pairwise_min,
                    "cp_numeric": v.cp_numeric,
                    "p_numeric": v.p_numeric,
                }
                for v in self.verdicts
            ],
        }


def classify_schedule(
    schedule: RatesSchedule,
    t_grid: Sequence[float],
    scan: tuple[int, int] = DEFAULT_SCAN,
    tol: float = RATE_TOL,
) -> DivisibilityReport:
    report = DivisibilityReport()
    for t in np.asarray(t_grid, dtype=float):
        if not schedule.contains(t):
            raise OutOfDomain(f"t={t} outside schedule domain {schedule.domain}")
        rates = schedule.at(t)
        g = rates.array
        pair = rates.pairwise_sums()
        symbol = is_elliptic(rates, scan, SCAN_TOL)
        dipole = block_growth_rates(rates, 1)
        report.verdicts.append(
            TimeVerdict(
                t=float(t),
                cp=bool(np.all(g >= -tol)),
                p=bool(np.all(pair >= -tol)),
                min_symbol_eigenvalue=symbol.min_eigenvalue,
                pairwise_min=float(pair.min()),
                cp_numeric=symbol.numeric_elliptic,
                p_numeric=bool(dipole[-1] <= ALGEBRAIC_TOL),
                strictly=bool(np.all(g > tol)),
                rates=tuple(float(x) for x in g),
            )
        )
    return report


def positivity_violation_witness(schedule: RatesSchedule, t_grid: Sequence[float], l_max: int = 2):
    """Largest growth rate over blocks 2..l_max and sampled times, with its (t, l)."""
    best = (None, None, -np.inf)
    for t in np.asarray(t_grid, dtype=float):
        rates = schedule.at(t)
        for l in range(2, l_max + 1):
            top = float(block_growth_rates(rates, l)[-1])
            if top > best[2]:
                best = (float(t), l, top)
    return best
