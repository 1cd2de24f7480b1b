"""Evolution of distributions on the Bloch sphere in the harmonic basis.

The dynamics dp/dt = 1/16 sum_k gamma_k X_k^2 p never couples different
degrees l, so every degree-l block a_l evolves by da_l/dt = G_l(t) a_l on
its own. Constant rates are propagated exactly (Hermitian eigendecomposition
of each block); rate schedules are stepped with RK4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import DEFAULT_STEP, SCAN_TOL
from .cp1_geometry import KahlerFunction
from .deformed_laplacian import generator_harmonic_block
from .errors import InvalidConfig, OutOfDomain
from .harmonics import HarmonicField, analyze, angular_generators, evaluate, squared_generators, synthesize
from .pauli_channel import DecoherenceRates, HamiltonianSpec, RatesSchedule
from .quadrature import OMEGA_FACTOR, QuadratureRule, quadrature_rule

__all__ = [
    "HarmonicField",
    "EvolutionReport",
    "analyze",
    "synthesize",
    "evaluate",
    "normalization",
    "evolve_isotropic",
    "evolve_anisotropic",
    "evolve_kahler_closed_form",
    "evolve_axial",
    "evolve_schedule",
    "propagate",
    "evolve_constant",
    "find_negativity",
    "NegativitySearch",
]


def normalization(hf: HarmonicField) -> float:
    """Integral of the field against omega (only the l=0 mode contributes)."""
    return OMEGA_FACTOR * math.sqrt(4 * math.pi) * hf.coefficient(0, 0).real


def _degree_array(l_max: int) -> np.ndarray:
    return np.arange(l_max + 1)[:, None]


def _order_array(l_max: int) -> np.ndarray:
    return np.arange(-l_max, l_max + 1)[None, :]


def evolve_isotropic(hf: HarmonicField, gamma: float, t: float) -> HarmonicField:
    """a_lm -> exp(-gamma l(l+1) t) a_lm (heat flow dp/dt = gamma/4 Laplacian)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    l = _degree_array(hf.l_max)
    return hf.with_coeffs(np.exp(-gamma * l * (l + 1) * t) * hf.coeffs)


def evolve_axial(hf: HarmonicField, gamma: float, t: float) -> HarmonicField:
    """Phase damping: a_lm -> exp(-gamma m^2 t) a_lm."""
    if t < 0:
        raise ValueError("t must be >= 0")
    m = _order_array(hf.l_max)
    return hf.with_coeffs(np.exp(-gamma * m * m * t) * hf.coeffs)


class _BlockPropagator:
    """Eigendecompositions of G_l for fixed rates, reused across times."""

    def __init__(self, rates: DecoherenceRates, l_max: int):
        self.l_max = l_max
        self.eig = [np.linalg.eigh(generator_harmonic_block(rates, l)) for l in range(l_max + 1)]

    def __call__(self, hf: HarmonicField, t: float) -> HarmonicField:
        L = self.l_max
        out = np.zeros_like(hf.coeffs)
        out[0] = hf.coeffs[0]
        for l in range(1, L + 1):
            block = hf.block(l)
            if not np.any(block):
                continue
            lam, V = self.eig[l]
            out[l, L - l : L + l + 1] = V @ (np.exp(lam * t) * (V.T @ block))
        return hf.with_coeffs(out)


def evolve_anisotropic(hf: HarmonicField, rates: DecoherenceRates, t: float) -> HarmonicField:
    """Exact propagation a_l -> exp(t G_l) a_l for constant rates."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return _BlockPropagator(rates, hf.l_max)(hf, t)


def propagate(hf: HarmonicField, rates: DecoherenceRates, times: Sequence[float]) -> list[HarmonicField]:
    """:func:`evolve_anisotropic` at several times, sharing one eigendecomposition."""
    prop = _BlockPropagator(rates, hf.l_max)
    return [prop(hf, float(t)) for t in times]


def evolve_kahler_closed_form(kf: KahlerFunction, rates: DecoherenceRates, t: float) -> KahlerFunction:
    if t < 0:
        raise ValueError("t must be >= 0")
    return KahlerFunction(kf.c0, np.exp(-rates.pairwise_sums() * t) * kf.dipole)


@dataclass
class EvolutionReport:
    times: np.ndarray
    trajectory: list[HarmonicField]
    min_values: np.ndarray
    normalizations: np.ndarray
    became_negative: bool = False
    first_negative_time: float | None = None
    extras: dict = field(default_factory=dict)


def _report(times, trajectory, rule: QuadratureRule, tol: float) -> EvolutionReport:
    mins = np.array([synthesize(hf, rule).min() for hf in trajectory])
    norms = np.array([normalization(hf) for hf in trajectory])
    neg = np.nonzero(mins < -tol)[0]
    first = float(times[neg[0]]) if neg.size else None
    return EvolutionReport(np.asarray(times, float), trajectory, mins, norms, bool(neg.size), first)


def _check_times(t_grid) -> np.ndarray:
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidConfig("t_grid must be a non-empty 1-d sequence")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise InvalidConfig("t_grid must be non-decreasing from 0")
    return times


def evolve_schedule(
    hf: HarmonicField,
    schedule: RatesSchedule,
    t_grid: Sequence[float],
    h: float = DEFAULT_STEP,
    rule: QuadratureRule | None = None,
    tol: float = SCAN_TOL,
    H: HamiltonianSpec | None = None,
) -> EvolutionReport:
    """RK4 stepping of da_l/dt = G_l(t) a_l from t=0, all degrees at once.

    The step is capped at ``h`` and additionally at 1/rho, rho being a bound
    on the largest block eigenvalue over the schedule, so that high degrees
    stay inside the RK4 stability region.

    A Hamiltonian adds the rigid rotation dp/dt = -1/2 X_h p, which on each
    block is -2i (n1 L1 + n2 L2 + n3 L3).
    """
    if not h > 0:
        raise InvalidConfig("step size must be positive")
    times = _check_times(t_grid)
    if not schedule.contains(0.0) or not schedule.contains(times[-1]):
        raise OutOfDomain("t_grid not covered by the schedule")
    L = hf.l_max
    lsq = squared_generators(L)
    l_eff = max(hf.effective_degree(), 0)
    bound = max(float(np.sum(np.abs(r.array))) for _, r in schedule.samples) * l_eff * (l_eff + 1)
    rotation = 0.0
    if H is not None and not H.is_zero():
        rotation = -2j * np.tensordot(H.axis, angular_generators(L), axes=1)
        bound += 2 * float(np.sum(np.abs(H.axis))) * l_eff
    h_eff = min(h, 1.0 / bound) if bound > 0 else h
    constant = schedule.is_constant

    def generator(t):
        g = schedule.values_at(0.0 if constant else min(t, schedule.domain[1]))
        return -np.tensordot(g, lsq, axes=1) + rotation

    def rhs(G, a):
        return np.einsum("lij,lj->li", G, a)

    a = hf.coeffs.copy()
    G_const = generator(0.0) if constant else None
    t = 0.0
    trajectory = []
    for t_out in times:
        span = t_out - t
        n = int(math.ceil(span / h_eff - 1e-9)) if span > 0 else 0
        if n:
            dt = span / n
            for i in range(n):
                ti = t + i * dt
                if constant:
                    G0 = Gm = G1 = G_const
                else:
                    G0, Gm, G1 = generator(ti), generator(ti + dt / 2), generator(ti + dt)
                k1 = rhs(G0, a)
                k2 = rhs(Gm, a + dt / 2 * k1)
                k3 = rhs(Gm, a + dt / 2 * k2)
                k4 = rhs(G1, a + dt * k3)
                a = a + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = float(t_out)
        trajectory.append(hf.with_coeffs(a))
    rule = rule or quadrature_rule(max(L + 1, 16), max(2 * L + 2, 32))
    report = _report(times, trajectory, rule, tol)
    report.extras["step"] = h_eff
    return report


def evolve_constant(
    hf: HarmonicField,
    rates: DecoherenceRates,
    t_grid: Sequence[float],
    rule: QuadratureRule | None = None,
    tol: float = SCAN_TOL,
) -> EvolutionReport:
    """Exact counterpart of :func:`evolve_schedule` for constant rates."""
    times = _check_times(t_grid)
    L = hf.l_max
    rule = rule or quadrature_rule(max(L + 1, 16), max(2 * L + 2, 32))
    return _report(times, propagate(hf, rates, times), rule, tol)


def _real_modes(rates: DecoherenceRates, l: int, l_max: int) -> list[tuple[float, HarmonicField]]:
    """Real eigenfunctions of G_l, unit L2 norm, with their growth rates (descending)."""
    lam, V = np.linalg.eigh(generator_harmonic_block(rates, l))
    m = np.arange(-l, l + 1)
    out = []
    for j in np.argsort(lam)[::-1]:
        v = V[:, j].astype(complex)
        mirror = ((-1.0) ** np.abs(m)) * np.conj(v[::-1])
        for cand in (0.5 * (v + mirror), 0.5j * (mirror - v)):
            nrm = np.linalg.norm(cand)
            if nrm > 1e-8:
                c = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
                c[l, l_max - l : l_max + l + 1] = cand / nrm
                out.append((float(lam[j]), HarmonicField(l_max, c)))
    return out


@dataclass
class NegativitySearch:
    rates: DecoherenceRates
    found: bool
    first_negative_time: float | None
    initial: HarmonicField | None
    min_initial: float | None
    growth_rate: float
    degree: int
    candidates_tried: int
    dipole_only_min: float


def find_negativity(
    rates: DecoherenceRates,
    t_grid: Sequence[float] | None = None,
    l_max: int = 2,
    amplitudes: Sequence[float] = (0.25, 0.5, 0.75, 0.9),
    dipoles: Sequence[float] = (0.0, 0.2, 0.4),
    rule: QuadratureRule | None = None,
    tol: float = SCAN_TOL,
) -> NegativitySearch:
    """Grid search for a nonnegative band-limited p_0 whose evolution turns negative.

    Candidates are p_0 = 1/pi + d * f_axis / pi + s * (growing real eigenmode
    of some G_l, 2 <= l <= l_max), with the mode amplitude scaled so that p_0
    stays nonnegative on the grid. The earliest negative time wins.

    Also reports the smallest value reached by dipole-only data (pure states
    along each axis), which stays nonnegative for PositiveOnly rates.
    """
    times = _check_times(np.linspace(0, 20, 201) if t_grid is None else t_grid)
    rule = rule or quadrature_rule(max(l_max + 1, 24), max(2 * l_max + 2, 48))
    offsets = [np.zeros(3)]
    for d in dipoles:
        if d:
            offsets.extend(d * np.eye(3)[k] for k in range(3))
    best = None
    tried = 0
    for l in range(2, l_max + 1):
        for rate, mode in _real_modes(rates, l, l_max):
            if rate <= 0:
                continue
            span = float(-synthesize(mode, rule).min())
            if span <= 0:
                continue
            for x in offsets:
                p_dip = KahlerFunction(1 / math.pi, x / math.pi).to_harmonic(l_max)
                floor = synthesize(p_dip, rule).min()
                for s in amplitudes:
                    tried += 1
                    p0 = p_dip + (s * floor / span) * mode
                    m0 = synthesize(p0, rule).min()
                    if m0 < -tol:
                        continue
                    rep = evolve_constant(p0, rates, times, rule, tol)
                    if rep.became_negative and (best is None or rep.first_negative_time < best[0]):
                        best = (rep.first_negative_time, p0, m0, rate, l)
    dip_min = math.inf
    for x in np.vstack([np.eye(3), -np.eye(3)]):
        kf = KahlerFunction(1 / math.pi, x / math.pi)
        for t in times:
            dip_min = min(dip_min, evolve_kahler_closed_form(kf, rates, float(t)).min_value())
    if best is None:
        return NegativitySearch(rates, False, None, None, None, 0.0, 0, tried, dip_min)
    t_neg, p0, m0, rate, l = best
    return NegativitySearch(rates, True, t_neg, p0, m0, rate, l, tried, dip_min)
