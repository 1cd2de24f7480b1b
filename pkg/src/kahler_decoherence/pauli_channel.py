"""Density-matrix side of qubit decoherence.

The model is the Pauli dephasing master equation

    d rho / dt = -i[H, rho] + 1/2 sum_k gamma_k (sigma_k rho sigma_k - rho)

with rates ``gamma_k`` along the three Pauli axes. It is solved three ways:
in closed form on the Bloch vector, as a Pauli channel with time-dependent
mixing probabilities, and by fixed-step RK4 integration (the numerical oracle
for the other two and the only route for time-dependent rates).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .constants import ALGEBRAIC_TOL, DEFAULT_STEP, MIXTURE_TOL, RATE_TOL
from .errors import InvalidConfig, InvalidMixture, InvalidState, OutOfDomain

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
#: sigma_0 .. sigma_3
PAULI = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian 2x2 matrix.

    ``role="state"`` (the default) additionally requires unit trace;
    ``role="operator"`` carries an arbitrary Hermitian observable.
    Positivity is not enforced here, see :meth:`is_physical`.
    """

    entries: np.ndarray
    role: str = "state"

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.shape != (2, 2):
            raise InvalidState(f"expected a 2x2 matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidState("matrix entries must be finite")
        if np.max(np.abs(m - m.conj().T)) > ALGEBRAIC_TOL:
            raise InvalidState("matrix is not Hermitian")
        if self.role not in ("state", "operator"):
            raise InvalidState(f"unknown role {self.role!r}")
        if self.role == "state" and abs(np.trace(m) - 1.0) > ALGEBRAIC_TOL:
            raise InvalidState(f"trace is {np.trace(m).real!r}, expected 1")
        object.__setattr__(self, "entries", m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def is_physical(self, tol: float = ALGEBRAIC_TOL) -> bool:
        return self.role == "state" and bool(self.eigenvalues().min() >= -tol)

    def is_pure(self, tol: float = ALGEBRAIC_TOL) -> bool:
        return abs(bloch_from_density(self).norm() - 1.0) <= tol


@dataclass(frozen=True)
class BlochVector:
    x1: float
    x2: float
    x3: float

    @classmethod
    def from_array(cls, x: Iterable[float]) -> "BlochVector":
        a, b, c = (float(v) for v in x)
        return cls(a, b, c)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def is_physical(self, tol: float = ALGEBRAIC_TOL) -> bool:
        return self.norm() <= 1.0 + tol


@dataclass(frozen=True)
class DecoherenceRates:
    """Decoherence rates (gamma_1, gamma_2, gamma_3) in 1/time.

    No sign constraint is imposed; see :func:`rates_admissible`.
    """

    gamma1: float
    gamma2: float
    gamma3: float

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidConfig(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @classmethod
    def isotropic(cls, gamma: float) -> "DecoherenceRates":
        return cls(gamma, gamma, gamma)

    @classmethod
    def from_array(cls, g: Iterable[float]) -> "DecoherenceRates":
        a, b, c = (float(v) for v in g)
        return cls(a, b, c)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.gamma1, self.gamma2, self.gamma3])

    def pairwise_sums(self) -> np.ndarray:
        """(gamma2+gamma3, gamma1+gamma3, gamma1+gamma2): the Bloch decay rates."""
        g1, g2, g3 = self.gamma1, self.gamma2, self.gamma3
        return np.array([g2 + g3, g1 + g3, g1 + g2])


@dataclass(frozen=True)
class RatesSchedule:
    """Piecewise-linear rates gamma_k(t).

    A single sample defines rates that are constant on ``[t0, inf)``.
    """

    samples: tuple[tuple[float, DecoherenceRates], ...]

    def __post_init__(self):
        samples = tuple((float(t), r) for t, r in self.samples)
        if not samples:
            raise InvalidConfig("schedule needs at least one sample")
        times = [t for t, _ in samples]
        if times[0] < 0 or not all(math.isfinite(t) for t in times):
            raise InvalidConfig("schedule times must be finite and >= 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidConfig("schedule times must be strictly increasing")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "_times", np.array(times))
        object.__setattr__(self, "_values", np.array([r.array for _, r in samples]))

    @classmethod
    def constant(cls, rates: DecoherenceRates, t0: float = 0.0) -> "RatesSchedule":
        return cls(((t0, rates),))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, Sequence[float]]]) -> "RatesSchedule":
        return cls(tuple((t, DecoherenceRates.from_array(g)) for t, g in pairs))

    @property
    def domain(self) -> tuple[float, float]:
        t = self._times
        return float(t[0]), (math.inf if len(t) == 1 else float(t[-1]))

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self._values == self._values[0]))

    def contains(self, t: float) -> bool:
        lo, hi = self.domain
        return lo - 1e-12 <= t <= hi + 1e-12

    def values_at(self, t: float) -> np.ndarray:
        if not self.contains(t):
            raise OutOfDomain(f"t={t} outside schedule domain {self.domain}")
        if len(self._times) == 1:
            return self._values[0].copy()
        return np.array([np.interp(t, self._times, self._values[:, k]) for k in range(3)])

    def at(self, t: float) -> DecoherenceRates:
        return DecoherenceRates.from_array(self.values_at(t))


@dataclass(frozen=True)
class PauliMixture:
    """Weights of Lambda[rho] = sum_a p_a sigma_a rho sigma_a.

    Negative weights are kept as computed: they flag a non-CP map.
    """

    p0: float
    p1: float
    p2: float
    p3: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2, self.p3])

    def is_probability(self, tol: float = ALGEBRAIC_TOL) -> bool:
        p = self.array
        return bool(np.all(p >= -tol) and np.all(p <= 1 + tol) and abs(p.sum() - 1) <= tol)


@dataclass(frozen=True)
class HamiltonianSpec:
    """H = n0 I + n1 sigma_1 + n2 sigma_2 + n3 sigma_3."""

    n0: float = 0.0
    n1: float = 0.0
    n2: float = 0.0
    n3: float = 0.0

    def __post_init__(self):
        for name in ("n0", "n1", "n2", "n3"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidConfig(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, n: Iterable[float]) -> "HamiltonianSpec":
        return cls(*(float(v) for v in n))

    @property
    def axis(self) -> np.ndarray:
        return np.array([self.n1, self.n2, self.n3])

    def matrix(self) -> np.ndarray:
        return self.n0 * IDENTITY + self.n1 * SIGMA_X + self.n2 * SIGMA_Y + self.n3 * SIGMA_Z

    def is_zero(self) -> bool:
        return not np.any(self.axis)


class Admissibility(str, enum.Enum):
    COMPLETELY_POSITIVE = "CompletelyPositive"
    POSITIVE_ONLY = "PositiveOnly"
    INADMISSIBLE = "Inadmissible"


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[DensityMatrix]
    trace_drift: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def bloch(self) -> np.ndarray:
        """Bloch vectors as an array of shape (len(times), 3)."""
        return np.array([bloch_from_density(s).array for s in self.states])


def _as_matrix(rho) -> np.ndarray:
    return rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def bloch_from_density(rho: DensityMatrix) -> BlochVector:
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    if rho.role != "state":
        raise InvalidState("Bloch vector is defined for states only")
    m = rho.entries
    return BlochVector(*(float(np.trace(m @ s).real) for s in PAULI[1:]))


def density_from_bloch(x: BlochVector | Sequence[float]) -> DensityMatrix:
    v = x.array if isinstance(x, BlochVector) else np.asarray(x, dtype=float)
    m = 0.5 * (IDENTITY + v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z)
    return DensityMatrix(m)


def evolve_bloch_closed_form(x0: BlochVector, rates: DecoherenceRates, t: float) -> BlochVector:
    """Exact solution of the dephasing equation without Hamiltonian."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return BlochVector.from_array(np.exp(-rates.pairwise_sums() * t) * x0.array)


def lindblad_rhs(rho, rates: DecoherenceRates, H: HamiltonianSpec | None = None) -> np.ndarray:
    """Right-hand side -i[H, rho] + 1/2 sum_k gamma_k (s_k rho s_k - rho)."""
    m = _as_matrix(rho)
    out = np.zeros((2, 2), dtype=complex)
    for g, s in zip(rates.array, PAULI[1:]):
        if g:
            out += 0.5 * g * (s @ m @ s - m)
    if H is not None and not H.is_zero():
        h = H.matrix()
        out += -1j * (h @ m - m @ h)
    return out


def integrate_master_equation(
    rho0: DensityMatrix,
    schedule: RatesSchedule | DecoherenceRates,
    H: HamiltonianSpec | None,
    t_grid: Sequence[float],
    h: float = DEFAULT_STEP,
) -> Trajectory:
    """Classical RK4 integration of :func:`lindblad_rhs` from t=0.

    Between consecutive output times the interval is split into equal steps
    no longer than ``h``. Each output is renormalised to unit trace and the
    removed drift is kept in ``Trajectory.trace_drift``.
    """
    if not h > 0:
        raise InvalidConfig("step size must be positive")
    if isinstance(schedule, DecoherenceRates):
        schedule = RatesSchedule.constant(schedule)
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidConfig("t_grid must be a non-empty 1-d sequence")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise InvalidConfig("t_grid must be non-decreasing from 0")
    if not schedule.contains(0.0) or not schedule.contains(times[-1]):
        raise OutOfDomain("t_grid not covered by the schedule")
    if H is None:
        H = HamiltonianSpec()
    constant = schedule.is_constant
    fixed = schedule.at(0.0)

    def rates_at(t):
        return fixed if constant else schedule.at(min(t, schedule.domain[1]))

    def f(t, m):
        return lindblad_rhs(m, rates_at(t), H)

    m = rho0.entries.copy()
    t = 0.0
    states, drift = [], []
    for t_out in times:
        span = t_out - t
        n = int(math.ceil(span / h - 1e-9)) if span > 0 else 0
        if n:
            dt = span / n
            for i in range(n):
                ti = t + i * dt
                k1 = f(ti, m)
                k2 = f(ti + dt / 2, m + dt / 2 * k1)
                k3 = f(ti + dt / 2, m + dt / 2 * k2)
                k4 = f(ti + dt, m + dt * k3)
                m = m + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = float(t_out)
        tr = np.trace(m).real
        drift.append(tr - 1.0)
        m = 0.5 * (m + m.conj().T) / tr
        states.append(DensityMatrix(m))
    return Trajectory(times, states, np.array(drift))


def pauli_mixing_probabilities(rates: DecoherenceRates, t: float) -> PauliMixture:
    if t < 0:
        raise ValueError("t must be >= 0")
    g1, g2, g3 = rates.array
    e12 = math.exp(-(g1 + g2) * t)
    e23 = math.exp(-(g2 + g3) * t)
    e31 = math.exp(-(g3 + g1) * t)
    p1 = 0.25 * (1 - e12 + e23 - e31)
    p2 = 0.25 * (1 - e12 - e23 + e31)
    p3 = 0.25 * (1 + e12 - e23 - e31)
    return PauliMixture(1.0 - p1 - p2 - p3, p1, p2, p3)


def apply_pauli_channel(rho: DensityMatrix, mix: PauliMixture) -> DensityMatrix:
    p = mix.array
    if abs(p.sum() - 1.0) > MIXTURE_TOL:
        raise InvalidMixture(f"weights sum to {p.sum()!r}, expected 1")
    m = rho.entries
    out = sum(w * (s @ m @ s) for w, s in zip(p, PAULI))
    return DensityMatrix(0.5 * (out + out.conj().T))


def rates_admissible(rates: DecoherenceRates, tol: float = RATE_TOL) -> Admissibility:
    if np.all(rates.array >= -tol):
        return Admissibility.COMPLETELY_POSITIVE
    if np.all(rates.pairwise_sums() >= -tol):
        return Admissibility.POSITIVE_ONLY
    return Admissibility.INADMISSIBLE
