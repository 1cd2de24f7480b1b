"""Kahler functions on CP^1 (the Bloch sphere).

Chart: psi_0 = cos(theta/2), psi_1 = sin(theta/2) exp(i phi). In this chart
the expectation functions of the Pauli matrices are

    f_0 = 1, f_1 = sin(theta) cos(phi), f_2 = sin(theta) sin(phi), f_3 = cos(theta)

and the Hamiltonian vector fields X_k of f_k act as X_i f_j = -4 eps_ijk f_k.
The probability measure is omega = 1/4 sin(theta) dtheta ^ dphi (total mass pi).
A qubit state rho with Bloch vector x maps to the distribution
p = (2/pi) <psi|rho|psi> = (1 + x . f) / pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import ALGEBRAIC_TOL
from .errors import InvalidAxis, InvalidGrid, InvalidOperator, InvalidState, NotKahler, UnphysicalState
from .harmonics import HarmonicField, apply_angular_momentum, synthesize
from .pauli_channel import (
    PAULI,
    DensityMatrix,
    HamiltonianSpec,
    density_from_bloch,
)
from .quadrature import GridField, QuadratureRule, integrate_grid, quadrature_rule

#: integral of f_k^2 against omega, k = 1, 2, 3
DIPOLE_GRAM = math.pi / 3

_LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI_CIVITA[_i, _j, _k] = 1.0
    _LEVI_CIVITA[_j, _i, _k] = -1.0


@dataclass(frozen=True)
class SpherePoint:
    theta: float
    phi: float

    def __post_init__(self):
        th = float(self.theta)
        if not 0.0 <= th <= math.pi:
            raise ValueError(f"theta={th} outside [0, pi]")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "SpherePoint":
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        return cls(math.acos(max(-1.0, min(1.0, x[2] / r))), math.atan2(x[1], x[0]))

    def ket(self) -> np.ndarray:
        return np.array([math.cos(self.theta / 2), math.sin(self.theta / 2) * np.exp(1j * self.phi)])


def basis_functions(theta, phi) -> np.ndarray:
    """(f_1, f_2, f_3) stacked along the first axis."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    s = np.sin(theta)
    return np.stack([s * np.cos(phi), s * np.sin(phi), np.cos(theta)])


@dataclass(frozen=True)
class KahlerFunction:
    """c0 + c1 f_1 + c2 f_2 + c3 f_3."""

    c0: float
    c: tuple[float, float, float]

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        if len(c) != 3:
            raise ValueError("dipole part needs three coefficients")
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "c", c)

    @property
    def dipole(self) -> np.ndarray:
        return np.array(self.c)

    def __call__(self, theta, phi) -> np.ndarray:
        return self.c0 + np.tensordot(self.dipole, basis_functions(theta, phi), axes=1)

    def __add__(self, other: "KahlerFunction") -> "KahlerFunction":
        return KahlerFunction(self.c0 + other.c0, self.dipole + other.dipole)

    def __mul__(self, k: float) -> "KahlerFunction":
        return KahlerFunction(k * self.c0, k * self.dipole)

    __rmul__ = __mul__

    def min_value(self) -> float:
        """Exact minimum over the sphere."""
        return self.c0 - float(np.linalg.norm(self.dipole))

    def is_distribution(self, tol: float = ALGEBRAIC_TOL) -> bool:
        return abs(self.c0 * math.pi - 1) <= tol and self.min_value() >= -tol

    def to_harmonic(self, l_max: int = 1) -> HarmonicField:
        c1, c2, c3 = self.c
        k = math.sqrt(2 * math.pi / 3)
        entries = {
            (0, 0): self.c0 * math.sqrt(4 * math.pi),
            (1, 0): c3 * math.sqrt(4 * math.pi / 3),
            (1, 1): k * (-c1 + 1j * c2),
            (1, -1): k * (c1 + 1j * c2),
        }
        return HarmonicField.from_dict(max(l_max, 1), entries)

    @classmethod
    def from_harmonic(cls, hf: HarmonicField, tol: float = ALGEBRAIC_TOL) -> "KahlerFunction":
        """Inverse of :meth:`to_harmonic`; content above the dipole raises NotKahler."""
        if hf.l_max >= 2:
            excess = float(np.max(np.abs(hf.coeffs[2:])))
            if excess > tol:
                raise NotKahler(f"harmonic content above l=1 (max |a_lm| = {excess:.3g})")
        if hf.l_max == 0:
            return cls(hf.coefficient(0, 0).real / math.sqrt(4 * math.pi), (0.0, 0.0, 0.0))
        k = math.sqrt(2 * math.pi / 3)
        a_p, a_m = hf.coefficient(1, 1), hf.coefficient(1, -1)
        c1 = (a_m - a_p).real / (2 * k)
        c2 = (a_m + a_p).imag / (2 * k)
        c3 = hf.coefficient(1, 0).real / math.sqrt(4 * math.pi / 3)
        return cls(hf.coefficient(0, 0).real / math.sqrt(4 * math.pi), (c1, c2, c3))


def _check_hermitian(A) -> np.ndarray:
    if isinstance(A, DensityMatrix):
        return A.entries
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2) or np.max(np.abs(A - A.conj().T)) > ALGEBRAIC_TOL:
        raise InvalidOperator("expected a Hermitian 2x2 operator")
    return A


def kahler_from_operator(A) -> KahlerFunction:
    """f_A([psi]) = <psi|A|psi> / <psi|psi>."""
    A = _check_hermitian(A)
    c = [0.5 * np.trace(A @ s).real for s in PAULI]
    return KahlerFunction(c[0], c[1:])


def operator_from_kahler(f: KahlerFunction) -> np.ndarray:
    return f.c0 * PAULI[0] + sum(ck * s for ck, s in zip(f.c, PAULI[1:]))


def expectation(A, point: SpherePoint) -> float:
    """<psi|A|psi>/<psi|psi> evaluated directly on the ket of ``point``."""
    psi = point.ket()
    return float((psi.conj() @ np.asarray(A, complex) @ psi).real / (psi.conj() @ psi).real)


def distribution_from_density(rho: DensityMatrix) -> KahlerFunction:
    if not isinstance(rho, DensityMatrix) or not rho.is_physical():
        raise InvalidState("a physical density matrix is required")
    return (2 / math.pi) * kahler_from_operator(rho)


def integrate_sphere(field, rule: QuadratureRule | None = None) -> float:
    """Integral against omega of a GridField, KahlerFunction or HarmonicField."""
    if isinstance(field, GridField):
        if rule is not None and field.values.shape != rule.shape:
            raise InvalidGrid("field does not live on this rule")
        return integrate_grid(field)
    rule = rule or quadrature_rule()
    if isinstance(field, KahlerFunction):
        return integrate_grid(GridField.from_function(field, rule))
    if isinstance(field, HarmonicField):
        return integrate_grid(synthesize(field, rule))
    if callable(field):
        return integrate_grid(GridField.from_function(field, rule))
    raise TypeError(f"cannot integrate {type(field).__name__}")


def apply_vector_field(k: int, field):
    """X_k applied to a KahlerFunction (exactly) or a HarmonicField (blockwise, X_k = 4i L_k)."""
    if k not in (1, 2, 3):
        raise InvalidAxis(f"axis must be 1, 2 or 3, got {k!r}")
    if isinstance(field, KahlerFunction):
        # (X_k f)_j = -4 sum_i eps_kij c_i
        return KahlerFunction(0.0, -4 * _LEVI_CIVITA[k - 1].T @ field.dipole)
    if isinstance(field, HarmonicField):
        return 4j * apply_angular_momentum(field, k)
    raise TypeError("apply_vector_field needs a KahlerFunction or HarmonicField; analyze grids first")


def poisson_bracket(f: KahlerFunction, g: KahlerFunction) -> KahlerFunction:
    """{f, g} = omega(X_f, X_g) = 4 (c_f x c_g) . f on Kahler functions."""
    return KahlerFunction(0.0, 4 * np.cross(f.dipole, g.dipole))


def rotation_matrix(axis: Sequence[float], angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0 or angle == 0:
        return np.eye(3)
    k = axis / n
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)


def hamiltonian_flow(p0: KahlerFunction, H: HamiltonianSpec, t: float) -> KahlerFunction:
    """Rigid rotation generated by H: dipole turned about n by angle 2|n|t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    n = H.axis
    R = rotation_matrix(n, 2 * np.linalg.norm(n) * t)
    return KahlerFunction(p0.c0, R @ p0.dipole)


def project_kahler(field: GridField) -> tuple[KahlerFunction, float]:
    """omega-orthogonal projection onto span{f_0..f_3} and the L2(omega) norm of the remainder."""
    rule = field.rule
    th, ph = rule.mesh()
    f = basis_functions(th, ph)
    w = rule.weights
    c0 = float(np.sum(w * field.values)) / math.pi
    c = [float(np.sum(w * field.values * fk)) / DIPOLE_GRAM for fk in f]
    proj = KahlerFunction(c0, c)
    rest = field.values - proj(th, ph)
    return proj, math.sqrt(max(float(np.sum(w * rest * rest)), 0.0))


def density_from_distribution(
    field: GridField, rule: QuadratureRule | None = None, tol: float = 1e-9
) -> tuple[DensityMatrix, float]:
    """Recover rho from a sampled distribution.

    Raises NotKahler when the rejected (l >= 2) part exceeds ``tol`` and
    UnphysicalState when the reconstruction is not a density matrix.
    """
    if rule is not None and field.values.shape != rule.shape:
        raise InvalidGrid("field does not live on this rule")
    proj, residual = project_kahler(field)
    if residual > tol:
        raise NotKahler(f"field is not Kahler: residual {residual:.3g} > {tol:.3g}")
    if abs(proj.c0 * math.pi - 1.0) > tol:
        raise UnphysicalState(f"distribution has total mass {proj.c0 * math.pi!r}")
    x = math.pi * proj.dipole
    if np.linalg.norm(x) > 1.0 + tol:
        raise UnphysicalState(f"reconstructed Bloch vector has norm {np.linalg.norm(x)!r}")
    return density_from_bloch(x), residual


def density_from_kahler(p: KahlerFunction, tol: float = ALGEBRAIC_TOL) -> DensityMatrix:
    if abs(p.c0 * math.pi - 1.0) > tol:
        raise UnphysicalState(f"distribution has total mass {p.c0 * math.pi!r}")
    x = math.pi * p.dipole
    if np.linalg.norm(x) > 1.0 + tol:
        raise UnphysicalState(f"Bloch vector norm {np.linalg.norm(x)!r} exceeds 1")
    return density_from_bloch(x)


def distribution_from_bloch(x: Sequence[float]) -> KahlerFunction:
    return distribution_from_density(density_from_bloch(x))


__all__ = [
    "SpherePoint",
    "KahlerFunction",
    "basis_functions",
    "kahler_from_operator",
    "operator_from_kahler",
    "expectation",
    "distribution_from_density",
    "distribution_from_bloch",
    "density_from_distribution",
    "density_from_kahler",
    "integrate_sphere",
    "apply_vector_field",
    "poisson_bracket",
    "hamiltonian_flow",
    "rotation_matrix",
    "project_kahler",
]
