"""Product quadrature on the Bloch sphere with the symplectic measure.

Nodes are Gauss-Legendre in u = cos(theta) times a uniform periodic grid in
phi. The weights already contain the factor 1/4 of the area form
omega = 1/4 sin(theta) dtheta ^ dphi, so they sum to pi.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import DEFAULT_N_PHI, DEFAULT_N_THETA
from .errors import InvalidGrid

#: omega = OMEGA_FACTOR * (standard area element)
OMEGA_FACTOR = 0.25


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    n_theta: int
    n_phi: int
    u: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    theta_weights: np.ndarray
    phi_weight: float

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.n_phi)

    @property
    def weights(self) -> np.ndarray:
        """omega-weights on the (n_theta, n_phi) grid."""
        return OMEGA_FACTOR * np.outer(self.theta_weights, np.full(self.n_phi, self.phi_weight))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    @property
    def max_degree(self) -> int:
        """Largest l_max this rule can analyse without aliasing."""
        return min(self.n_theta - 1, (self.n_phi - 1) // 2)


@lru_cache(maxsize=32)
def quadrature_rule(n_theta: int = DEFAULT_N_THETA, n_phi: int = DEFAULT_N_PHI) -> QuadratureRule:
    if n_theta < 1 or n_phi < 1:
        raise InvalidGrid("grid sizes must be positive")
    u, w = np.polynomial.legendre.leggauss(n_theta)
    # north pole first
    u, w = u[::-1].copy(), w[::-1].copy()
    theta = np.arccos(u)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    for a in (u, w, theta, phi):
        a.setflags(write=False)
    return QuadratureRule(n_theta, n_phi, u, theta, phi, w, 2 * np.pi / n_phi)


@dataclass(frozen=True, eq=False)
class GridField:
    """Real samples of a function on the nodes of a quadrature rule."""

    values: np.ndarray
    rule: QuadratureRule

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.rule.shape:
            raise InvalidGrid(f"values of shape {v.shape} do not match rule {self.rule.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidGrid("grid values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, func, rule: QuadratureRule) -> "GridField":
        th, ph = rule.mesh()
        return cls(np.broadcast_to(func(th, ph), rule.shape), rule)

    def min(self) -> float:
        return float(self.values.min())


def integrate_grid(field: GridField, rule: QuadratureRule | None = None) -> float:
    rule = field.rule if rule is None else rule
    if field.values.shape != rule.shape:
        raise InvalidGrid("field does not live on this rule")
    return float(np.sum(rule.weights * field.values))
