"""The anisotropically deformed Laplacian D_gamma = 1/4 sum_k gamma_k X_k^2.

In spherical coordinates

    D_gamma = a11 d_tt + a22 d_pp + 2 a12 d_tp + b_t d_t + b_p d_p

with diffusion matrix

    a11 = 4 (g1 sin^2 phi + g2 cos^2 phi)
    a22 = 4 (g1 cot^2 theta cos^2 phi + g2 cot^2 theta sin^2 phi + g3)
    a12 = 2 cot theta sin 2phi (g1 - g2)

and drift b_t = 4 cot theta (g1 cos^2 phi + g2 sin^2 phi),
b_p = sin 2phi (3 + cos 2theta) (g2 - g1) / sin^2 theta.

Since X_k = 4i L_k, the operator is -4 sum_k gamma_k L_k^2 and preserves
every degree-l harmonic subspace. The distribution p_t evolves by
dp/dt = D_gamma p / 4, i.e. by the block generator G_l = -sum_k gamma_k L_k^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import DEFAULT_SCAN, POLE_TOL, SCAN_TOL
from .cp1_geometry import SpherePoint
from .errors import BandLimitExceeded, PoleSingularity
from .harmonics import analyze, angular_momentum, synthesize, synthesize_derivatives
from .pauli_channel import DecoherenceRates
from .quadrature import GridField


@dataclass(frozen=True)
class DiffusionMatrix:
    a11: float
    a12: float
    a22: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def determinant(self) -> float:
        return self.a11 * self.a22 - self.a12**2


@dataclass(frozen=True)
class EllipticityVerdict:
    """Outcome of the ellipticity test.

    ``elliptic`` is the sign test on the rates; ``numeric_elliptic`` comes
    from scanning the symbol. ``witness`` is the scan minimiser and is set
    whenever the numeric scan finds a negative eigenvalue.
    """

    elliptic: bool
    strictly: bool
    numeric_elliptic: bool
    min_eigenvalue: float
    witness: tuple[SpherePoint, float] | None = None

    @property
    def consistent(self) -> bool:
        return self.elliptic == self.numeric_elliptic


def _coefficients(g: np.ndarray, theta, phi):
    g1, g2, g3 = g
    cot = np.cos(theta) / np.sin(theta)
    s2, c2 = np.sin(phi) ** 2, np.cos(phi) ** 2
    a11 = 4 * (g1 * s2 + g2 * c2)
    a22 = 4 * (g1 * cot**2 * c2 + g2 * cot**2 * s2 + g3)
    a12 = 2 * cot * np.sin(2 * phi) * (g1 - g2)
    return a11, a12, a22


def diffusion_matrix(rates: DecoherenceRates, point: SpherePoint) -> DiffusionMatrix:
    if min(point.theta, math.pi - point.theta) < POLE_TOL:
        raise PoleSingularity(f"diffusion matrix is singular in this chart at theta={point.theta}")
    a11, a12, a22 = _coefficients(rates.array, point.theta, point.phi)
    return DiffusionMatrix(float(a11), float(a12), float(a22))


def scan_grid(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    """Pole-free scan points theta = k pi / n_theta (k = 1..n_theta-1), phi = 2 pi j / n_phi.

    With even sizes the grid contains the equator and the axes phi = 0, pi/2
    where the individual rates appear undiluted in the symbol.
    """
    theta = math.pi * np.arange(1, n_theta) / n_theta
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    return np.meshgrid(theta, phi, indexing="ij")


def symbol_min_eigenvalues(rates: DecoherenceRates, theta, phi) -> np.ndarray:
    a11, a12, a22 = _coefficients(rates.array, theta, phi)
    A = np.stack([np.stack([a11, a12], -1), np.stack([a12, a22], -1)], -2)
    return np.linalg.eigvalsh(A)[..., 0]


def is_elliptic(
    rates: DecoherenceRates, scan: tuple[int, int] = DEFAULT_SCAN, tol: float = SCAN_TOL
) -> EllipticityVerdict:
    g = rates.array
    th, ph = scan_grid(*scan)
    lam = symbol_min_eigenvalues(rates, th, ph)
    idx = np.unravel_index(np.argmin(lam), lam.shape)
    lam_min = float(lam[idx])
    numeric = lam_min >= -tol
    witness = None if numeric else (SpherePoint(th[idx], ph[idx]), lam_min)
    return EllipticityVerdict(
        elliptic=bool(np.all(g >= 0)),
        strictly=bool(np.all(g > 0)),
        numeric_elliptic=bool(numeric),
        min_eigenvalue=lam_min,
        witness=witness,
    )


def apply_deformed_laplacian(
    rates: DecoherenceRates, field: GridField, l_max: int | None = None, tol: float = 1e-10
) -> GridField:
    """D_gamma applied to grid samples through their harmonic expansion.

    All five terms of the coordinate expression are evaluated with spectral
    derivatives. Raises BandLimitExceeded when the field is not reproduced by
    its expansion to ``tol`` (relative to its max norm).
    """
    rule = field.rule
    hf = analyze(field, l_max)
    scale = max(1.0, float(np.max(np.abs(field.values))))
    err = float(np.max(np.abs(synthesize(hf, rule).values - field.values)))
    if err > tol * scale:
        raise BandLimitExceeded(f"field not band-limited to l_max={hf.l_max} (error {err:.3g})")
    d = synthesize_derivatives(hf, rule)
    g1, g2, _ = rates.array
    th, ph = rule.mesh()
    a11, a12, a22 = _coefficients(rates.array, th, ph)
    cot = np.cos(th) / np.sin(th)
    b_theta = 4 * cot * (g1 * np.cos(ph) ** 2 + g2 * np.sin(ph) ** 2)
    b_phi = np.sin(2 * ph) * (3 + np.cos(2 * th)) * (g2 - g1) / np.sin(th) ** 2
    out = (
        a11 * d["theta_theta"]
        + a22 * d["phi_phi"]
        + 2 * a12 * d["theta_phi"]
        + b_theta * d["theta"]
        + b_phi * d["phi"]
    )
    return GridField(out, rule)


def generator_harmonic_block(rates: DecoherenceRates, l: int) -> np.ndarray:
    """G_l = -(g1 L1^2 + g2 L2^2 + g3 L3^2) on degree-l harmonics (basis m = -l..l).

    Real symmetric; D_gamma acts on the block as 4 G_l.
    """
    if l < 0:
        raise ValueError("degree must be >= 0")
    G = np.zeros((2 * l + 1, 2 * l + 1))
    for g, Lk in zip(rates.array, angular_momentum(l)):
        G -= g * (Lk @ Lk).real
    return G


def block_growth_rates(rates: DecoherenceRates, l: int) -> np.ndarray:
    """Eigenvalues of G_l (ascending)."""
    return np.linalg.eigvalsh(generator_harmonic_block(rates, l))


def growth_witness(rates: DecoherenceRates, l_max: int) -> tuple[int, float]:
    """Degree (<= l_max) whose block has the largest growth rate, and that rate."""
    best = (0, 0.0)
    for l in range(1, l_max + 1):
        top = float(block_growth_rates(rates, l)[-1])
        if top > best[1]:
            best = (l, top)
    return best
