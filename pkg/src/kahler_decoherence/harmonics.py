"""Complex spherical harmonics: Legendre tables, transforms, angular momentum.

Conventions
-----------
Y_lm(theta, phi) = Pbar_lm(cos theta) exp(i m phi), orthonormal for the
standard measure sin(theta) dtheta dphi, Condon-Shortley phase included, so
that Y_{l,-m} = (-1)^m conj(Y_lm). Coefficients of a band-limited field are
stored in an array ``coeffs[l, m + l_max]`` (entries with |m| > l are zero).

The angular momentum operators L_k = -i (x × grad)_k act on each degree-l
block through the usual ladder matrices in the basis m = -l..l.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BandLimitExceeded, InvalidGrid
from .quadrature import GridField, QuadratureRule


def legendre_table(l_max: int, u) -> np.ndarray:
    """Normalised associated Legendre functions for m >= 0.

    Parameters
    ----------
    l_max : int
        Maximum degree.
    u : array_like
        Points cos(theta) in [-1, 1].

    Returns
    -------
    P : ndarray, shape (l_max+1, l_max+1) + u.shape
        ``P[l, m]`` with ``Y_lm = P[l, m] * exp(i m phi)``; zero for m > l.
    """
    u = np.asarray(u, dtype=float)
    s = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    P = np.zeros((l_max + 1, l_max + 1) + u.shape)
    P[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, l_max + 1):
        P[m, m] = -np.sqrt((2 * m + 1) / (2.0 * m)) * s * P[m - 1, m - 1]
    for m in range(0, l_max):
        P[m + 1, m] = np.sqrt(2 * m + 3.0) * u * P[m, m]
        for l in range(m + 2, l_max + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            P[l, m] = a * (u * P[l - 1, m] - b * P[l - 2, m])
    return P


def _signed_table(P: np.ndarray) -> np.ndarray:
    """Extend ``P[l, m>=0]`` to ``Q[l, m + l_max]`` for all m, with Pbar_{l,-m} = (-1)^m Pbar_lm."""
    L = P.shape[0] - 1
    Q = np.zeros((L + 1, 2 * L + 1) + P.shape[2:])
    for m in range(L + 1):
        Q[:, L + m] = P[:, m]
        Q[:, L - m] = (-1) ** m * P[:, m]
    return Q


def _dtheta_table(Q: np.ndarray, u: np.ndarray) -> np.ndarray:
    """d/dtheta of the signed table (interior points only)."""
    L = Q.shape[0] - 1
    s = np.sqrt(1.0 - u * u)
    if np.any(s == 0):
        raise InvalidGrid("theta-derivatives are not tabulated at the poles")
    dQ = np.zeros_like(Q)
    for l in range(L + 1):
        for m in range(-l, l + 1):
            term = l * u * Q[l, L + m]
            if l > abs(m):
                c = np.sqrt((2 * l + 1.0) * (l - m) * (l + m) / (2 * l - 1.0))
                term = term - c * Q[l - 1, L + m]
            dQ[l, L + m] = term / s
    return dQ


@dataclass(frozen=True, eq=False)
class HarmonicField:
    """Band-limited real function on the sphere as complex Y_lm coefficients."""

    l_max: int
    coeffs: np.ndarray

    def __post_init__(self):
        L = int(self.l_max)
        c = np.array(self.coeffs, dtype=complex)
        if L < 0 or c.shape != (L + 1, 2 * L + 1):
            raise ValueError(f"coefficient array must have shape {(L + 1, 2 * L + 1)}")
        for l in range(L + 1):
            c[l, : L - l] = 0
            c[l, L + l + 1 :] = 0
        c.setflags(write=False)
        object.__setattr__(self, "l_max", L)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, l_max: int) -> "HarmonicField":
        return cls(l_max, np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex))

    @classmethod
    def from_dict(cls, l_max: int, entries: dict) -> "HarmonicField":
        """Build from ``{(l, m): a_lm}``; missing entries are zero."""
        c = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
        for (l, m), v in entries.items():
            if not 0 <= l <= l_max or abs(m) > l:
                raise BandLimitExceeded(f"(l={l}, m={m}) outside l_max={l_max}")
            c[l, l_max + m] = v
        return cls(l_max, c)

    def coefficient(self, l: int, m: int) -> complex:
        return complex(self.coeffs[l, self.l_max + m])

    def block(self, l: int) -> np.ndarray:
        L = self.l_max
        return self.coeffs[l, L - l : L + l + 1]

    def with_coeffs(self, coeffs: np.ndarray) -> "HarmonicField":
        return HarmonicField(self.l_max, coeffs)

    def resized(self, l_max: int) -> "HarmonicField":
        """Zero-pad or truncate to a new band limit."""
        out = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
        k = min(l_max, self.l_max)
        for l in range(k + 1):
            out[l, l_max - l : l_max + l + 1] = self.block(l)
        return HarmonicField(l_max, out)

    def effective_degree(self, tol: float = 0.0) -> int:
        """Highest degree with a coefficient above ``tol`` (-1 for the zero field)."""
        nz = np.nonzero(np.max(np.abs(self.coeffs), axis=1) > tol)[0]
        return int(nz[-1]) if nz.size else -1

    def reality_defect(self) -> float:
        """max |a_{l,-m} - (-1)^m conj(a_lm)|."""
        L = self.l_max
        m = np.arange(-L, L + 1)
        mirrored = ((-1.0) ** np.abs(m)) * np.conj(self.coeffs[:, ::-1])
        return float(np.max(np.abs(self.coeffs - mirrored)))

    def __add__(self, other: "HarmonicField") -> "HarmonicField":
        L = max(self.l_max, other.l_max)
        return HarmonicField(L, self.resized(L).coeffs + other.resized(L).coeffs)

    def __sub__(self, other: "HarmonicField") -> "HarmonicField":
        return self + (-1.0) * other

    def __mul__(self, k: float) -> "HarmonicField":
        return HarmonicField(self.l_max, k * self.coeffs)

    __rmul__ = __mul__


def _check_resolution(l_max: int, rule: QuadratureRule) -> None:
    if rule.n_theta < l_max + 1 or rule.n_phi < 2 * l_max + 1:
        raise BandLimitExceeded(
            f"rule {rule.shape} cannot resolve l_max={l_max}: need n_theta >= {l_max + 1}"
            f" and n_phi >= {2 * l_max + 1}"
        )


@lru_cache(maxsize=64)
def _rule_tables(l_max: int, rule: QuadratureRule):
    Q = _signed_table(legendre_table(l_max, rule.u))
    m = np.arange(-l_max, l_max + 1)
    E = np.exp(1j * np.outer(m, rule.phi))
    return Q, m, E


def analyze(field: GridField, l_max: int | None = None) -> HarmonicField:
    """Forward transform. ``l_max`` defaults to the largest the rule resolves."""
    rule = field.rule
    if l_max is None:
        l_max = rule.max_degree
    _check_resolution(l_max, rule)
    Q, m, _ = _rule_tables(l_max, rule)
    F = np.fft.fft(field.values, axis=1) * rule.phi_weight
    Fm = F[:, m % rule.n_phi]  # (n_theta, 2L+1)
    coeffs = np.einsum("lmk,k,km->lm", Q, rule.theta_weights, Fm)
    return HarmonicField(l_max, coeffs)


def _sum_modes(coeffs: np.ndarray, Q: np.ndarray, E: np.ndarray) -> np.ndarray:
    Fm = np.einsum("lm,lmk->km", coeffs, Q)
    return (Fm @ E).real


def synthesize(hf: HarmonicField, rule: QuadratureRule) -> GridField:
    """Sample a harmonic field on the nodes of ``rule`` (no resolution limit)."""
    Q, _, E = _rule_tables(hf.l_max, rule)
    return GridField(_sum_modes(hf.coeffs, Q, E), rule)


def evaluate(hf: HarmonicField, theta, phi) -> np.ndarray:
    """Evaluate at arbitrary points (broadcast ``theta`` against ``phi``)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    shape = theta.shape
    th, ph = theta.ravel(), phi.ravel()
    L = hf.l_max
    Q = _signed_table(legendre_table(L, np.cos(th)))
    m = np.arange(-L, L + 1)
    phase = np.exp(1j * np.outer(ph, m))  # (K, 2L+1)
    vals = np.einsum("lm,lmk,km->k", hf.coeffs, Q, phase)
    return vals.real.reshape(shape)


def synthesize_derivatives(hf: HarmonicField, rule: QuadratureRule) -> dict[str, np.ndarray]:
    """Field and its partial derivatives up to second order on the grid.

    Derivatives are taken on the harmonic expansion; theta-derivatives use the
    three-term derivative relation and the associated Legendre equation, so no
    stencil ever touches a pole.
    """
    Q, m, E = _rule_tables(hf.l_max, rule)
    dQ = _dtheta_table(Q, rule.u)
    L = hf.l_max
    l = np.arange(L + 1)[:, None, None]
    mm = m[None, :, None]
    sin = np.sqrt(1 - rule.u**2)
    cot = rule.u / sin
    d2Q = -cot * dQ - (l * (l + 1) - mm**2 / sin**2) * Q
    a = hf.coeffs
    im = 1j * m
    return {
        "f": _sum_modes(a, Q, E),
        "theta": _sum_modes(a, dQ, E),
        "phi": _sum_modes(a * im, Q, E),
        "theta_theta": _sum_modes(a, d2Q, E),
        "theta_phi": _sum_modes(a * im, dQ, E),
        "phi_phi": _sum_modes(a * im * im, Q, E),
    }


@lru_cache(maxsize=None)
def angular_momentum(l: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(L1, L2, L3) on degree-l harmonics, basis ordered m = -l..l."""
    m = np.arange(-l, l + 1)
    raise_ = np.zeros((2 * l + 1, 2 * l + 1))
    for i in range(2 * l):
        raise_[i + 1, i] = np.sqrt(l * (l + 1) - m[i] * (m[i] + 1))
    lower = raise_.T
    L1 = (0.5 * (raise_ + lower)).astype(complex)
    L2 = (raise_ - lower) / 2j
    L3 = np.diag(m).astype(complex)
    for a in (L1, L2, L3):
        a.setflags(write=False)
    return L1, L2, L3


@lru_cache(maxsize=None)
def squared_generators(l_max: int) -> np.ndarray:
    """Real matrices L_k^2 for every degree, zero-padded.

    Shape (3, l_max+1, 2 l_max+1, 2 l_max+1); the degree-l block sits at
    rows/columns l_max-l .. l_max+l, matching ``HarmonicField.coeffs``.
    """
    out = np.zeros((3, l_max + 1, 2 * l_max + 1, 2 * l_max + 1))
    for l in range(l_max + 1):
        sl = slice(l_max - l, l_max + l + 1)
        for k, Lk in enumerate(angular_momentum(l)):
            out[k, l, sl, sl] = (Lk @ Lk).real
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def angular_generators(l_max: int) -> np.ndarray:
    """L_1, L_2, L_3 for every degree, zero-padded like :func:`squared_generators`."""
    out = np.zeros((3, l_max + 1, 2 * l_max + 1, 2 * l_max + 1), dtype=complex)
    for l in range(l_max + 1):
        sl = slice(l_max - l, l_max + l + 1)
        for k, Lk in enumerate(angular_momentum(l)):
            out[k, l, sl, sl] = Lk
    out.setflags(write=False)
    return out


def apply_angular_momentum(hf: HarmonicField, k: int) -> HarmonicField:
    """L_k applied blockwise (k in 1..3). The result is complex-valued in general."""
    L = hf.l_max
    out = np.zeros_like(hf.coeffs)
    for l in range(L + 1):
        out[l, L - l : L + l + 1] = angular_momentum(l)[k - 1] @ hf.block(l)
    return HarmonicField(L, out)
