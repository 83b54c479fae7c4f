"""Covariance-matrix algebra for one- and two-mode Gaussian states.

Conventions: shot-noise units (vacuum quadrature variance = 1), mode
quadratures ordered (X1, Y1, X2, Y2).  A two-mode covariance matrix is held
as three 2x2 blocks::

    [ A  D ]
    [ D' B ]

Symplectic eigenvalues are the moduli of the eigenvalues of i*Omega*Sigma.
For physical states they are >= 1; covariance data produced by the
amplitude-averaged link model can dip below that bound, so the entropy
kernel is continued smoothly through nu = 1 (see :func:`g_entropy`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TwoModeCovariance",
    "SymplecticSpectrum",
    "g_entropy",
    "symplectic_form",
    "symplectic_spectrum",
    "homodyne_condition",
    "von_neumann_entropy",
]

_LN2 = math.log(2.0)

# eigenvalues this close below 1 are treated as exactly 1 (pure-state
# floating point noise)
_UNIT_CLAMP = 1e-9

_SYM_TOL = 1e-9


def symplectic_form(n_modes: int = 2) -> np.ndarray:
    """Standard symplectic form, direct sum of [[0, 1], [-1, 0]] blocks."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = block
    return out


_OMEGA_2MODE = symplectic_form(2)


def g_entropy(x: float) -> float:
    """Entropy (in bits) of a single mode with symplectic eigenvalue ``x``.

    For x >= 1 this is the thermal-state von Neumann entropy

        ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2)

    with the x -> 1 limit evaluating to exactly 0.  Values within 1e-9
    below 1 are clamped to 1.  Below that the real-analytic continuation
    -H2((1+x)/2) is returned (H2 the binary entropy); it is negative,
    strictly increasing, and joins the physical branch continuously at
    x = 1.  The sub-unit branch is what keeps Holevo bounds finite when
    the amplitude-averaged channel model produces covariance data with
    eigenvalues below the vacuum floor.

    Raises ValueError for negative input (a symplectic eigenvalue is a
    modulus and cannot be negative).
    """
    if not np.isfinite(x):
        raise ValueError(f"symplectic eigenvalue must be finite, got {x!r}")
    if x < -1e-12:
        raise ValueError(f"symplectic eigenvalue must be >= 0, got {x!r}")
    u = (x - 1.0) / 2.0
    if abs(u) <= _UNIT_CLAMP / 2.0:
        return 0.0
    # (1+u)log2(1+u) - u log2|u|; log1p keeps the u -> 0 side stable
    return ((1.0 + u) * math.log1p(u) - u * math.log(abs(u))) / _LN2


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Ordered (descending) symplectic eigenvalues of a two-mode state."""

    values: tuple[float, float]

    def __post_init__(self) -> None:
        v1, v2 = self.values
        if v1 < v2:
            object.__setattr__(self, "values", (v2, v1))

    def entropy_bits(self) -> float:
        return sum(g_entropy(v) for v in self.values)


def _check_block(name: str, m: np.ndarray, symmetric: bool) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ValueError(f"{name} block must be 2x2, got shape {m.shape}")
    if symmetric:
        scale = max(1.0, float(np.max(np.abs(m))))
        if abs(m[0, 1] - m[1, 0]) > _SYM_TOL * scale:
            raise ValueError(f"{name} block must be symmetric")
    return m.copy()


@dataclass(frozen=True)
class TwoModeCovariance:
    """4x4 real covariance matrix stored as 2x2 blocks A, B and coupling D.

    A and B must be symmetric with positive diagonal.  No eigenvalue bound
    is enforced at construction: conditioned matrices from the averaged
    channel model may carry symplectic eigenvalues below 1 and are still
    meaningful inputs to the entropy continuation.
    """

    block_a: np.ndarray
    block_b: np.ndarray
    block_d: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self) -> None:
        a = _check_block("A", self.block_a, symmetric=True)
        b = _check_block("B", self.block_b, symmetric=True)
        d = _check_block("D", self.block_d, symmetric=False)
        if a[0, 0] <= 0 or a[1, 1] <= 0 or b[0, 0] <= 0 or b[1, 1] <= 0:
            raise ValueError("diagonal blocks need positive diagonal entries")
        object.__setattr__(self, "block_a", a)
        object.__setattr__(self, "block_b", b)
        object.__setattr__(self, "block_d", d)

    @classmethod
    def from_matrix(cls, sigma: np.ndarray) -> "TwoModeCovariance":
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {sigma.shape}")
        return cls(sigma[:2, :2], sigma[2:, 2:], sigma[:2, 2:])

    @property
    def matrix(self) -> np.ndarray:
        out = np.zeros((4, 4))
        out[:2, :2] = self.block_a
        out[2:, 2:] = self.block_b
        out[:2, 2:] = self.block_d
        out[2:, :2] = self.block_d.T
        return out

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


def symplectic_spectrum(
    cm: TwoModeCovariance, method: str = "closed_form"
) -> SymplecticSpectrum:
    """Symplectic eigenvalues of a two-mode covariance matrix.

    ``closed_form`` uses nu^2 = (Delta +- sqrt(Delta^2 - 4 det Sigma)) / 2
    with Delta = det A + det B + 2 det D.  ``generic`` takes the moduli of
    the eigenvalues of i*Omega*Sigma; the two routes agree to 1e-9 relative
    on any positive-semidefinite input and serve as oracles for each other.

    Raises ValueError when the discriminant is negative beyond numerical
    noise (the matrix does not describe even a conditioned Gaussian state).
    """
    if method == "generic":
        ev = np.linalg.eigvals(1j * _OMEGA_2MODE @ cm.matrix)
        mods = np.sort(np.abs(ev))[::-1]
        # eigenvalues come in +-nu pairs; average each pair
        return SymplecticSpectrum((float((mods[0] + mods[1]) / 2.0),
                                   float((mods[2] + mods[3]) / 2.0)))
    if method != "closed_form":
        raise ValueError(f"unknown method {method!r}")

    det_a = float(np.linalg.det(cm.block_a))
    det_b = float(np.linalg.det(cm.block_b))
    det_d = float(np.linalg.det(cm.block_d))
    delta = det_a + det_b + 2.0 * det_d
    det_sigma = cm.det()
    disc = delta * delta - 4.0 * det_sigma
    scale = max(1.0, delta * delta)
    if disc < -1e-9 * scale:
        raise ValueError(
            f"non-physical covariance matrix: Delta^2 - 4 det = {disc!r} < 0"
        )
    disc = max(disc, 0.0)
    root = math.sqrt(disc)
    nus = []
    for sign in (+1.0, -1.0):
        nu_sq = (delta + sign * root) / 2.0
        if nu_sq < -1e-9 * max(1.0, abs(delta)):
            raise ValueError(
                f"non-physical covariance matrix: nu^2 = {nu_sq!r} < 0"
            )
        nus.append(math.sqrt(max(nu_sq, 0.0)))
    return SymplecticSpectrum((nus[0], nus[1]))


def homodyne_condition(
    cm: TwoModeCovariance,
    cross_xi: float,
    cross_psi: float,
    measured_var: float,
) -> TwoModeCovariance:
    """Covariance matrix conditioned on an X-quadrature homodyne outcome.

    The measured mode couples to the state through the cross-covariance
    column C = (xi*I2 stacked on psi*Z); conditioning subtracts
    C Pi C^T / V with Pi = diag(1, 0), so only the X row/column entries
    of the blocks change:

        A[0,0] -= xi^2   / V
        D[0,0] -= xi*psi / V
        B[0,0] -= psi^2  / V

    ``measured_var`` must be positive.
    """
    if measured_var <= 0:
        raise ValueError(f"measured variance must be > 0, got {measured_var!r}")
    a = cm.block_a.copy()
    b = cm.block_b.copy()
    d = cm.block_d.copy()
    a[0, 0] -= cross_xi * cross_xi / measured_var
    d[0, 0] -= cross_xi * cross_psi / measured_var
    b[0, 0] -= cross_psi * cross_psi / measured_var
    return TwoModeCovariance(a, b, d)


def von_neumann_entropy(spectrum: SymplecticSpectrum) -> float:
    """Gaussian von Neumann entropy in bits, sum of g over the spectrum."""
    return spectrum.entropy_bits()
