"""Phase-space description of a real Gaussian meter state.

The meter is a single continuous degree of freedom prepared in a real
Gaussian wavepacket of width ``sigma`` (hbar = 1 throughout).  Its Wigner
function is a positive two-dimensional Gaussian, so every rotated
quadrature ``s = x cos(theta) + k sin(theta)`` carries a Gaussian marginal
whose mean and width follow from elementary projections.  Conditioning on
a postselection outcome displaces the Wigner function in phase space and
attenuates its volume, which is all the structure the rest of the package
needs: everything downstream is a weighted, shifted Gaussian on some
rotated axis.

All types are immutable values and all operations are pure functions, so
they are safe to share between concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianMeter",
    "PhaseSpacePoint",
    "PhaseSpaceShift",
    "QuadratureAxis",
    "QuadratureDistribution",
    "wigner_value",
    "wigner_grid",
    "quadrature_std",
    "shifted_quadrature",
    "density_at",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianMeter:
    """Real Gaussian meter state, fully determined by its position width.

    Args:
        sigma: standard deviation of the position marginal.  The momentum
            marginal then has standard deviation ``1 / (2 sigma)`` (the
            state is minimum-uncertainty).
    """

    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"sigma must be a positive real, got {self.sigma!r}")

    @property
    def position_std(self) -> float:
        return self.sigma

    @property
    def momentum_std(self) -> float:
        return 1.0 / (2.0 * self.sigma)

    def psi(self, x):
        """Position wavefunction (real, unit norm, variance ``sigma**2``)."""
        s = self.sigma
        norm = (2.0 * math.pi) ** -0.25 / math.sqrt(s)
        return norm * np.exp(-np.asarray(x, dtype=float) ** 2 / (4.0 * s * s))

    def phi(self, k):
        """Momentum wavefunction (real, unit norm, variance ``1/(4 sigma**2)``)."""
        s = self.sigma
        norm = (2.0 / math.pi) ** 0.25 * math.sqrt(s)
        return norm * np.exp(-np.asarray(k, dtype=float) ** 2 * s * s)


@dataclass(frozen=True)
class PhaseSpacePoint:
    """A point ``(x, k)`` in the meter's phase space."""

    x: float
    k: float


@dataclass(frozen=True)
class PhaseSpaceShift:
    """Displacement of the Wigner function plus a volume attenuation.

    ``weight`` is the surviving Wigner volume: 1 for deterministic schemes,
    the postselection success probability otherwise.
    """

    dx: float = 0.0
    dk: float = 0.0
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight must lie in [0, 1], got {self.weight!r}")


@dataclass(frozen=True)
class QuadratureAxis:
    """Rotated phase-space axis for the observable ``x cos(theta) + k sin(theta)``.

    The angle is stored reduced into ``[0, pi)``.  Reducing by an odd
    multiple of pi negates the observable, which leaves every width
    untouched but flips the sign of any mean; ``sign`` records that flip so
    the distribution of the *originally requested* axis is preserved.
    """

    theta: float
    sign: float = 1.0

    def __post_init__(self) -> None:
        theta = float(self.theta)
        if not math.isfinite(theta):
            raise ValueError(f"theta must be finite, got {self.theta!r}")
        sign = 1.0 if self.sign >= 0 else -1.0
        wraps = math.floor(theta / math.pi)
        if wraps:
            theta -= wraps * math.pi
            if wraps % 2:
                sign = -sign
        # guard the float boundaries after the reduction
        if theta >= math.pi:
            theta -= math.pi
            sign = -sign
        if theta < 0.0:
            theta += math.pi
            sign = -sign
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "sign", sign)


@dataclass(frozen=True)
class QuadratureDistribution:
    """Weighted Gaussian on a rotated quadrature axis.

    Integrates to ``weight`` over the real line; the weight is 1 for
    deterministic schemes and the postselection probability otherwise.
    """

    mean: float
    std: float
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.std > 0.0:
            raise ValueError(f"std must be positive, got {self.std!r}")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight must lie in [0, 1], got {self.weight!r}")


def wigner_value(meter: GaussianMeter, pt: PhaseSpacePoint, shift: PhaseSpaceShift) -> float:
    """Shifted, attenuated Gaussian Wigner function at a single point.

    Returns ``weight * (1/pi) * exp(-2 sigma^2 (k-dk)^2 - (x-dx)^2 / (2 sigma^2))``.
    """
    s2 = meter.sigma * meter.sigma
    dx = pt.x - shift.dx
    dk = pt.k - shift.dk
    return shift.weight / math.pi * math.exp(-2.0 * s2 * dk * dk - dx * dx / (2.0 * s2))


def wigner_grid(meter: GaussianMeter, shift: PhaseSpaceShift, x, k) -> np.ndarray:
    """Wigner function sampled on the outer product of ``x`` and ``k`` grids.

    Returns an array of shape ``(len(x), len(k))`` with ``W[i, j]`` the
    Wigner value at ``(x[i], k[j])``.  Used by the CLI grid export.
    """
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    s2 = meter.sigma * meter.sigma
    gx = np.exp(-((x - shift.dx) ** 2) / (2.0 * s2))
    gk = np.exp(-2.0 * s2 * (k - shift.dk) ** 2)
    return (shift.weight / math.pi) * np.outer(gx, gk)


def quadrature_std(meter: GaussianMeter, axis: QuadratureAxis) -> float:
    """Standard deviation of the marginal along the rotated axis.

    ``sigma_theta^2 = sigma^2 cos^2(theta) + sin^2(theta) / (4 sigma^2)``,
    the quadratic blend of the position and momentum variances.
    """
    c = math.cos(axis.theta)
    s = math.sin(axis.theta)
    s2 = meter.sigma * meter.sigma
    return math.sqrt(s2 * c * c + s * s / (4.0 * s2))


def shifted_quadrature(
    meter: GaussianMeter, axis: QuadratureAxis, shift: PhaseSpaceShift
) -> QuadratureDistribution:
    """Marginal of the shifted Wigner function along the rotated axis.

    The phase-space displacement projects onto the axis, so the marginal is
    the unshifted Gaussian translated by ``dx cos(theta) + dk sin(theta)``
    and carrying the shift's weight.
    """
    mean = axis.sign * (shift.dx * math.cos(axis.theta) + shift.dk * math.sin(axis.theta))
    return QuadratureDistribution(
        mean=mean, std=quadrature_std(meter, axis), weight=shift.weight
    )


def density_at(dist: QuadratureDistribution, s):
    """Weighted Gaussian density of ``dist`` at ``s`` (scalar or array)."""
    s = np.asarray(s, dtype=float)
    z = (s - dist.mean) / dist.std
    out = dist.weight / (dist.std * _SQRT_2PI) * np.exp(-0.5 * z * z)
    return float(out) if out.ndim == 0 else out
