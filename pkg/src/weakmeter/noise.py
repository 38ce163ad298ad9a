"""Detector imperfections as Fisher-efficiency functions.

Each imperfection maps the ideal marginal to a degraded one; its efficiency
``eta`` is the fraction of the ideal Fisher information that survives.
Jitter convolves the marginal with a Gaussian and has the closed form
``(1 + zeta^2 / sigma_theta^2)^-1``.  Pixelation bins the marginal into a
discrete distribution whose Fisher sum is evaluated analytically per bin.
Saturation is a hard ceiling on the arrival probability: all information
survives below the ceiling and none above it.  Efficiencies are always
computed on the normalised distribution; the postselection weight only
enters through the corrected information and the saturation test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.special import erf

from .fisher import weak_value_fisher
from .phase_space import (
    GaussianMeter,
    QuadratureAxis,
    QuadratureDistribution,
    density_at,
    shifted_quadrature,
)
from .selection import SelectionScheme, weak_value_shift

__all__ = [
    "Jitter",
    "Pixelation",
    "Saturation",
    "NoiseModel",
    "eta_jitter",
    "jittered_density",
    "pixel_probabilities",
    "eta_pixel",
    "eta_saturation",
    "efficiency_ratio",
]

# weighted bin probabilities below this are dropped from the Fisher sum
PIXEL_PROB_FLOOR = 1e-15


@dataclass(frozen=True)
class Jitter:
    """Random transverse motion of the detector, RMS ``zeta`` along the
    measured axis."""

    zeta: float

    def __post_init__(self) -> None:
        if not self.zeta > 0.0:
            raise ValueError(f"zeta must be positive, got {self.zeta!r}")


@dataclass(frozen=True)
class Pixelation:
    """Discretisation into pixels of width ``r``.

    ``offset`` displaces the whole pixel grid: boundaries sit at
    ``n*r + offset``, so offset 0 aligns a boundary with the initial
    centroid.
    """

    r: float
    offset: float = 0.0

    def __post_init__(self) -> None:
        if not self.r > 0.0:
            raise ValueError(f"pixel width r must be positive, got {self.r!r}")
        if not 0.0 <= self.offset < self.r:
            raise ValueError(f"offset must lie in [0, r), got {self.offset!r}")


@dataclass(frozen=True)
class Saturation:
    """Hard ceiling ``p_sat`` on the tolerable arrival probability."""

    p_sat: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p_sat <= 1.0:
            raise ValueError(f"p_sat must lie in (0, 1], got {self.p_sat!r}")


NoiseModel = Union[Jitter, Pixelation, Saturation]


def eta_jitter(dist: QuadratureDistribution, zeta: float) -> float:
    """Fisher efficiency ``(1 + zeta^2 / sigma_theta^2)^-1`` under jitter.

    Independent of the distribution's mean and weight: jitter hurts through
    the width alone.
    """
    return 1.0 / (1.0 + (zeta / dist.std) ** 2)


def jittered_density(dist: QuadratureDistribution, zeta: float) -> QuadratureDistribution:
    """Marginal after detector jitter: same mean and weight, variances add."""
    return QuadratureDistribution(
        mean=dist.mean, std=math.hypot(dist.std, zeta), weight=dist.weight
    )


class PixelProbabilities(NamedTuple):
    """Discrete pixel distribution: index array and matching probabilities."""

    indices: np.ndarray
    probs: np.ndarray


def _pixel_edges(dist: QuadratureDistribution, pix: Pixelation, shift: float):
    """Integer pixel range covering the distribution and the edge positions."""
    reach = 10.0 * (dist.std + pix.r)
    n_lo = math.floor((shift - reach - pix.offset) / pix.r)
    n_hi = math.ceil((shift + reach - pix.offset) / pix.r)
    indices = np.arange(n_lo, n_hi + 1)
    edges = np.append(indices, n_hi + 1) * pix.r + pix.offset
    return indices, edges


def pixel_probabilities(
    dist: QuadratureDistribution, pix: Pixelation, shift: float
) -> PixelProbabilities:
    """Probability of landing in each pixel for a Gaussian centred at ``shift``.

    Pixel ``n`` spans ``[n*r + offset, (n+1)*r + offset)``; its probability
    is the difference of error functions at the edges, scaled by the
    distribution's weight.  Pixels further than ten widths out carry
    negligible mass and are not enumerated; bins below 1e-15 are dropped.
    The returned probabilities sum to the weight up to that truncation.
    """
    indices, edges = _pixel_edges(dist, pix, shift)
    z = (edges - shift) / (math.sqrt(2.0) * dist.std)
    cdf = erf(z)
    probs = 0.5 * dist.weight * (cdf[1:] - cdf[:-1])
    keep = probs >= PIXEL_PROB_FLOOR
    return PixelProbabilities(indices=indices[keep], probs=probs[keep])


def eta_pixel(dist: QuadratureDistribution, pix: Pixelation, shift: float) -> float:
    """Fisher efficiency of the pixelated readout, evaluated at ``shift``.

    The discrete information is ``sum_n (d_g Pr_n)^2 / Pr_n`` with the bin
    derivative known analytically: the coupling only translates the
    Gaussian, so ``d_g Pr_n`` is ``nu`` times the density difference across
    the bin edges.  The shift coefficient cancels in the ratio against the
    continuous information ``nu^2 / sigma_theta^2``.
    """
    unit = QuadratureDistribution(mean=shift, std=dist.std, weight=1.0)
    indices, probs = pixel_probabilities(unit, pix, shift)
    lower = indices * pix.r + pix.offset
    upper = lower + pix.r
    boundary_drop = density_at(unit, lower) - density_at(unit, upper)
    discrete = float(np.sum(boundary_drop**2 / probs))
    return discrete * dist.std**2


def eta_saturation(p_arrival: float, p_sat: float) -> float:
    """Step efficiency: 1 while the arrival probability is tolerable
    (including equality), 0 once the detector saturates."""
    if not 0.0 <= p_arrival <= 1.0:
        raise ValueError(f"p_arrival must lie in [0, 1], got {p_arrival!r}")
    if not 0.0 < p_sat <= 1.0:
        raise ValueError(f"p_sat must lie in (0, 1], got {p_sat!r}")
    return 1.0 if p_arrival <= p_sat else 0.0


def _eta_for(dist: QuadratureDistribution, noise: Optional[NoiseModel]) -> float:
    if noise is None:
        return 1.0
    if isinstance(noise, Jitter):
        return eta_jitter(dist, noise.zeta)
    if isinstance(noise, Pixelation):
        return eta_pixel(dist, noise, dist.mean)
    if isinstance(noise, Saturation):
        return eta_saturation(dist.weight, noise.p_sat)
    raise TypeError(f"unknown noise model {noise!r}")


def efficiency_ratio(
    scheme_wv: SelectionScheme,
    meter: GaussianMeter,
    axis: QuadratureAxis,
    noise: Optional[NoiseModel],
    std_noise: Optional[NoiseModel] = None,
) -> float:
    """Noisy corrected information of the weak-value scheme relative to the
    noisy standard scheme for the same observable and coupling.

    ``(eta_wv / eta_std) * (corrected_wv / F_std)``; values above 1 mean the
    weak-value scheme wins under this noise.  By default the same noise
    model applies to both arms (each along its own measured axis); pass
    ``std_noise`` when the standard arm's detector differs, e.g. jitter
    levels that are not the same in position and momentum.  Returns ``inf``
    when only the standard arm saturates.
    """
    report = weak_value_fisher(scheme_wv, meter, axis)
    wv_dist = shifted_quadrature(meter, axis, weak_value_shift(scheme_wv, meter))
    eta_wv = _eta_for(wv_dist, noise)

    lam = scheme_wv.observable.max_eigenvalue
    std_dist = QuadratureDistribution(mean=lam * scheme_wv.g, std=meter.sigma, weight=1.0)
    eta_std = _eta_for(std_dist, noise if std_noise is None else std_noise)

    numerator = eta_wv * report.corrected
    denominator = eta_std * report.qfi_standard
    if denominator == 0.0:
        return math.inf if numerator > 0.0 else math.nan
    return numerator / denominator
