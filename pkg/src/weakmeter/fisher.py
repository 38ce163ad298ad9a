"""Fisher information about the coupling constant.

For a distribution that responds to the coupling ``g`` only through a rigid
shift ``s -> s - nu g``, the chain rule collapses the Fisher information to
``nu^2`` times the intrinsic information of the shape, which for a Gaussian
is ``1 / sigma_theta^2``.  That single identity carries the whole analysis:
the weak-value scheme trades shift coefficient against axis width, the
quantum Fisher information ``<A^2> / sigma^2`` caps what any measurement
can extract, and the deterministic eigenstate scheme saturates the cap.
A direct quadrature oracle is included so every closed form can be checked
against the defining integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import NumericalUnderflow
from .phase_space import GaussianMeter, QuadratureAxis, quadrature_std
from .selection import (
    Observable,
    QuditState,
    SelectionScheme,
    WeakValue,
    postselection_probability,
    weak_value,
)

__all__ = [
    "FisherReport",
    "fisher_gaussian_shift",
    "weak_value_fisher",
    "quantum_fisher_information",
    "optimal_angle",
    "fisher_numeric",
]


@dataclass(frozen=True, eq=False)
class FisherReport:
    """Per-trial Fisher information budget of one measurement scheme.

    ``fisher_ideal`` is the information of the normalised marginal,
    ``corrected`` multiplies in the postselection probability (information
    per *emitted* trial), ``qfi`` is the quantum bound for the prepared
    states, and ``qfi_standard`` is what the deterministic eigenstate
    scheme achieves.  The chain ``corrected <= qfi <= qfi_standard`` holds
    for every scheme.
    """

    fisher_ideal: float
    corrected: float
    qfi: float
    qfi_standard: float
    shift_coefficient: float
    theta: float
    phi: float
    weak_value: WeakValue
    postselection_probability: float

    def as_dict(self) -> dict:
        """Flat record used by the CLI serialisers."""
        return {
            "fisher_ideal": self.fisher_ideal,
            "corrected": self.corrected,
            "qfi": self.qfi,
            "qfi_standard": self.qfi_standard,
            "shift_coefficient": self.shift_coefficient,
            "theta": self.theta,
            "phi": self.phi,
            "weak_value_re": self.weak_value.re,
            "weak_value_im": self.weak_value.im,
            "postselection_probability": self.postselection_probability,
        }


def fisher_gaussian_shift(nu: float, std: float) -> float:
    """Fisher information ``nu^2 / std^2`` of a shifted Gaussian model."""
    if not std > 0.0:
        raise ValueError(f"std must be positive, got {std!r}")
    return (nu / std) ** 2


def quantum_fisher_information(
    pre: QuditState, observable: Observable, meter: GaussianMeter
) -> float:
    """Quantum Fisher information ``<pre| A^2 |pre> / sigma^2``.

    This is the ceiling over all measurements of the post-interaction pure
    state (the meter enters with zero mean momentum).
    """
    return observable.expectation_squared(pre) / meter.sigma**2


def weak_value_fisher(
    scheme: SelectionScheme, meter: GaussianMeter, axis: QuadratureAxis
) -> FisherReport:
    """Fisher budget of a weak-value scheme read out on a rotated axis.

    The shift coefficient is ``|A_w| (cos(theta) cos(phi)
    + sin(theta) sin(phi) / (2 sigma^2))``: the weak value's polar
    components projected onto the measured quadrature.  Validity of the
    linear regime is the caller's concern (see ``aav_validity``).
    """
    wv = weak_value(scheme)
    prob = postselection_probability(scheme)
    s2 = meter.sigma * meter.sigma
    nu = (
        axis.sign
        * wv.magnitude
        * (
            math.cos(axis.theta) * math.cos(wv.phase)
            + math.sin(axis.theta) * math.sin(wv.phase) / (2.0 * s2)
        )
    )
    fisher_ideal = fisher_gaussian_shift(nu, quadrature_std(meter, axis))
    lam_max = scheme.observable.max_eigenvalue
    return FisherReport(
        fisher_ideal=fisher_ideal,
        corrected=prob * fisher_ideal,
        qfi=quantum_fisher_information(scheme.pre, scheme.observable, meter),
        qfi_standard=lam_max * lam_max / s2,
        shift_coefficient=nu,
        theta=axis.theta,
        phi=wv.phase,
        weak_value=wv,
        postselection_probability=prob,
    )


def optimal_angle(phi: float, meter: GaussianMeter) -> QuadratureAxis:
    """Readout axis maximising the ideal Fisher information for a weak value
    of polar angle ``phi``:  ``tan(theta) = 2 sigma^2 tan(phi)``.

    At the returned axis the ideal information saturates the bound
    ``|A_w|^2 / sigma^2``.  Computed through ``atan2`` so the quadrant
    follows the weak value's (purely imaginary weak values map to the
    momentum axis exactly); the axis constructor reduces the result into
    ``[0, pi)``.
    """
    s2 = meter.sigma * meter.sigma
    return QuadratureAxis(math.atan2(2.0 * s2 * math.sin(phi), math.cos(phi)))


def fisher_numeric(density, nu: float, step: float, grid) -> float:
    """Quadrature evaluation of the Fisher information of a shift family.

    Integrates ``(d_g p)^2 / p`` with ``d_g p = -nu * p'`` and ``p'`` from
    central differences of ``density`` (a vectorised callable).  A floor of
    ``1e-15 * max(p)`` is applied inside the denominator to avoid 0/0 in
    the far tails; the recommended step is ``1e-5 * width / max(|nu|, 1)``.

    Args:
        grid: sample points, either an array or an ``(lo, hi, n)`` tuple.

    Raises:
        NumericalUnderflow: if the density is below 1e-300 everywhere on
            the grid.
    """
    if not step > 0.0:
        raise ValueError(f"step must be positive, got {step!r}")
    if isinstance(grid, tuple) and len(grid) == 3:
        lo, hi, n = grid
        s = np.linspace(lo, hi, int(n))
    else:
        s = np.asarray(grid, dtype=float)
    p = np.asarray(density(s), dtype=float)
    peak = p.max()
    if peak < 1e-300:
        raise NumericalUnderflow(
            "density is below 1e-300 on the whole grid; Fisher integrand underflows"
        )
    dp = -nu * (np.asarray(density(s + step)) - np.asarray(density(s - step))) / (2.0 * step)
    integrand = dp * dp / np.maximum(p, 1e-15 * peak)
    return float(simpson(integrand, x=s))
