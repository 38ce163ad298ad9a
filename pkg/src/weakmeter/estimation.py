"""Monte Carlo trials and the mean-based estimator of the coupling.

Each emitted system-meter pair survives postselection with the scheme's
success probability; survivors contribute one quadrature sample from the
linear-regime Gaussian model, optionally degraded by detector noise.  The
coupling is estimated as the sample mean divided by the shift coefficient.
Batches are reproducible: every batch owns a generator stream derived from
``(seed, batch index)``, so replicate sweeps are deterministic and
order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import EmptyBatch, NullCoefficient, SaturatedDetector
from .fisher import weak_value_fisher
from .noise import Jitter, NoiseModel, Pixelation, Saturation, eta_jitter, eta_pixel
from .phase_space import GaussianMeter, QuadratureAxis, shifted_quadrature
from .selection import SelectionScheme, postselection_probability, weak_value_shift

__all__ = [
    "TrialBatch",
    "EstimationSummary",
    "batch_seed",
    "run_batch",
    "estimate_g",
    "cramer_rao_check",
]


@dataclass(frozen=True, eq=False)
class TrialBatch:
    """Detected quadrature samples from one batch of emitted pairs."""

    n_emitted: int
    n_detected: int
    samples: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        if self.n_emitted < 1:
            raise ValueError(f"n_emitted must be >= 1, got {self.n_emitted!r}")
        if self.n_detected != len(self.samples) or self.n_detected > self.n_emitted:
            raise ValueError(
                f"n_detected ({self.n_detected}) must equal len(samples) "
                f"({len(self.samples)}) and not exceed n_emitted ({self.n_emitted})"
            )


@dataclass(frozen=True, eq=False)
class EstimationSummary:
    """Replicate statistics of the estimator against the Cramer-Rao bound."""

    g_true: float
    g_hat: float
    bias: float
    empirical_variance: float
    cr_bound: float
    n_emitted: int
    n_detected_mean: float
    replicates: int
    seed: int
    empty_batches: int

    @property
    def ratio(self) -> float:
        """Empirical variance over the Cramer-Rao bound (1 = saturation)."""
        return self.empirical_variance / self.cr_bound

    def as_dict(self) -> dict:
        return {
            "g_true": self.g_true,
            "g_hat_mean": self.g_hat,
            "bias": self.bias,
            "empirical_variance": self.empirical_variance,
            "cr_bound": self.cr_bound,
            "ratio": self.ratio,
            "n_emitted": self.n_emitted,
            "n_detected_mean": self.n_detected_mean,
            "replicates": self.replicates,
            "seed": self.seed,
            "empty_batches": self.empty_batches,
        }


def batch_seed(seed: int, index: int) -> int:
    """Deterministic 64-bit stream seed for batch ``index`` of a run."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def run_batch(
    scheme: SelectionScheme,
    meter: GaussianMeter,
    axis: QuadratureAxis,
    noise: Optional[NoiseModel],
    n_emitted: int,
    seed: int,
) -> TrialBatch:
    """Simulate one batch of emitted pairs and return the detected samples.

    Survival is Bernoulli with the postselection probability; survivors draw
    from the linear-model Gaussian on the measured axis.  Jitter adds an
    independent Gaussian per sample; pixelation snaps each sample to its
    bin centre ``(n + 1/2) r + offset``.

    Raises:
        SaturatedDetector: under a saturation model whose ceiling is below
            the arrival probability (no usable data).
    """
    if n_emitted < 1:
        raise ValueError(f"n_emitted must be >= 1, got {n_emitted!r}")
    prob = postselection_probability(scheme)
    if isinstance(noise, Saturation) and prob > noise.p_sat:
        raise SaturatedDetector(
            f"arrival probability {prob:.6g} exceeds p_sat {noise.p_sat:.6g}"
        )

    rng = np.random.default_rng(seed)
    dist = shifted_quadrature(meter, axis, weak_value_shift(scheme, meter))

    if prob >= 1.0:
        n_detected = n_emitted
    else:
        n_detected = int(rng.binomial(n_emitted, prob))
    samples = rng.normal(dist.mean, dist.std, size=n_detected)
    if isinstance(noise, Jitter):
        samples = samples + rng.normal(0.0, noise.zeta, size=n_detected)
    elif isinstance(noise, Pixelation):
        bins = np.floor((samples - noise.offset) / noise.r)
        samples = (bins + 0.5) * noise.r + noise.offset
    return TrialBatch(n_emitted=n_emitted, n_detected=n_detected, samples=samples, seed=seed)


def estimate_g(batch: TrialBatch, nu: float) -> float:
    """Mean-based estimate: sample mean divided by the shift coefficient.

    Raises:
        NullCoefficient: if ``nu`` is zero.
        EmptyBatch: if no trial survived postselection.
    """
    if nu == 0.0:
        raise NullCoefficient("shift coefficient nu is zero; the mean carries no signal")
    if batch.n_detected == 0:
        raise EmptyBatch("no trials survived postselection in this batch")
    return float(np.mean(batch.samples)) / nu


def _noisy_fisher_per_emission(
    scheme: SelectionScheme,
    meter: GaussianMeter,
    axis: QuadratureAxis,
    noise: Optional[NoiseModel],
) -> float:
    """Corrected, efficiency-scaled Fisher information per emitted pair."""
    report = weak_value_fisher(scheme, meter, axis)
    dist = shifted_quadrature(meter, axis, weak_value_shift(scheme, meter))
    if noise is None:
        eta = 1.0
    elif isinstance(noise, Jitter):
        eta = eta_jitter(dist, noise.zeta)
    elif isinstance(noise, Pixelation):
        eta = eta_pixel(dist, noise, dist.mean)
    elif isinstance(noise, Saturation):
        # run_batch raises before this point when the ceiling is exceeded
        eta = 1.0
    else:
        raise TypeError(f"unknown noise model {noise!r}")
    return eta * report.corrected


def cramer_rao_check(
    scheme: SelectionScheme,
    meter: GaussianMeter,
    axis: QuadratureAxis,
    noise: Optional[NoiseModel],
    g_true: float,
    n_emitted: int,
    replicates: int,
    seed: int,
) -> EstimationSummary:
    """Compare the estimator's replicate variance with the Cramer-Rao bound.

    Runs independent batches at coupling ``g_true`` (the scheme's own ``g``
    is replaced), estimates per batch, and reports the spread across
    replicates next to ``1 / (n_emitted * F)`` with ``F`` the corrected,
    efficiency-scaled information per emission.  Batches that detect
    nothing are dropped and counted.
    """
    if replicates < 100:
        raise ValueError(f"replicates must be >= 100, got {replicates!r}")
    scheme = replace(scheme, g=g_true)

    fisher_per_emission = _noisy_fisher_per_emission(scheme, meter, axis, noise)
    report = weak_value_fisher(scheme, meter, axis)
    nu = report.shift_coefficient

    estimates = []
    detected = []
    empty = 0
    for index in range(replicates):
        batch = run_batch(scheme, meter, axis, noise, n_emitted, batch_seed(seed, index))
        try:
            estimates.append(estimate_g(batch, nu))
        except EmptyBatch:
            empty += 1
            continue
        detected.append(batch.n_detected)

    estimates = np.array(estimates)
    g_hat = float(np.mean(estimates))
    return EstimationSummary(
        g_true=g_true,
        g_hat=g_hat,
        bias=g_hat - g_true,
        empirical_variance=float(np.var(estimates, ddof=1)),
        cr_bound=1.0 / (n_emitted * fisher_per_emission),
        n_emitted=n_emitted,
        n_detected_mean=float(np.mean(detected)) if detected else 0.0,
        replicates=replicates,
        seed=seed,
        empty_batches=empty,
    )
