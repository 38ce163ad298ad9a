"""Qudit pre/post-selection: weak values, the standard scheme, and an
exact-evolution cross-check.

The principal system is a d-level qudit coupled to the meter through a
Hermitian observable.  Conditioning the meter on a postselection outcome
turns the observable's (generally complex) weak value into an effective
phase-space displacement; the deterministic "standard" scheme prepares and
keeps the eigenstate of largest eigenvalue magnitude instead.  The
first-order weak-value description is an approximation, so this module
also evaluates the coupling exactly (as a finite superposition of
translated wavepackets) to quantify where the linear regime breaks down.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateMax, OverlapZero, UnsupportedAxis
from .phase_space import GaussianMeter, PhaseSpaceShift, QuadratureAxis

__all__ = [
    "QuditState",
    "Observable",
    "SelectionScheme",
    "WeakValue",
    "ExactDistribution",
    "weak_value",
    "postselection_probability",
    "weak_value_shift",
    "standard_scheme",
    "aav_validity",
    "exact_postselected_distribution",
]

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
OVERLAP_TOL = 1e-14
# eigenvalues closer than this are treated as one degenerate level
EIGENVALUE_GROUP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuditState:
    """Pure qudit state given by its complex amplitude vector (unit norm)."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a vector of dimension >= 2")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError(
                f"state must be normalised to 1 within {NORM_TOL}, "
                f"got norm {np.linalg.norm(amps)!r}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "QuditState":
        """Build a state from an unnormalised amplitude vector."""
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise ValueError("cannot normalise the zero vector")
        return cls(amps / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "QuditState") -> complex:
        """Inner product ``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian qudit observable.

    The eigendecomposition is computed once per instance and cached;
    eigenvalues are ordered by decreasing magnitude (ties towards the
    larger signed value) and each eigenvector's global phase is fixed by
    making its largest-magnitude component real and positive, so fixtures
    are reproducible.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
            raise ValueError("matrix must be square with dimension >= 2")
        if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
            raise ValueError(f"matrix must be Hermitian within {HERMITIAN_TOL}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def _eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        vals, vecs = np.linalg.eigh(self.matrix)
        order = sorted(range(vals.size), key=lambda i: (-abs(vals[i]), -vals[i]))
        vals = vals[order].copy()
        vecs = vecs[:, order].copy()
        for j in range(vecs.shape[1]):
            col = vecs[:, j]
            pivot = int(np.argmax(np.abs(col)))
            phase = col[pivot] / abs(col[pivot])
            vecs[:, j] = col / phase
        vals.setflags(write=False)
        vecs.setflags(write=False)
        return vals, vecs

    @property
    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues sorted by decreasing magnitude."""
        return self._eigensystem[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        """Orthonormal eigenvectors as columns, matching ``eigenvalues``."""
        return self._eigensystem[1]

    @property
    def max_eigenvalue(self) -> float:
        """The eigenvalue of greatest magnitude (ties broken towards the
        larger signed value)."""
        return float(self.eigenvalues[0])

    def expectation_squared(self, state: QuditState) -> float:
        """``<state| A^2 |state>`` (real and non-negative for Hermitian A)."""
        v = self.matrix @ state.amplitudes
        return float(np.real(np.vdot(v, v)))


@dataclass(frozen=True, eq=False)
class WeakValue:
    """Weak value in Cartesian and polar form."""

    re: float
    im: float
    magnitude: float
    phase: float

    @classmethod
    def from_complex(cls, value: complex) -> "WeakValue":
        phase = math.atan2(value.imag, value.real)
        if phase <= -math.pi:
            phase += 2.0 * math.pi
        return cls(re=value.real, im=value.imag, magnitude=abs(value), phase=phase)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True, eq=False)
class SelectionScheme:
    """Pre/post-selected qudit coupled to the meter with strength ``g``."""

    pre: QuditState
    post: QuditState
    observable: Observable
    g: float

    def __post_init__(self) -> None:
        d = self.observable.dim
        if self.pre.dim != d or self.post.dim != d:
            raise ValueError(
                f"pre ({self.pre.dim}), post ({self.post.dim}) and observable "
                f"({d}) must share one dimension"
            )


def _overlap(scheme: SelectionScheme) -> complex:
    ovl = scheme.post.overlap(scheme.pre)
    if abs(ovl) < OVERLAP_TOL:
        raise OverlapZero(
            f"|<post|pre>| = {abs(ovl):.3e} < {OVERLAP_TOL}; the weak value "
            "is undefined for (numerically) orthogonal selections"
        )
    return ovl


def weak_value(scheme: SelectionScheme) -> WeakValue:
    """Weak value ``<post|A|pre> / <post|pre>`` of the scheme's observable.

    Raises:
        OverlapZero: if the selection states are numerically orthogonal.
    """
    ovl = _overlap(scheme)
    num = complex(np.vdot(scheme.post.amplitudes, scheme.observable.matrix @ scheme.pre.amplitudes))
    return WeakValue.from_complex(num / ovl)


def postselection_probability(scheme: SelectionScheme) -> float:
    """Success probability ``|<post|pre>|^2`` in the linear regime.

    The exact (all-orders) probability is available from
    ``exact_postselected_distribution``.
    """
    return abs(scheme.post.overlap(scheme.pre)) ** 2


def weak_value_shift(scheme: SelectionScheme, meter: GaussianMeter) -> PhaseSpaceShift:
    """Phase-space displacement of the meter conditioned on postselection.

    The real part of the weak value displaces position by ``g Re(A_w)``, the
    imaginary part displaces momentum by ``g Im(A_w) / (2 sigma^2)``, and the
    Wigner volume drops to the postselection probability.
    """
    wv = weak_value(scheme)
    s2 = meter.sigma * meter.sigma
    return PhaseSpaceShift(
        dx=scheme.g * wv.re,
        dk=scheme.g * wv.im / (2.0 * s2),
        weight=postselection_probability(scheme),
    )


def standard_scheme(observable: Observable, g: float) -> SelectionScheme:
    """Deterministic scheme: pre = post = eigenvector of the largest-magnitude
    eigenvalue, so the meter shifts by ``g * lambda_max`` in position with
    unit probability.

    Issues a ``DegenerateMax`` warning when two eigenvalues tie in magnitude
    with distinct eigenspaces; the tie is broken towards the largest signed
    eigenvalue, which the returned scheme reflects.
    """
    vals = observable.eigenvalues
    if vals.size > 1 and abs(abs(vals[0]) - abs(vals[1])) <= 1e-12 and vals[0] != vals[1]:
        warnings.warn(
            f"eigenvalues {vals[0]:g} and {vals[1]:g} tie in magnitude; "
            f"selecting the larger signed value {vals[0]:g}",
            DegenerateMax,
            stacklevel=2,
        )
    state = QuditState(observable.eigenvectors[:, 0])
    return SelectionScheme(pre=state, post=state, observable=observable, g=g)


def aav_validity(scheme: SelectionScheme, meter: GaussianMeter) -> float:
    """Dimensionless ratio ``g |A_w| / sigma`` controlling the linear regime.

    The first-order weak-value description requires this to be small;
    values near or above 1 put the shift outside its validity ellipse.
    """
    return abs(scheme.g) * weak_value(scheme).magnitude / meter.sigma


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    """Exactly evolved postselected marginal, sampled on a grid.

    ``probability`` is the all-orders success probability (closed form, via
    the Gaussian characteristic function); the sampled ``density``
    integrates to it up to grid truncation.
    """

    points: np.ndarray
    density: np.ndarray
    probability: float


def _grouped_projections(scheme: SelectionScheme) -> tuple[np.ndarray, np.ndarray]:
    """Distinct eigenvalues ``lambda`` and amplitudes ``<post|P_lambda|pre>``."""
    obs = scheme.observable
    vals = obs.eigenvalues
    vecs = obs.eigenvectors
    pre_comp = vecs.conj().T @ scheme.pre.amplitudes
    post_comp = vecs.conj().T @ scheme.post.amplitudes
    per_vector = post_comp.conj() * pre_comp

    lambdas: list[float] = []
    coeffs: list[complex] = []
    for lam, c in zip(vals, per_vector):
        if lambdas and abs(lam - lambdas[-1]) <= EIGENVALUE_GROUP_TOL:
            coeffs[-1] += c
        else:
            lambdas.append(float(lam))
            coeffs.append(complex(c))
    return np.array(lambdas), np.array(coeffs)


def _as_grid(grid) -> np.ndarray:
    if isinstance(grid, tuple) and len(grid) == 3:
        lo, hi, n = grid
        return np.linspace(lo, hi, int(n))
    return np.asarray(grid, dtype=float)


def exact_postselected_distribution(
    scheme: SelectionScheme,
    meter: GaussianMeter,
    axis: QuadratureAxis,
    grid,
) -> ExactDistribution:
    """All-orders postselected marginal on the position or momentum axis.

    The coupling splits the meter into one translated (position) or
    phase-rotated (momentum) copy per distinct eigenvalue, weighted by the
    transition amplitude through that eigenspace; the postselected marginal
    is the squared modulus of their coherent sum.  Serves as the brute-force
    oracle for the linear weak-value model.

    Args:
        grid: sample points, either an array or an ``(lo, hi, n)`` tuple.

    Raises:
        UnsupportedAxis: for any axis other than position (theta = 0) or
            momentum (theta = pi/2).
    """
    points = _as_grid(grid)
    lambdas, coeffs = _grouped_projections(scheme)
    g = scheme.g
    # an axis reduced by an odd multiple of pi measures the negated observable
    eval_pts = axis.sign * points

    if math.isclose(axis.theta, 0.0, abs_tol=1e-12):
        amp = np.zeros(points.size, dtype=complex)
        for lam, c in zip(lambdas, coeffs):
            amp += c * meter.psi(eval_pts - g * lam)
    elif math.isclose(axis.theta, math.pi / 2.0, abs_tol=1e-12):
        phi = meter.phi(eval_pts)
        amp = phi * (coeffs @ np.exp(-1j * g * np.outer(lambdas, eval_pts)))
    else:
        raise UnsupportedAxis(
            f"exact evolution is only available at theta = 0 or pi/2, "
            f"got theta = {axis.theta!r}"
        )

    # success probability from the momentum-space characteristic function:
    # <exp(-i g (lam - lam') k)> over |phi(k)|^2, which has variance 1/(4 sigma^2)
    dl = np.subtract.outer(lambdas, lambdas)
    kernel = np.exp(-(g * dl) ** 2 / (8.0 * meter.sigma**2))
    probability = float(np.real(coeffs @ kernel @ coeffs.conj()))

    return ExactDistribution(points=points, density=np.abs(amp) ** 2, probability=probability)
