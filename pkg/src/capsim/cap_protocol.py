"""High-dimensional cap-sampling protocol with analytic error and cost.

Alice draws the ontic state x uniformly from the spherical cap
{x : |<x|psi>|^2 >= cos^2(theta_c)}; Bob answers PHI with the clipped
linear probability

    P(phi|x) = clip(|<x|phi>|^2 / cos^2(theta_c) - tan^2(theta_c)/N, 0, 1).

The unclipped (quasi-probability) form reproduces the Born rule exactly in
expectation; clipping introduces a bounded error whose two local maxima
(at phi = psi and phi orthogonal to psi) have closed forms implemented in
:func:`error_report`. The channel psi -> x has finite mutual information,
which :func:`cost_report` converts into communication-cost figures.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError
from .hilbert import RngStream, StateVector, complement_batch, fidelity

LOG2E = math.log2(math.e)

HALF_PI = math.pi / 2.0


class Outcome(enum.Enum):
    PHI = "phi"
    COMPLEMENT = "complement"


def pow_one_minus_inv(n: int) -> float:
    """(1 - 1/n)^n computed as exp(n log1p(-1/n)) to avoid cancellation."""
    return math.exp(n * math.log1p(-1.0 / n))


@dataclass(frozen=True)
class CapParams:
    """Protocol parameters: Hilbert dimension and cap half-angle.

    Derived response coefficients satisfy c1 = 1/cos^2(theta_c) and
    c0 = -tan^2(theta_c)/dim. Admissibility requires tan^2(theta_c) < dim,
    which rules out only protocols with error above 1/e; the degenerate
    whole-sphere limit theta_c == pi/2 is additionally allowed (cos2 = 0,
    tan2 = inf), where sampling and costs stay well defined but the error
    formulas do not apply.
    """

    dim: int
    theta_c: float
    cos2: float = field(init=False)
    sin2: float = field(init=False)
    tan2: float = field(init=False)
    c0: float = field(init=False)
    c1: float = field(init=False)

    def __post_init__(self) -> None:
        if int(self.dim) < 2:
            raise InvalidParameterError(f"cap protocol requires dim >= 2, got {self.dim}")
        if not 0.0 < self.theta_c <= HALF_PI:
            raise InvalidParameterError(
                f"theta_c must lie in (0, pi/2], got {self.theta_c!r}"
            )
        if self.theta_c == HALF_PI:
            cos2, sin2, tan2 = 0.0, 1.0, math.inf
        else:
            cos2 = math.cos(self.theta_c) ** 2
            sin2 = math.sin(self.theta_c) ** 2
            tan2 = sin2 / cos2
            if not tan2 < self.dim:
                raise InvalidParameterError(
                    f"admissibility requires tan^2(theta_c) < dim: "
                    f"tan2={tan2!r} >= dim={self.dim}"
                )
        object.__setattr__(self, "cos2", cos2)
        object.__setattr__(self, "sin2", sin2)
        object.__setattr__(self, "tan2", tan2)
        object.__setattr__(self, "c0", -tan2 / self.dim)
        object.__setattr__(self, "c1", math.inf if cos2 == 0.0 else 1.0 / cos2)

    @classmethod
    def from_delta(cls, dim: int, delta: float) -> "CapParams":
        """Parameters whose worst-case error equals ``delta``."""
        return cls(dim, theta_for_error(dim, delta))

    @property
    def prob_accept(self) -> float:
        """Haar mass of the cap, sin^{2(dim-1)}(theta_c) = 2^{-I}."""
        if self.sin2 >= 1.0:
            return 1.0
        return math.exp((self.dim - 1) * math.log(self.sin2))

    @property
    def density_const(self) -> float:
        """Uniform cap density R0 = 1/prob_accept.

        Recorded for documentation only; sampling never evaluates it (it
        overflows for small caps in high dimension, reported as inf).
        """
        p = self.prob_accept
        try:
            return 1.0 / p
        except ZeroDivisionError:
            return math.inf


def cap_radial_from_uniform(u, dim: int, sin2: float):
    """Inverse conditional CDF of t = |<x|psi>|^2 on the cap.

    Under the Haar measure the survival function of t is (1-t)^(dim-1), so
    conditioning on the cap gives t = 1 - sin^2(theta_c) u^{1/(dim-1)}
    exactly, for u uniform on (0, 1].
    """
    return 1.0 - sin2 * np.asarray(u) ** (1.0 / (dim - 1))


def sample_cap_batch(
    psi_amps: np.ndarray, params: CapParams, count: int, generator: np.random.Generator
) -> np.ndarray:
    """Draw ``count`` cap-uniform states as a (count, dim) array.

    Draw order: radial uniforms, phase uniforms, complement Gaussians.
    x = sqrt(t) e^{i alpha} psi + sqrt(1-t) w; the inverse-CDF radial step
    replaces rejection against the whole sphere, whose acceptance rate
    sin^{2(dim-1)}(theta_c) is astronomically small in high dimension.
    """
    if psi_amps.shape[0] != params.dim:
        raise DimensionMismatchError(
            f"state dim {psi_amps.shape[0]} does not match params dim {params.dim}"
        )
    u = 1.0 - generator.random(count)  # uniform on (0, 1]
    t = cap_radial_from_uniform(u, params.dim, params.sin2)
    alpha = 2.0 * np.pi * generator.random(count)
    w = complement_batch(psi_amps, count, generator)
    radial = (np.sqrt(t) * np.exp(1j * alpha))[:, None]
    return radial * psi_amps + np.sqrt(1.0 - t)[:, None] * w


def sample_cap(psi: StateVector, params: CapParams, rng: RngStream) -> StateVector:
    """Draw the ontic state Alice sends: uniform on the cap around psi."""
    return StateVector(sample_cap_batch(psi.amps, params, 1, rng.generator())[0])


def quasi_prob_from_fidelity(y, params: CapParams):
    """Unclipped response c1*y + c0; may leave [0, 1]. Accepts arrays."""
    if params.cos2 == 0.0:
        raise InvalidParameterError(
            "quasi-probability is undefined at theta_c = pi/2 (cos2 = 0)"
        )
    return params.c1 * np.asarray(y) + params.c0


def response_prob_from_fidelity(y, params: CapParams):
    """Clipped response probability in [0, 1]. Accepts arrays.

    Equals the quasi-probability wherever that lies in [0, 1]; saturates at
    1 above y = cos2 + sin2/dim and at 0 below y = sin2/dim. At the
    degenerate theta_c = pi/2 those thresholds coincide at 1/dim and the
    response collapses to a step.
    """
    y = np.asarray(y)
    if params.cos2 == 0.0:
        return (y > params.sin2 / params.dim).astype(float)
    return np.clip(params.c1 * y + params.c0, 0.0, 1.0)


def exact_quasi_prob(x: StateVector, phi: StateVector, params: CapParams) -> float:
    """Exact quasi-probability |<x|phi>|^2 / cos2 - tan2/dim.

    Averages to the Born probability |<phi|psi>|^2 over cap samples; used
    by tests and as the pre-clipping value of :func:`response_prob`.
    """
    return float(quasi_prob_from_fidelity(fidelity(x, phi), params))


def response_prob(x: StateVector, phi: StateVector, params: CapParams) -> float:
    """Probability that Bob reports PHI given ontic state x."""
    return float(response_prob_from_fidelity(fidelity(x, phi), params))


def respond(x: StateVector, phi: StateVector, params: CapParams, rng: RngStream) -> Outcome:
    """Bernoulli draw with success probability response_prob(x, phi)."""
    p = response_prob(x, phi, params)
    u = rng.generator().random()
    return Outcome.PHI if u < p else Outcome.COMPLEMENT


@dataclass(frozen=True)
class ErrorReport:
    """Worst-case protocol errors: delta == delta1 >= delta2 >= 0."""

    delta1: float  # error at phi = psi
    delta2: float  # error at phi orthogonal to psi
    delta: float  # absolute maximum, equals delta1


def error_report(params: CapParams) -> ErrorReport:
    """Closed-form error maxima of the clipped protocol.

    delta1 = (1/N)(1 - 1/N)^N tan^2(theta_c); delta2 subtracts
    (1/N)(1 - 1/N - cot^2)^N tan^2 when tan^2 > (1 - 1/N)^(-1) (the regime
    where the upper clip can trigger for orthogonal phi) and equals delta1
    otherwise.
    """
    n = params.dim
    tan2 = params.tan2
    if not math.isfinite(tan2) or not tan2 < n:
        raise InvalidParameterError(
            "error formulas require tan^2(theta_c) < dim; "
            f"got tan2={tan2!r} at dim={n}"
        )
    delta1 = pow_one_minus_inv(n) / n * tan2
    threshold = 1.0 / (1.0 - 1.0 / n)
    if tan2 > threshold:
        cot2 = 1.0 / tan2
        delta2 = delta1 - (1.0 - 1.0 / n - cot2) ** n / n * tan2
    else:
        delta2 = delta1
    return ErrorReport(delta1=delta1, delta2=delta2, delta=delta1)


@dataclass(frozen=True)
class CostReport:
    """Communication-cost figures in bits for one cap-protocol channel."""

    mutual_info_bits: float  # I(X; Psi) for uniform inputs
    asym_cost_bits: float  # asymptotic cost per simulation, equals I
    one_shot_upper_bits: float  # I + log2(e), uniform-support one-shot bound


def cost_report(params: CapParams) -> CostReport:
    """Mutual information and communication-cost bounds.

    I(X;Psi) = -2(N-1) log2 sin(theta_c): the log ratio between the volume
    of the unit sphere and the volume of the cap, the two distributions
    being uniform on their supports.
    """
    if params.sin2 <= 0.0:
        raise InvalidParameterError("theta_c = 0 is the infinite-cost (psi-ontic) limit")
    mutual = -(params.dim - 1) * math.log2(params.sin2) + 0.0  # +0.0 kills -0.0
    return CostReport(
        mutual_info_bits=mutual,
        asym_cost_bits=mutual,
        one_shot_upper_bits=mutual + LOG2E,
    )


def one_shot_general_upper_bits(channel_capacity_bits: float) -> float:
    """One-shot bound C + 2 log2(C+1) + 2 log2(e) for general (non-uniform)
    target distributions; reported by cost calculators, not exercised by the
    executable protocol, whose uniform supports admit the tighter C + log2(e)."""
    if channel_capacity_bits < 0.0:
        raise InvalidParameterError("channel capacity must be nonnegative")
    return (
        channel_capacity_bits
        + 2.0 * math.log2(channel_capacity_bits + 1.0)
        + 2.0 * LOG2E
    )


def max_error(dim: int) -> float:
    """Supremum of admissible worst-case errors at this dimension: (1-1/N)^N."""
    if dim < 2:
        raise InvalidParameterError(f"cap protocol requires dim >= 2, got {dim}")
    return pow_one_minus_inv(dim)


def theta_for_error(dim: int, delta: float) -> float:
    """The unique theta_c in (0, pi/2) whose worst-case error is ``delta``.

    Inverts delta = (1/N)(1-1/N)^N tan^2(theta_c); uniqueness holds because
    tan^2 is monotone on (0, pi/2).
    """
    if dim < 2:
        raise InvalidParameterError(f"cap protocol requires dim >= 2, got {dim}")
    sup = max_error(dim)
    if not 0.0 < delta < sup:
        raise InvalidParameterError(
            f"error target must lie in (0, {sup!r}) at dim={dim}, got {delta!r}"
        )
    return math.atan(math.sqrt(dim * delta / pow_one_minus_inv(dim)))


def asym_cost_for_error(dim: int, delta: float) -> float:
    """Asymptotic cost (N-1) log2[1 + (1-1/N)^N / (N delta)] in bits.

    Saturates, as N grows at fixed delta, to a value independent of the
    number of qubits and inversely proportional to delta.
    """
    if dim < 2:
        raise InvalidParameterError(f"cap protocol requires dim >= 2, got {dim}")
    sup = max_error(dim)
    if not 0.0 < delta < sup:
        raise InvalidParameterError(
            f"error target must lie in (0, {sup!r}) at dim={dim}, got {delta!r}"
        )
    return (dim - 1) * math.log2(1.0 + pow_one_minus_inv(dim) / (dim * delta))
