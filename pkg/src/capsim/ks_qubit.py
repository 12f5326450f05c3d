"""Exact hidden-variable simulation of a single-qubit channel.

Alice draws an ontic qubit state x whose overlap t = |<x|psi>|^2 has density
8(t - 1/2) on [1/2, 1]; Bob answers deterministically by thresholding
|<x|phi>|^2 at 1/2. The round trip reproduces the Born probability
|<phi|psi>|^2 exactly, which makes this model the exactness anchor for the
whole test suite.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DimensionMismatchError
from .hilbert import RngStream, StateVector, batch_fidelities, complement_batch, fidelity

QUBIT_DIM = 2


class QubitOutcome(enum.Enum):
    PHI = "phi"
    PHI_PERP = "phi_perp"


def ks_radial_from_uniform(u):
    """Inverse CDF of the overlap statistic: t = 1/2 + sqrt(u)/2.

    For u uniform on [0, 1) this gives t with density 8(t - 1/2) on
    [1/2, 1], the qubit overlap law induced by the ontic distribution.
    """
    return 0.5 + 0.5 * np.sqrt(u)


def sample_ks_batch(
    psi_amps: np.ndarray, count: int, generator: np.random.Generator
) -> np.ndarray:
    """Draw ``count`` ontic states for a qubit channel as a (count, 2) array.

    Draw order: radial uniforms, phase uniforms, complement Gaussians.
    x = sqrt(t) e^{i alpha} psi + sqrt(1-t) w with w Haar in the complement.
    """
    t = ks_radial_from_uniform(generator.random(count))
    alpha = 2.0 * np.pi * generator.random(count)
    w = complement_batch(psi_amps, count, generator)
    radial = (np.sqrt(t) * np.exp(1j * alpha))[:, None]
    return radial * psi_amps + np.sqrt(1.0 - t)[:, None] * w


def sample_ks_ontic(psi: StateVector, rng: RngStream) -> StateVector:
    """Draw the ontic state Alice sends for qubit state psi."""
    if psi.dim != QUBIT_DIM:
        raise DimensionMismatchError(f"qubit model requires dim 2, got {psi.dim}")
    return StateVector(sample_ks_batch(psi.amps, 1, rng.generator())[0])


def respond_ks(x: StateVector, phi: StateVector) -> QubitOutcome:
    """Bob's deterministic response: PHI iff |<x|phi>|^2 > 1/2.

    The boundary value exactly 1/2 (probability zero) maps to PHI_PERP,
    fixed for determinism.
    """
    if x.dim != QUBIT_DIM or phi.dim != QUBIT_DIM:
        raise DimensionMismatchError("qubit response requires dim-2 vectors")
    return QubitOutcome.PHI if fidelity(x, phi) > 0.5 else QubitOutcome.PHI_PERP


def ks_outcome_batch(states: np.ndarray, phi_amps: np.ndarray) -> np.ndarray:
    """Vectorized respond_ks over rows of ``states``; True means PHI."""
    return batch_fidelities(states, phi_amps) > 0.5
