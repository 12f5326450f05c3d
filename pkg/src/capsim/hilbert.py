"""Complex unit vectors, unitaries, and seeded Haar sampling.

Every sampler in the package is a pure function of an :class:`RngStream`
value: the same ``(master_seed, stream_id)`` always reproduces the same
draw, on any platform, so parallel callers simply use distinct stream ids.
Batch variants (``*_batch``) take a raw ``numpy.random.Generator`` and
share their transformation code with the scalar operations; they draw
arrays in a fixed, documented order so results never depend on chunking
or scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError

NORM_TOL = 1e-12
ORTHO_TOL = 1e-10
UNITARY_TOL = 1e-10

_MAX_SEED = 2**64


@dataclass(frozen=True, eq=False)
class RngStream:
    """Seeded, replayable randomness source.

    ``generator()`` always starts from the same point, so any operation
    taking an RngStream is deterministic in its inputs. Independent samples
    require distinct ``stream_id`` values (or distinct master seeds).
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not (0 <= int(self.master_seed) < _MAX_SEED):
            raise InvalidParameterError(
                f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}"
            )
        if int(self.stream_id) < 0:
            raise InvalidParameterError(f"stream_id must be >= 0, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        """Fresh PCG64 generator keyed by (master_seed, stream_id)."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(seq)


def derive_seed(master_seed: int, *key: int) -> int:
    """Derive a new 64-bit seed from a master seed and an integer key path.

    Pure and collision-resistant (SeedSequence hashing); used to give
    sub-experiments and per-run shared-randomness streams independent seeds.
    """
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit vector in an N-dimensional complex Hilbert space.

    The amplitude array is normalized to Euclidean norm 1 within 1e-12 and
    stored read-only. Global phase is not quotiented out; every formula in
    the package depends only on squared moduli.
    """

    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.ndim != 1 or amps.size < 1:
            raise InvalidParameterError(
                f"state vector must be a 1-D array with dim >= 1, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidParameterError(
                f"state vector must have unit norm within {NORM_TOL}, got {norm!r}"
            )
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @classmethod
    def basis(cls, dim: int, index: int = 0) -> "StateVector":
        """Computational basis vector e_index."""
        if not 0 <= index < dim:
            raise InvalidParameterError(f"basis index {index} out of range for dim {dim}")
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def normalized(cls, amps: np.ndarray) -> "StateVector":
        """Build a StateVector from an arbitrary nonzero amplitude array."""
        amps = np.asarray(amps, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise InvalidParameterError("cannot normalize the zero vector")
        return cls(amps / norm)


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """N x N unitary operator; U†U = identity within 1e-10 per entry."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidParameterError(f"unitary must be square, got shape {m.shape}")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if dev > UNITARY_TOL:
            raise InvalidParameterError(
                f"matrix is not unitary within {UNITARY_TOL} (max deviation {dev:.3e})"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, state: StateVector) -> StateVector:
        if state.dim != self.dim:
            raise DimensionMismatchError(
                f"unitary dim {self.dim} does not match state dim {state.dim}"
            )
        return StateVector(self.matrix @ state.amps)


def inner(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b> = sum_i conj(a_i) b_i."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"incompatible vectors: dim {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap |<a|b>|^2, in [0, 1] up to double-precision slack."""
    return abs(inner(a, b)) ** 2


def haar_state_batch(dim: int, count: int, generator: np.random.Generator) -> np.ndarray:
    """Draw ``count`` Haar-uniform unit vectors as a (count, dim) array.

    Standard construction: dim independent standard complex Gaussians per
    row, normalized. Draw order: all real parts, then all imaginary parts.
    """
    if dim < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {dim}")
    z = generator.standard_normal((count, dim)) + 1j * generator.standard_normal((count, dim))
    norms = np.linalg.norm(z, axis=1)
    while np.any(norms == 0.0):  # probability zero; redraw defensively
        bad = norms == 0.0
        n_bad = int(bad.sum())
        z[bad] = generator.standard_normal((n_bad, dim)) + 1j * generator.standard_normal(
            (n_bad, dim)
        )
        norms = np.linalg.norm(z, axis=1)
    return z / norms[:, None]


def haar_state(dim: int, rng: RngStream) -> StateVector:
    """Haar-uniform unit vector on the sphere of C^dim."""
    return StateVector(haar_state_batch(dim, 1, rng.generator())[0])


def _haar_unitary_from(dim: int, generator: np.random.Generator) -> np.ndarray:
    """QR of a complex Ginibre matrix with the R-diagonal phase fix.

    Multiplying each column of Q by the phase of the corresponding diagonal
    entry of R makes the factorization unique (positive-real R diagonal),
    which is required for the result to be Haar-distributed.
    """
    z = generator.standard_normal((dim, dim)) + 1j * generator.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    zero = diag == 0.0
    if np.any(zero):  # probability zero
        diag[zero] = 1.0
    return q * (diag / np.abs(diag))


def haar_unitary(dim: int, rng: RngStream) -> UnitaryMatrix:
    """Haar-distributed dim x dim unitary."""
    if dim < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {dim}")
    return UnitaryMatrix(_haar_unitary_from(dim, rng.generator()))


def complement_batch(
    psi_amps: np.ndarray, count: int, generator: np.random.Generator
) -> np.ndarray:
    """Haar-uniform unit vectors in the orthogonal complement of ``psi_amps``.

    Gaussian rows projected off psi and renormalized; returns (count, dim).
    """
    dim = psi_amps.shape[0]
    z = generator.standard_normal((count, dim)) + 1j * generator.standard_normal((count, dim))
    z -= np.outer(z @ psi_amps.conj(), psi_amps)
    norms = np.linalg.norm(z, axis=1)
    while np.any(norms < 1e-150):  # probability zero; redraw defensively
        bad = norms < 1e-150
        n_bad = int(bad.sum())
        fresh = generator.standard_normal((n_bad, dim)) + 1j * generator.standard_normal(
            (n_bad, dim)
        )
        fresh -= np.outer(fresh @ psi_amps.conj(), psi_amps)
        z[bad] = fresh
        norms = np.linalg.norm(z, axis=1)
    return z / norms[:, None]


def orthogonal_complement_sample(psi: StateVector, rng: RngStream) -> StateVector:
    """Haar-uniform unit vector orthogonal to psi (|<result|psi>| <= 1e-10)."""
    if psi.dim < 2:
        raise InvalidParameterError("a 1-dimensional space has no orthogonal complement")
    return StateVector(complement_batch(psi.amps, 1, rng.generator())[0])


def batch_fidelities(states: np.ndarray, phi_amps: np.ndarray) -> np.ndarray:
    """|<phi|x>|^2 for each row x of ``states``."""
    return np.abs(states @ phi_amps.conj()) ** 2
