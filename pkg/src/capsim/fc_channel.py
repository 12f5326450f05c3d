"""Finite-communication protocol: rejection sampling against shared randomness.

Alice and Bob share an infinite replayable sequence x_1, x_2, ... of
Haar-random states. Because the cap distribution is the uniform marginal
conditioned on the cap, rejection sampling degenerates to first acceptance:
Alice transmits the index k of the first shared state falling inside the
cap around psi, Bob replays the stream to recover x_k and feeds it to the
cap response. The index is geometric with success probability 2^{-I}, so a
Golomb prefix code keeps the measured message length within one bit of the
index entropy, which itself lies between I and I + log2(e).

Wire format (stable, covered by golden-file tests): the Golomb bit string
packed most-significant-bit-first into bytes, preceded by a single header
byte recording how many zero bits pad the final byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .cap_protocol import LOG2E, CapParams, Outcome, cost_report, respond
from .errors import (
    BoundViolationError,
    BudgetExceededError,
    DecodeError,
    DimensionMismatchError,
    InvalidParameterError,
)
from .hilbert import RngStream, StateVector, batch_fidelities, derive_seed, haar_state_batch

STATES_PER_BLOCK = 64
ENCODE_BUDGET = 1 << 20

# Spawn-key tags keeping the shared stream, the per-run input state, and the
# response coin on provably disjoint randomness.
_SHARED_TAG = 0x53484152
_PSI_STREAM = 0
_RESPOND_STREAM = 1
_MAX_ENTROPY_BITS = 16.0


@dataclass(frozen=True)
class SharedRandomness:
    """Replayable stream of Haar-random states shared by Alice and Bob.

    State x_i is a pure function of (master_seed, i): states are generated
    in fixed blocks of 64, each block keyed independently, so both parties
    reconstruct identical sequences and random access stays O(1) blocks.
    """

    master_seed: int
    dim: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {self.dim}")

    def block(self, block_index: int) -> np.ndarray:
        """The 64 states x_{64 b + 1} .. x_{64 b + 64} as a (64, dim) array."""
        if block_index < 0:
            raise InvalidParameterError(f"block index must be >= 0, got {block_index}")
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(_SHARED_TAG, block_index)
        )
        return haar_state_batch(self.dim, STATES_PER_BLOCK, np.random.default_rng(seq))

    def state(self, index: int) -> StateVector:
        """The index-th shared state (1-based)."""
        if index < 1:
            raise InvalidParameterError(f"stream index must be >= 1, got {index}")
        block, offset = divmod(index - 1, STATES_PER_BLOCK)
        return StateVector(self.block(block)[offset])


def golomb_param(prob_accept: float) -> int:
    """Golomb parameter m = max(1, round(-1/log2(1 - p))) for geometric sources."""
    if not 0.0 < prob_accept <= 1.0:
        raise InvalidParameterError(f"prob_accept must lie in (0, 1], got {prob_accept!r}")
    if prob_accept == 1.0:
        return 1
    return max(1, round(-1.0 / math.log2(1.0 - prob_accept)))


def _truncated_binary_bits(m: int) -> tuple[int, int]:
    """(code width c, split point div = 2^c - m) of the truncated binary part."""
    c = max(0, math.ceil(math.log2(m))) if m > 1 else 0
    return c, (1 << c) - m


def golomb_encode(k: int, prob_accept: float) -> str:
    """Encode the 1-based index k: quotient in unary, remainder truncated binary."""
    if k < 1:
        raise InvalidParameterError(f"index must be >= 1, got {k}")
    m = golomb_param(prob_accept)
    q, r = divmod(k - 1, m)
    bits = "1" * q + "0"
    if m > 1:
        c, div = _truncated_binary_bits(m)
        if r < div:
            bits += format(r, "b").zfill(c - 1)
        else:
            bits += format(r + div, "b").zfill(c)
    return bits


def golomb_code_length(k: int, m: int) -> int:
    """Length in bits of the Golomb codeword for index k with parameter m."""
    q, r = divmod(k - 1, m)
    if m == 1:
        return q + 1
    c, div = _truncated_binary_bits(m)
    return q + 1 + (c - 1 if r < div else c)


def golomb_decode(bits: str, prob_accept: float) -> int:
    """Invert golomb_encode; rejects truncated or overlong bit strings."""
    if any(b not in "01" for b in bits):
        raise DecodeError("malformed codeword: non-binary symbol")
    m = golomb_param(prob_accept)
    zero = bits.find("0")
    if zero < 0:
        raise DecodeError("malformed codeword: unary quotient not terminated")
    q = zero
    pos = zero + 1
    if m == 1:
        r = 0
    else:
        c, div = _truncated_binary_bits(m)
        head = bits[pos : pos + c - 1]
        if len(head) != c - 1:
            raise DecodeError("malformed codeword: truncated remainder")
        r = int(head, 2) if head else 0
        pos += c - 1
        if r >= div:
            if pos >= len(bits):
                raise DecodeError("malformed codeword: truncated remainder")
            r = ((r << 1) | int(bits[pos])) - div
            pos += 1
    if pos != len(bits):
        raise DecodeError("malformed codeword: trailing bits after a complete codeword")
    return q * m + r + 1


def pack_bits(bits: str) -> bytes:
    """Pack a bit string MSB-first; header byte records the final-byte padding."""
    if not bits or any(b not in "01" for b in bits):
        raise InvalidParameterError("bit string must be a nonempty sequence of 0/1")
    pad = (-len(bits)) % 8
    padded = bits + "0" * pad
    out = bytearray([pad])
    for i in range(0, len(padded), 8):
        out.append(int(padded[i : i + 8], 2))
    return bytes(out)


def unpack_bits(data: bytes) -> str:
    """Invert pack_bits."""
    if len(data) < 2:
        raise DecodeError("wire message must contain a header byte and payload")
    pad = data[0]
    if pad > 7:
        raise DecodeError(f"invalid pad length {pad} in header")
    bits = "".join(format(byte, "08b") for byte in data[1:])
    if pad and any(b != "0" for b in bits[len(bits) - pad :]):
        raise DecodeError("nonzero padding bits")
    bits = bits[: len(bits) - pad] if pad else bits
    if not bits:
        raise DecodeError("empty payload after removing padding")
    return bits


@dataclass(frozen=True)
class Transcript:
    """What Alice actually sends: the accepted index and its codeword."""

    index: int
    bits: str

    def __post_init__(self) -> None:
        if self.index < 1:
            raise InvalidParameterError(f"index must be >= 1, got {self.index}")

    @property
    def bit_len(self) -> int:
        return len(self.bits)

    def to_bytes(self) -> bytes:
        return pack_bits(self.bits)


def alice_encode(psi: StateVector, params: CapParams, shared: SharedRandomness) -> Transcript:
    """Find and encode the first shared state inside the cap around psi.

    The accepted state is distributed exactly as a direct cap sample, and
    the index is geometric with success probability params.prob_accept.
    Aborts with a budget error after 2^20 candidates; at desk scale
    (I <= ~16 bits) the overflow probability is below 2^-1000.
    """
    if psi.dim != shared.dim or psi.dim != params.dim:
        raise DimensionMismatchError(
            f"dims disagree: psi {psi.dim}, shared {shared.dim}, params {params.dim}"
        )
    threshold = params.cos2
    n_blocks = ENCODE_BUDGET // STATES_PER_BLOCK
    for b in range(n_blocks):
        fids = batch_fidelities(shared.block(b), psi.amps)
        hits = np.nonzero(fids >= threshold)[0]
        if hits.size:
            index = b * STATES_PER_BLOCK + int(hits[0]) + 1
            return Transcript(index=index, bits=golomb_encode(index, params.prob_accept))
    raise BudgetExceededError(
        f"no shared state fell inside the cap within {ENCODE_BUDGET} candidates; "
        "choose parameters with mutual information <= ~16 bits"
    )


def bob_decode(transcript: Transcript, shared: SharedRandomness) -> StateVector:
    """Replay the shared stream and return the state Alice accepted."""
    return shared.state(transcript.index)


def decode_wire(data: bytes, params: CapParams, shared: SharedRandomness) -> StateVector:
    """Full receiving path: unpack bytes, Golomb-decode, replay the stream."""
    index = golomb_decode(unpack_bits(data), params.prob_accept)
    return shared.state(index)


def fc_protocol_shot(
    psi: StateVector, phi: StateVector, params: CapParams, shared_seed: int
) -> Outcome:
    """One end-to-end protocol run against a fresh shared-randomness stream."""
    shared = SharedRandomness(shared_seed, params.dim)
    transcript = alice_encode(psi, params, shared)
    x = bob_decode(transcript, shared)
    return respond(x, phi, params, RngStream(shared_seed, _RESPOND_STREAM))


@dataclass(frozen=True)
class FcCostReport:
    """Measured communication cost of the finite-communication protocol."""

    dim: int
    theta_c: float
    trials: int
    prob_accept: float
    golomb_m: int
    mutual_info_bits: float
    empirical_entropy_bits: float
    entropy_upper_bits: float
    mean_code_len_bits: float
    mean_index: float
    entropy_ok: bool
    code_len_ok: bool
    chi2_stat: float
    chi2_critical: float
    chi2_pass: bool


def index_entropy_bits(counts: np.ndarray) -> float:
    """Plug-in Shannon entropy of an index histogram, in bits."""
    total = counts.sum()
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def geometric_entropy_bits(prob_accept: float) -> float:
    """Closed-form entropy of Geom(p): (-(1-p)log2(1-p) - p log2 p)/p."""
    p = prob_accept
    if not 0.0 < p <= 1.0:
        raise InvalidParameterError(f"prob_accept must lie in (0, 1], got {p!r}")
    if p == 1.0:
        return 0.0
    q = 1.0 - p
    return (-q * math.log2(q) - p * math.log2(p)) / p


def geometric_chi2(indices: np.ndarray, prob_accept: float, significance: float = 0.01):
    """Chi-square goodness of fit of observed indices against Geom(p).

    Bins k = 1, 2, ... are kept while their expected count stays >= 5; the
    remainder (including the infinite tail) is pooled. Returns
    (statistic, critical value, pass flag); degenerate single-bin cases
    (p = 1) pass trivially with statistic 0.
    """
    n = indices.size
    p = prob_accept
    if p >= 1.0:
        return 0.0, 0.0, bool(np.all(indices == 1))
    edges = []
    k = 1
    while True:
        expected = n * p * (1.0 - p) ** (k - 1)
        if expected < 5.0:
            break
        edges.append(k)
        k += 1
    if len(edges) < 2:
        return 0.0, 0.0, True
    observed = np.array([(indices == k).sum() for k in edges], dtype=float)
    expected = np.array([n * p * (1.0 - p) ** (k - 1) for k in edges])
    tail_observed = float(n - observed.sum())
    tail_expected = float(n * (1.0 - p) ** edges[-1])
    observed = np.append(observed, tail_observed)
    expected = np.append(expected, tail_expected)
    stat = float(((observed - expected) ** 2 / expected).sum())
    critical = float(chi2.ppf(1.0 - significance, len(observed) - 1))
    return stat, critical, stat <= critical


def fc_cost_experiment(
    params: CapParams,
    trials: int,
    seed: int,
    eps_stat: float = 0.1,
    check_bounds: bool = True,
) -> FcCostReport:
    """Measure index entropy and code length over independent protocol runs.

    Each run draws a fresh Haar input state and a fresh shared stream, both
    keyed from (seed, run index). Verifies the entropy sandwich
    I <= H(index) <= I + log2(e) + eps_stat and the Golomb redundancy bound
    mean length <= H + 1 + eps_stat, raising BoundViolationError when
    ``check_bounds`` is set.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    mutual = cost_report(params).mutual_info_bits
    if mutual > _MAX_ENTROPY_BITS:
        raise BudgetExceededError(
            f"mutual information {mutual:.2f} bits exceeds the desk-scale "
            f"budget of {_MAX_ENTROPY_BITS} bits"
        )
    m = golomb_param(params.prob_accept)
    indices = np.empty(trials, dtype=np.int64)
    code_lengths = np.empty(trials, dtype=np.int64)
    for run in range(trials):
        shared_seed = derive_seed(seed, run)
        shared = SharedRandomness(shared_seed, params.dim)
        psi = StateVector(
            haar_state_batch(params.dim, 1, RngStream(shared_seed, _PSI_STREAM).generator())[0]
        )
        transcript = alice_encode(psi, params, shared)
        indices[run] = transcript.index
        code_lengths[run] = transcript.bit_len
    counts = np.bincount(indices)
    entropy = index_entropy_bits(counts)
    upper = mutual + LOG2E + eps_stat
    mean_len = float(code_lengths.mean())
    entropy_ok = (mutual - 1e-9) <= entropy <= upper
    code_len_ok = mean_len <= entropy + 1.0 + eps_stat
    stat, critical, chi2_pass = geometric_chi2(indices, params.prob_accept)
    report = FcCostReport(
        dim=params.dim,
        theta_c=params.theta_c,
        trials=trials,
        prob_accept=params.prob_accept,
        golomb_m=m,
        mutual_info_bits=mutual,
        empirical_entropy_bits=entropy,
        entropy_upper_bits=upper,
        mean_code_len_bits=mean_len,
        mean_index=float(indices.mean()),
        entropy_ok=entropy_ok,
        code_len_ok=code_len_ok,
        chi2_stat=stat,
        chi2_critical=critical,
        chi2_pass=chi2_pass,
    )
    if check_bounds and not (entropy_ok and code_len_ok):
        raise BoundViolationError(
            f"communication-cost bounds violated: entropy {entropy:.4f} bits "
            f"(allowed [{mutual:.4f}, {upper:.4f}]), mean code length "
            f"{mean_len:.4f} bits (allowed <= {entropy + 1.0 + eps_stat:.4f})"
        )
    return report
