"""Monte Carlo estimation, statistical reporting, and the experiment suites.

Determinism contract: every result is a pure function of the experiment
configuration and master seed, independent of the worker count. Trials are
grouped into fixed blocks of 8192; block b draws all its randomness from the
substream (seed, b), workers run whole blocks, and partial results are
reduced in block order after all workers finish. Counts are integers, so
the reduction is exact and output files are byte-identical at any
``threads`` setting.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import __version__
from .baselines import (
    JLParams,
    fit_loglog_slope,
    jl_protocol_run,
    jl_scaling,
    ontic_cost,
    quantize,
    random_codebook,
)
from .cap_protocol import (
    CapParams,
    Outcome,
    asym_cost_for_error,
    cost_report,
    error_report,
    max_error,
    one_shot_general_upper_bits,
    response_prob_from_fidelity,
    sample_cap_batch,
)
from .errors import DimensionMismatchError, InvalidParameterError
from .fc_channel import fc_cost_experiment, fc_protocol_shot
from .hilbert import (
    RngStream,
    StateVector,
    batch_fidelities,
    derive_seed,
    fidelity,
    haar_state,
    orthogonal_complement_sample,
)
from .ks_qubit import sample_ks_batch

BLOCK_TRIALS = 8192

MODELS = ("ks-qubit", "cap", "cap-fc", "jl", "ontic")

# spawn-key tags for seed derivation inside sweeps
_TAG_PAIR = 11
_TAG_ROW = 12
_TAG_EST = 13


@dataclass(frozen=True)
class OnticParams:
    """Strong-baseline simulation parameters: shared codebook size."""

    dim: int
    codebook_size: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {self.dim}")
        if self.codebook_size < 1:
            raise InvalidParameterError(
                f"codebook_size must be >= 1, got {self.codebook_size}"
            )


@dataclass(frozen=True)
class EstimateCI:
    """Monte Carlo estimate with a Wilson score confidence interval."""

    mean: float
    ci_low: float
    ci_high: float
    trials: int
    confidence: float = 0.99


def wilson_z(confidence: float) -> float:
    """Two-sided normal quantile for the requested confidence level."""
    if not 0.0 < confidence < 1.0:
        raise InvalidParameterError(f"confidence must lie in (0, 1), got {confidence!r}")
    return float(ndtri(0.5 + confidence / 2.0))


def wilson_interval(successes: int, trials: int, z: float) -> tuple[float, float]:
    """Wilson score interval; correct coverage near probabilities 0 and 1."""
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise InvalidParameterError(
            f"successes must lie in [0, {trials}], got {successes}"
        )
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2.0 * trials)) / denom
    half = (
        z
        / denom
        * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
    )
    # the bounds are exactly 0 (resp. 1) at empty (resp. full) counts
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


def _blocks(trials: int) -> list[tuple[int, int]]:
    """(block_index, block_size) pairs covering ``trials``."""
    return [
        (b, min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS))
        for b in range((trials + BLOCK_TRIALS - 1) // BLOCK_TRIALS)
    ]


def run_blocks(worker, trials: int, threads: int | None = None) -> list:
    """Run ``worker(block_index, count)`` over all blocks; results in block order.

    The thread pool affects scheduling only: each block derives its own
    randomness and the returned list is ordered by block index.
    """
    blocks = _blocks(trials)
    workers = threads if threads is not None else (os.cpu_count() or 1)
    if workers <= 1 or len(blocks) == 1:
        return [worker(b, n) for b, n in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda args: worker(*args), blocks))


def _cap_success_block(psi, phi, params, seed):
    def worker(block: int, count: int) -> int:
        gen = RngStream(seed, block).generator()
        states = sample_cap_batch(psi.amps, params, count, gen)
        probs = response_prob_from_fidelity(batch_fidelities(states, phi.amps), params)
        return int((gen.random(count) < probs).sum())

    return worker


def _ks_success_block(psi, phi, seed):
    def worker(block: int, count: int) -> int:
        gen = RngStream(seed, block).generator()
        states = sample_ks_batch(psi.amps, count, gen)
        return int((batch_fidelities(states, phi.amps) > 0.5).sum())

    return worker


def _capfc_success_block(psi, phi, params, seed):
    def worker(block: int, count: int) -> int:
        hits = 0
        for i in range(count):
            shot_seed = derive_seed(seed, block, i)
            if fc_protocol_shot(psi, phi, params, shot_seed) is Outcome.PHI:
                hits += 1
        return hits

    return worker


def _jl_success_block(psi, phi, params, seed):
    def worker(block: int, count: int) -> int:
        block_seed = derive_seed(seed, block)
        hits = 0
        for i in range(count):
            if jl_protocol_run(psi, phi, params, RngStream(block_seed, i)) is Outcome.PHI:
                hits += 1
        return hits

    return worker


def _ontic_success_block(psi, phi, params, seed):
    codebook = random_codebook(params.dim, params.codebook_size, RngStream(seed, 0))
    estimate = fidelity(codebook.word(quantize(psi, codebook)), phi)
    p = min(1.0, estimate)

    def worker(block: int, count: int) -> int:
        gen = RngStream(seed, block + 1).generator()
        return int((gen.random(count) < p).sum())

    return worker


def count_successes(
    model: str,
    psi: StateVector,
    phi: StateVector,
    params,
    trials: int,
    seed: int,
    threads: int | None = None,
) -> int:
    """Number of PHI outcomes over ``trials`` independent protocol shots."""
    if model not in MODELS:
        raise InvalidParameterError(f"unknown model {model!r}; expected one of {MODELS}")
    if trials < 100:
        raise InvalidParameterError(f"trials must be >= 100, got {trials}")
    if psi.dim != phi.dim:
        raise DimensionMismatchError(f"psi dim {psi.dim} != phi dim {phi.dim}")
    if model == "ks-qubit":
        if psi.dim != 2:
            raise DimensionMismatchError("ks-qubit model requires dim 2")
        worker = _ks_success_block(psi, phi, seed)
    elif model in ("cap", "cap-fc"):
        if not isinstance(params, CapParams):
            raise InvalidParameterError(f"model {model!r} requires CapParams")
        if params.dim != psi.dim:
            raise DimensionMismatchError(
                f"params dim {params.dim} does not match state dim {psi.dim}"
            )
        worker = (
            _cap_success_block(psi, phi, params, seed)
            if model == "cap"
            else _capfc_success_block(psi, phi, params, seed)
        )
    elif model == "jl":
        if not isinstance(params, JLParams):
            raise InvalidParameterError("model 'jl' requires JLParams")
        worker = _jl_success_block(psi, phi, params, seed)
    else:
        if not isinstance(params, OnticParams):
            raise InvalidParameterError("model 'ontic' requires OnticParams")
        worker = _ontic_success_block(psi, phi, params, seed)
    return sum(run_blocks(worker, trials, threads))


def estimate_outcome_prob(
    model: str,
    psi: StateVector,
    phi: StateVector,
    params,
    trials: int,
    seed: int,
    threads: int | None = None,
    confidence: float = 0.99,
) -> EstimateCI:
    """Frequency of the PHI outcome over independent protocol shots.

    Deterministic for a fixed seed and independent of the worker count;
    per-block substreams are derived from the master seed by block index.
    """
    successes = count_successes(model, psi, phi, params, trials, seed, threads)
    low, high = wilson_interval(successes, trials, wilson_z(confidence))
    return EstimateCI(
        mean=successes / trials,
        ci_low=low,
        ci_high=high,
        trials=trials,
        confidence=confidence,
    )


def quasi_prob_moments(
    psi: StateVector,
    phi: StateVector,
    params: CapParams,
    trials: int,
    seed: int,
    threads: int | None = None,
) -> tuple[float, float, float, float]:
    """Sample mean and standard error of |<x|phi>|^2 and of the exact
    quasi-probability over cap samples, as (mean_y, se_y, mean_q, se_q)."""

    def worker(block: int, count: int):
        gen = RngStream(seed, block).generator()
        states = sample_cap_batch(psi.amps, params, count, gen)
        y = batch_fidelities(states, phi.amps)
        return float(y.sum()), float((y * y).sum()), count

    parts = run_blocks(worker, trials, threads)
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    mean_y = total / n
    var_y = max(0.0, total_sq / n - mean_y * mean_y) * n / (n - 1)
    se_y = math.sqrt(var_y / n)
    mean_q = params.c1 * mean_y + params.c0
    se_q = params.c1 * se_y
    return mean_y, se_y, mean_q, se_q


def simulate_pairs(
    model: str,
    dim: int,
    params,
    pairs: int,
    trials: int,
    seed: int,
    threads: int | None = None,
    confidence: float = 0.99,
) -> list[dict]:
    """Estimate outcome probabilities for Haar-random (psi, phi) pairs.

    One row per pair: the Born probability, the Monte Carlo estimate with
    its Wilson interval, and (for cap models) the analytic worst-case error.
    """
    if pairs < 1:
        raise InvalidParameterError(f"pairs must be >= 1, got {pairs}")
    model_delta = None
    if model in ("cap", "cap-fc"):
        try:
            model_delta = error_report(params).delta
        except InvalidParameterError:
            model_delta = None  # degenerate theta_c = pi/2
    rows = []
    for i in range(pairs):
        pair_seed = derive_seed(seed, _TAG_PAIR, i)
        psi = haar_state(dim, RngStream(pair_seed, 0))
        phi = haar_state(dim, RngStream(pair_seed, 1))
        est = estimate_outcome_prob(
            model, psi, phi, params, trials, derive_seed(pair_seed, _TAG_EST), threads,
            confidence,
        )
        rows.append(
            {
                "pair": i,
                "dim": dim,
                "born_prob": fidelity(psi, phi),
                "est_mean": est.mean,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "trials": est.trials,
                "model_delta": model_delta,
            }
        )
    return rows


def error_sweep(
    dims: list[int],
    thetas: list[float],
    trials: int,
    seed: int,
    random_phis: int = 0,
    random_phi_trials: int | None = None,
    threads: int | None = None,
) -> list[dict]:
    """Monte Carlo deviations against the analytic error maxima.

    One row per (dim, theta_c) pair: analytic delta1/delta2, measured
    deviation at phi = psi and at phi orthogonal to psi with a 4-sigma
    Wilson half-width, plus (optionally) the worst deviation over
    ``random_phis`` Haar-random measurement directions. Inadmissible
    combinations (tan^2 >= dim) are flagged invalid, never clamped.
    """
    z4 = 4.0
    rows: list[dict] = []
    if random_phi_trials is None:
        random_phi_trials = trials
    for row_index, (dim, theta) in enumerate(
        (d, t) for d in dims for t in thetas
    ):
        row: dict = {"dim": dim, "theta_c": theta}
        try:
            params = CapParams(dim, theta)
            report = error_report(params)
        except InvalidParameterError:
            row.update(
                valid=False,
                delta1=None,
                delta2=None,
                dev_aligned=None,
                sigma_aligned=None,
                aligned_ok=None,
                dev_perp=None,
                sigma_perp=None,
                perp_ok=None,
                max_random_dev=None,
                random_bound=None,
                random_ok=None,
            )
            rows.append(row)
            continue
        row_seed = derive_seed(seed, _TAG_ROW, row_index)
        psi = haar_state(dim, RngStream(row_seed, 0))
        phi_perp = orthogonal_complement_sample(psi, RngStream(row_seed, 1))

        hits = count_successes(
            "cap", psi, psi, params, trials, derive_seed(row_seed, _TAG_EST, 0), threads
        )
        low, high = wilson_interval(hits, trials, z4)
        dev_aligned = 1.0 - hits / trials
        sigma_aligned = (high - low) / 2.0
        aligned_ok = low <= 1.0 - report.delta1 <= high

        hits_p = count_successes(
            "cap", psi, phi_perp, params, trials, derive_seed(row_seed, _TAG_EST, 1), threads
        )
        low_p, high_p = wilson_interval(hits_p, trials, z4)
        dev_perp = hits_p / trials
        sigma_perp = (high_p - low_p) / 2.0
        perp_ok = low_p <= report.delta2 <= high_p

        max_random_dev = None
        random_bound = None
        random_ok = None
        if random_phis > 0:
            max_excess = -math.inf
            max_dev = 0.0
            for j in range(random_phis):
                phi_j = haar_state(dim, RngStream(row_seed, 16 + j))
                hits_j = count_successes(
                    "cap",
                    psi,
                    phi_j,
                    params,
                    random_phi_trials,
                    derive_seed(row_seed, _TAG_EST, 2 + j),
                    threads,
                )
                lo_j, hi_j = wilson_interval(hits_j, random_phi_trials, z4)
                sigma_j = (hi_j - lo_j) / 2.0
                dev_j = abs(hits_j / random_phi_trials - fidelity(psi, phi_j))
                max_dev = max(max_dev, dev_j)
                max_excess = max(max_excess, dev_j - (report.delta1 + sigma_j))
            max_random_dev = max_dev
            random_bound = report.delta1
            random_ok = max_excess <= 0.0
        row.update(
            valid=True,
            delta1=report.delta1,
            delta2=report.delta2,
            dev_aligned=dev_aligned,
            sigma_aligned=sigma_aligned,
            aligned_ok=aligned_ok,
            dev_perp=dev_perp,
            sigma_perp=sigma_perp,
            perp_ok=perp_ok,
            max_random_dev=max_random_dev,
            random_bound=random_bound,
            random_ok=random_ok,
        )
        rows.append(row)
    return rows


def gap_report(n_max: int, delta: float, alpha: float = 5.0) -> list[dict]:
    """Analytic weak-vs-strong communication costs for n = 1 .. n_max qubits.

    The weak column converges to a delta-only value while the strong column
    doubles per qubit; rows where delta is inadmissible at small dimension
    are flagged rather than computed.
    """
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max}")
    if n_max > 24:
        raise InvalidParameterError(
            f"n_max is capped at 24 qubits (analytic desk scale), got {n_max}"
        )
    rows: list[dict] = []
    prev_weak = None
    for n in range(1, n_max + 1):
        dim = 2**n
        row: dict = {"n": n, "dim": dim}
        if not 0.0 < delta < max_error(dim):
            row.update(
                admissible=False,
                weak_bits=None,
                strong_bits=None,
                ratio=None,
                weak_rel_change=None,
            )
            rows.append(row)
            prev_weak = None
            continue
        weak = asym_cost_for_error(dim, delta)
        strong = ontic_cost(dim, delta, alpha)
        rel = None if prev_weak is None else abs(weak - prev_weak) / prev_weak
        row.update(
            admissible=True,
            weak_bits=weak,
            strong_bits=strong,
            ratio=strong / weak,
            weak_rel_change=rel,
        )
        rows.append(row)
        prev_weak = weak
    return rows


def cost_curve(dim: int, thetas: list[float]) -> list[dict]:
    """Analytic error and cost figures for a list of cap half-angles."""
    rows: list[dict] = []
    for theta in thetas:
        row: dict = {"dim": dim, "theta_c": theta}
        try:
            params = CapParams(dim, theta)
        except InvalidParameterError:
            row.update(
                valid=False,
                tan2=None,
                delta1=None,
                delta2=None,
                mutual_info_bits=None,
                asym_cost_bits=None,
                one_shot_upper_bits=None,
                one_shot_general_upper_bits=None,
            )
            rows.append(row)
            continue
        costs = cost_report(params)
        try:
            report = error_report(params)
            delta1, delta2 = report.delta1, report.delta2
        except InvalidParameterError:
            delta1 = delta2 = None  # degenerate theta_c = pi/2
        row.update(
            valid=True,
            tan2=params.tan2 if math.isfinite(params.tan2) else None,
            delta1=delta1,
            delta2=delta2,
            mutual_info_bits=costs.mutual_info_bits,
            asym_cost_bits=costs.asym_cost_bits,
            one_shot_upper_bits=costs.one_shot_upper_bits,
            one_shot_general_upper_bits=one_shot_general_upper_bits(
                costs.mutual_info_bits
            ),
        )
        rows.append(row)
    return rows


def fc_suite(params: CapParams, trials: int, seed: int) -> list[dict]:
    """CSV-ready wrapper around the finite-communication cost experiment."""
    report = fc_cost_experiment(params, trials, seed, check_bounds=False)
    return [
        {
            "dim": report.dim,
            "theta_c": report.theta_c,
            "trials": report.trials,
            "prob_accept": report.prob_accept,
            "golomb_m": report.golomb_m,
            "mutual_info_bits": report.mutual_info_bits,
            "empirical_entropy_bits": report.empirical_entropy_bits,
            "entropy_upper_bits": report.entropy_upper_bits,
            "mean_code_len_bits": report.mean_code_len_bits,
            "mean_index": report.mean_index,
            "entropy_ok": report.entropy_ok,
            "code_len_ok": report.code_len_ok,
            "chi2_stat": report.chi2_stat,
            "chi2_critical": report.chi2_critical,
            "chi2_pass": report.chi2_pass,
        }
    ]


def jl_suite(
    dim: int,
    subdims: list[int],
    trials: int,
    seed: int,
    pair_fidelity: float = 0.5,
) -> list[dict]:
    """CSV-ready wrapper around the projection-noise scaling measurement."""
    points = jl_scaling(dim, subdims, trials, RngStream(seed, 0), pair_fidelity)
    slope = fit_loglog_slope(points)
    return [
        {
            "dim": dim,
            "subdim": p.subdim,
            "trials": p.trials,
            "rms_error": p.rms_error,
            "rms_se": p.rms_se,
            "fit_slope": slope,
        }
        for p in points
    ]


# ---------------------------------------------------------------------------
# output formatting

def format_value(value) -> str:
    """Fixed CSV field formatting: 12 significant digits, '.' separator."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def render_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(col)) for col in columns])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def render_json(experiment: str, config: dict, columns: list[str], rows: list[dict]) -> str:
    payload = {
        "experiment": experiment,
        "version": __version__,
        "config": {k: _jsonable(v) for k, v in config.items()},
        "results": [
            {col: _jsonable(row.get(col)) for col in columns} for row in rows
        ],
    }
    return json.dumps(payload, indent=2) + "\n"
