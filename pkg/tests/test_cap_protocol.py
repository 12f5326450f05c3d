"""Tests for the cap-sampling protocol: sampler law, coefficients, error and cost."""

import math

import numpy as np
import pytest
from scipy import integrate

from capsim.cap_protocol import (
    LOG2E,
    CapParams,
    Outcome,
    asym_cost_for_error,
    cap_radial_from_uniform,
    cost_report,
    error_report,
    exact_quasi_prob,
    max_error,
    one_shot_general_upper_bits,
    pow_one_minus_inv,
    quasi_prob_from_fidelity,
    respond,
    response_prob,
    response_prob_from_fidelity,
    sample_cap,
    sample_cap_batch,
    theta_for_error,
)
from capsim.errors import DimensionMismatchError, InvalidParameterError
from capsim.hilbert import (
    RngStream,
    StateVector,
    batch_fidelities,
    fidelity,
    haar_state,
    haar_state_batch,
    orthogonal_complement_sample,
)

HALF_COS2 = math.pi / 4.0  # cos^2 = sin^2 = 1/2

# (dim, tan2) admissible corners used throughout; mirrors the acceptance grid
GRID = [(2, 1.0), (4, 1.0), (8, 2.0), (16, 4.0)]


def params_for_tan2(dim: int, tan2: float) -> CapParams:
    return CapParams(dim, math.atan(math.sqrt(tan2)))


class TestCapParams:
    def test_derived_constants(self):
        p = CapParams(4, HALF_COS2)
        assert p.cos2 == pytest.approx(0.5, rel=1e-12)
        assert p.sin2 == pytest.approx(0.5, rel=1e-12)
        assert p.tan2 == pytest.approx(1.0, rel=1e-12)
        assert p.c0 == -p.tan2 / p.dim
        assert p.c1 * p.cos2 == pytest.approx(1.0, rel=1e-15)

    def test_rejects_bad_angles(self):
        with pytest.raises(InvalidParameterError):
            CapParams(4, 0.0)
        with pytest.raises(InvalidParameterError):
            CapParams(4, math.pi / 2 + 0.01)
        with pytest.raises(InvalidParameterError):
            CapParams(4, -0.3)

    def test_rejects_inadmissible_tan2(self):
        # tan^2 = 4.41 at dim 4 violates tan^2 < dim
        with pytest.raises(InvalidParameterError):
            CapParams(4, math.atan(2.1))

    def test_rejects_dim_below_two(self):
        with pytest.raises(InvalidParameterError):
            CapParams(1, 0.5)

    def test_half_pi_degenerate_params(self):
        p = CapParams(4, math.pi / 2)
        assert p.cos2 == 0.0
        assert p.sin2 == 1.0
        assert p.prob_accept == 1.0
        assert p.density_const == 1.0

    def test_prob_accept_matches_mutual_info(self):
        p = CapParams(4, HALF_COS2)
        assert p.prob_accept == pytest.approx(0.125, rel=1e-12)
        assert p.density_const == pytest.approx(8.0, rel=1e-12)


class TestSampler:
    def test_radial_endpoints(self):
        p = CapParams(4, HALF_COS2)
        assert cap_radial_from_uniform(1.0, p.dim, p.sin2) == pytest.approx(
            p.cos2, rel=1e-12
        )
        assert cap_radial_from_uniform(1e-300, p.dim, p.sin2) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_samples_live_on_cap(self):
        p = CapParams(6, 0.9)
        psi = haar_state(6, RngStream(1, 0))
        for i in range(200):
            x = sample_cap(psi, p, RngStream(1, 10 + i))
            assert fidelity(x, psi) >= p.cos2 - 1e-12

    def test_dimension_mismatch(self):
        p = CapParams(4, HALF_COS2)
        with pytest.raises(DimensionMismatchError):
            sample_cap(haar_state(3, RngStream(0, 0)), p, RngStream(0, 1))

    def test_mean_overlap_against_rejection_oracle(self):
        # E[t] = cos^2 + sin^2/N = 0.625 at N=4, cos^2 = 1/2;
        # oracle: keep Haar states with t >= cos^2 (acceptance 1/8)
        p = CapParams(4, HALF_COS2)
        psi = StateVector.basis(4, 0)
        gen = RngStream(41, 0).generator()
        t = batch_fidelities(sample_cap_batch(psi.amps, p, 100_000, gen), psi.amps)
        assert t.mean() == pytest.approx(0.625, abs=0.002)

        oracle_gen = np.random.default_rng(42)
        kept = []
        while sum(k.size for k in kept) < 100_000:
            states = haar_state_batch(4, 800_000, oracle_gen)
            ts = batch_fidelities(states, psi.amps)
            kept.append(ts[ts >= p.cos2])
        oracle = float(np.concatenate(kept)[:100_000].mean())
        assert oracle == pytest.approx(0.625, abs=0.002)
        assert t.mean() == pytest.approx(oracle, abs=0.003)

    def test_overlap_variance_formula_and_concentration(self):
        # Var(t) = sin^4 (N-1) / ((N+1) N^2), decreasing in N at fixed theta
        theta = 0.6
        prev = None
        for i, dim in enumerate([4, 16, 64, 256]):
            p = CapParams(dim, theta)
            psi = StateVector.basis(dim, 0)
            gen = RngStream(60 + i, 0).generator()
            t = batch_fidelities(sample_cap_batch(psi.amps, p, 100_000, gen), psi.amps)
            var = t.var()
            analytic = p.sin2**2 * (dim - 1) / ((dim + 1) * dim**2)
            assert var == pytest.approx(analytic, rel=0.05)
            if prev is not None:
                assert var < prev
            prev = var

    def test_moment_identity(self):
        # E[|<x|phi>|^2] = cos^2 |<phi|psi>|^2 + sin^2/N for fixed psi, phi
        p = CapParams(8, 1.0)
        psi = haar_state(8, RngStream(71, 0))
        phi = haar_state(8, RngStream(71, 1))
        gen = RngStream(71, 2).generator()
        y = batch_fidelities(sample_cap_batch(psi.amps, p, 200_000, gen), phi.amps)
        expected = p.cos2 * fidelity(psi, phi) + p.sin2 / p.dim
        se = y.std() / math.sqrt(y.size)
        assert abs(y.mean() - expected) <= 4.0 * se


class TestResponse:
    def test_quasi_prob_offset_at_zero(self):
        p = CapParams(4, HALF_COS2)
        assert quasi_prob_from_fidelity(0.0, p) == pytest.approx(-0.25, rel=1e-12)

    def test_quasi_prob_midpoint(self):
        p = CapParams(4, HALF_COS2)
        assert quasi_prob_from_fidelity(0.5, p) == pytest.approx(0.75, rel=1e-12)

    def test_quasi_prob_hits_one_at_upper_threshold(self):
        for dim, tan2 in GRID:
            p = params_for_tan2(dim, tan2)
            upper = p.cos2 + p.sin2 / p.dim
            assert quasi_prob_from_fidelity(upper, p) == pytest.approx(1.0, rel=1e-12)

    def test_response_prob_branches(self):
        p = CapParams(4, HALF_COS2)
        psi = haar_state(4, RngStream(81, 0))
        perp = orthogonal_complement_sample(psi, RngStream(81, 1))
        assert response_prob(psi, psi, p) == 1.0
        assert response_prob(perp, psi, p) == 0.0

    def test_response_equals_quasi_inside_unit_interval(self):
        for dim, tan2 in GRID:
            p = params_for_tan2(dim, tan2)
            y = np.linspace(0.0, 1.0, 2001)
            quasi = quasi_prob_from_fidelity(y, p)
            resp = response_prob_from_fidelity(y, p)
            inside = (quasi >= 0.0) & (quasi <= 1.0)
            assert np.array_equal(resp[inside], quasi[inside])
            assert np.all(resp >= 0.0) and np.all(resp <= 1.0)
            assert np.all(resp[quasi > 1.0] == 1.0)
            assert np.all(resp[quasi < 0.0] == 0.0)

    def test_response_at_half_pi_is_step(self):
        p = CapParams(4, math.pi / 2)
        assert response_prob_from_fidelity(0.3, p) == 1.0
        assert response_prob_from_fidelity(0.2, p) == 0.0
        with pytest.raises(InvalidParameterError):
            quasi_prob_from_fidelity(0.3, p)

    def test_exact_quasi_prob_mean_is_born_probability(self):
        p = CapParams(4, HALF_COS2)
        psi = haar_state(4, RngStream(91, 0))
        phi = haar_state(4, RngStream(91, 1))
        gen = RngStream(91, 2).generator()
        y = batch_fidelities(sample_cap_batch(psi.amps, p, 200_000, gen), phi.amps)
        q = quasi_prob_from_fidelity(y, p)
        se = q.std() / math.sqrt(q.size)
        assert abs(q.mean() - fidelity(psi, phi)) <= 4.0 * se

    def test_respond_bernoulli_frequency(self):
        # response_prob = 0.75 -> frequency 0.75 +- 0.005 over 1e5 draws
        p = CapParams(4, HALF_COS2)
        psi = StateVector.basis(4, 0)
        x = StateVector(np.array([1, 1, 0, 0]) / np.sqrt(2))
        assert response_prob(x, psi, p) == pytest.approx(0.75, rel=1e-12)
        hits = sum(
            respond(x, psi, p, RngStream(7, i)) is Outcome.PHI for i in range(100_000)
        )
        assert hits / 100_000 == pytest.approx(0.75, abs=0.005)

    def test_respond_degenerate_probabilities(self):
        p = CapParams(4, HALF_COS2)
        psi = haar_state(4, RngStream(95, 0))
        perp = orthogonal_complement_sample(psi, RngStream(95, 1))
        assert all(
            respond(psi, psi, p, RngStream(96, i)) is Outcome.PHI for i in range(64)
        )
        assert all(
            respond(perp, psi, p, RngStream(97, i)) is Outcome.COMPLEMENT
            for i in range(64)
        )

    def test_exact_quasi_prob_wrapper(self):
        p = CapParams(4, HALF_COS2)
        psi = StateVector.basis(4, 0)
        x = StateVector(np.array([1, 1, 0, 0]) / np.sqrt(2))
        assert exact_quasi_prob(x, psi, p) == pytest.approx(0.75, rel=1e-12)


def quadrature_delta1(p: CapParams) -> float:
    """Independent oracle: 1 - E[min(quasi(t), 1)] under the cap t-density.

    The conditional density of t on the cap is (N-1)(1-t)^(N-2)/sin^(2(N-1)),
    and at phi = psi the response argument is t itself.
    """
    n = p.dim

    def integrand(t):
        density = (n - 1) * (1.0 - t) ** (n - 2) / p.sin2 ** (n - 1)
        return min(t / p.cos2 - p.tan2 / n, 1.0) * density

    val, _ = integrate.quad(integrand, p.cos2, 1.0, limit=200)
    return 1.0 - val


def quadrature_delta2(p: CapParams) -> float:
    """Independent oracle: E[clip(quasi(y))] for phi orthogonal to psi.

    y = (1-t) s where s = |<phi|w>|^2 follows Beta(1, N-2) on the complement
    (s = 1 identically at N = 2).
    """
    n = p.dim

    def clipped(y):
        return min(max(y / p.cos2 - p.tan2 / n, 0.0), 1.0)

    if n == 2:
        def integrand(t):
            density = 1.0 / p.sin2
            return clipped(1.0 - t) * density

        val, _ = integrate.quad(integrand, p.cos2, 1.0, limit=200)
        return val

    def integrand(s, t):
        t_density = (n - 1) * (1.0 - t) ** (n - 2) / p.sin2 ** (n - 1)
        s_density = (n - 2) * (1.0 - s) ** (n - 3)
        return clipped((1.0 - t) * s) * t_density * s_density

    val, _ = integrate.dblquad(integrand, p.cos2, 1.0, 0.0, 1.0)
    return val


class TestErrorReport:
    def test_frozen_values(self):
        assert error_report(CapParams(2, math.pi / 4)).delta1 == pytest.approx(
            0.125, rel=1e-12
        )
        assert error_report(CapParams(4, HALF_COS2)).delta1 == pytest.approx(
            0.0791015625, rel=1e-12
        )

    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    @pytest.mark.parametrize("dim,tan2", GRID)
    def test_against_quadrature_oracle(self, dim, tan2):
        # the clipped integrand has kinks, so quadpack warns; the values
        # still converge (checked against the closed forms below)
        p = params_for_tan2(dim, tan2)
        report = error_report(p)
        assert report.delta1 == pytest.approx(quadrature_delta1(p), rel=1e-8)
        assert report.delta2 == pytest.approx(quadrature_delta2(p), rel=1e-6)

    def test_delta2_equals_delta1_below_threshold(self):
        # tan^2 <= (1 - 1/N)^(-1) is the regime without upper clipping
        p = params_for_tan2(4, 1.0)
        report = error_report(p)
        assert report.delta2 == report.delta1

    def test_delta_ordering(self):
        for dim, tan2 in GRID:
            report = error_report(params_for_tan2(dim, tan2))
            assert report.delta == report.delta1 >= report.delta2 >= 0.0

    def test_error_vanishes_with_angle(self):
        assert error_report(CapParams(4, 1e-8)).delta1 <= 1e-16

    def test_half_pi_rejected(self):
        with pytest.raises(InvalidParameterError):
            error_report(CapParams(4, math.pi / 2))

    def test_scaled_error_converges_to_inverse_e(self):
        # delta1 * N is increasing in N with limit tan^2/e
        theta = 0.7
        tan2 = math.tan(theta) ** 2
        values = [
            error_report(CapParams(n, theta)).delta1 * n for n in (4, 16, 64, 256, 1024)
        ]
        assert all(a < b for a, b in zip(values, values[1:]))
        assert abs(values[-1] - tan2 / math.e) <= 0.05 * tan2


class TestCostReport:
    def test_one_bit_qubit_point(self):
        report = cost_report(CapParams(2, math.pi / 4))
        assert report.mutual_info_bits == pytest.approx(1.0, rel=1e-12)
        assert report.asym_cost_bits == report.mutual_info_bits
        assert report.one_shot_upper_bits - report.asym_cost_bits == pytest.approx(
            LOG2E, abs=1e-12
        )

    def test_three_bit_point(self):
        report = cost_report(CapParams(4, HALF_COS2))
        assert report.mutual_info_bits == pytest.approx(3.0, rel=1e-12)

    def test_whole_sphere_costs_nothing(self):
        assert cost_report(CapParams(4, math.pi / 2)).mutual_info_bits == 0.0

    def test_general_one_shot_bound(self):
        assert one_shot_general_upper_bits(0.0) == pytest.approx(2 * LOG2E, rel=1e-12)
        assert one_shot_general_upper_bits(3.0) == pytest.approx(
            3.0 + 4.0 + 2 * LOG2E, rel=1e-12
        )


class TestCostForError:
    def test_round_trip_via_error_report(self):
        # delta = 0.125 at N=2 recovers theta = pi/4 and cost 1 bit
        theta = theta_for_error(2, 0.125)
        assert theta == pytest.approx(math.pi / 4, rel=1e-12)
        assert asym_cost_for_error(2, 0.125) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("dim,tan2", GRID)
    def test_inverse_of_error_report(self, dim, tan2):
        p = params_for_tan2(dim, tan2)
        delta = error_report(p).delta1
        assert theta_for_error(dim, delta) == pytest.approx(p.theta_c, rel=1e-12)
        assert asym_cost_for_error(dim, delta) == pytest.approx(
            cost_report(p).asym_cost_bits, rel=1e-12
        )

    def test_cost_at_maximal_error_is_boundary_value(self):
        # at the admissible sup (tan^2 -> dim) the cap has sin^2 = N/(N+1),
        # so the cost tends to (N-1) log2(1 + 1/N), not zero; the zero-cost
        # whole-sphere limit lives at theta_c = pi/2 (see cost_report test)
        dim = 4
        delta = max_error(dim) * (1.0 - 1e-12)
        boundary = (dim - 1) * math.log2(1.0 + 1.0 / dim)
        assert asym_cost_for_error(dim, delta) == pytest.approx(boundary, rel=1e-9)

    def test_rejects_out_of_range_delta(self):
        with pytest.raises(InvalidParameterError):
            asym_cost_for_error(4, 0.0)
        with pytest.raises(InvalidParameterError):
            asym_cost_for_error(4, max_error(4))
        with pytest.raises(InvalidParameterError):
            theta_for_error(4, 2.0)

    def test_high_dimensional_limit(self):
        # cost * delta approaches log2(e)/e as N grows at fixed delta
        val = asym_cost_for_error(2**20, 0.01) * 0.01
        assert val == pytest.approx(LOG2E / math.e, rel=1e-4)

    def test_pow_guard_accuracy(self):
        assert pow_one_minus_inv(4) == pytest.approx(0.31640625, rel=1e-12)
        assert pow_one_minus_inv(2**20) == pytest.approx(1.0 / math.e, rel=1e-5)


class TestFromDelta:
    def test_params_round_trip(self):
        p = CapParams.from_delta(8, 0.05)
        assert error_report(p).delta1 == pytest.approx(0.05, rel=1e-12)
