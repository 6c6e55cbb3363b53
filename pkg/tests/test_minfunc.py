"""Tests for minimal-function classification and the divergence test."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invariant_kit.errors import SignViolation
from invariant_kit.expr import parse
from invariant_kit.minfunc import MuCandidate, adaptive_simpson, classify, divergence_test
from invariant_kit.models import DeclaredProperties

# x ln|x| extended by 0 at the origin
LOG_RATE_MU = "ifpos(w, -w*ln(w), ifpos(-w, w*ln(-w), 0))"


def make_candidate(mu: str = "3*cbrt(w)^2", **kwargs) -> MuCandidate:
    """Create a classification candidate with defaults."""
    declared = kwargs.pop("declared", {})
    defaults = {
        "mu": parse(mu, ["w"]),
        "declared": DeclaredProperties(**declared),
    }
    defaults.update(kwargs)
    return MuCandidate(**defaults)


class OscillatingMu:
    """w sin(1/w), which changes sign in every neighbourhood of 0."""

    variables = ("w",)

    def eval(self, point):
        w = float(point[0])
        return 0.0 if w == 0 else w * math.sin(1.0 / w)

    def eval_many(self, points):
        w = np.asarray(points, dtype=float).reshape(-1)
        out = np.zeros_like(w)
        nonzero = w != 0
        out[nonzero] = w[nonzero] * np.sin(1.0 / w[nonzero])
        return out


class TestClassify:
    """Tests for the classification cascade."""

    def test_cube_root_rate_is_not_minimal(self):
        verdict = classify(make_candidate("3*cbrt(w)^2"))
        assert verdict.status == "not_minimal"
        assert verdict.evidence["divergence"]["outcome"] == "convergent"

    def test_declared_lipschitz_linear_rate(self):
        verdict = classify(make_candidate("2*w", declared={"locally_lipschitz": True}))
        assert verdict.status == "minimal"
        assert verdict.case == "corollary1"
        assert verdict.confidence == "exact"

    def test_log_rate_is_minimal_by_divergence(self):
        verdict = classify(make_candidate(LOG_RATE_MU))
        assert verdict.status == "minimal"
        assert verdict.case == "4"
        assert verdict.evidence["divergence"]["eps"] == 0.5

    def test_negative_cube_root_rate_is_minimal(self):
        verdict = classify(make_candidate("-cbrt(w)^2"))
        assert verdict.status == "minimal"
        assert verdict.case == "2"

    def test_negative_at_origin(self):
        verdict = classify(make_candidate("w - 1"))
        assert verdict.case == "1"
        assert verdict.confidence == "exact"

    def test_positive_at_origin(self):
        verdict = classify(make_candidate("w^2 + 1"))
        assert verdict.status == "not_minimal"
        assert verdict.confidence == "exact"

    def test_sign_changes_at_every_scale(self):
        verdict = classify(MuCandidate(OscillatingMu()))
        assert verdict.case == "3"
        witnesses = verdict.evidence["witnesses"]
        for witness in witnesses:
            assert -witness["eps"] <= witness["w_positive"] < 0
            assert -witness["eps"] <= witness["w_negative"] < 0

    def test_sign_change_at_one_scale_only(self):
        verdict = classify(make_candidate("ifpos(-w - 0.5, -1, w^2)"))
        assert verdict.status == "inconclusive"

    def test_small_cube_root_rate_is_not_minimal(self):
        verdict = classify(make_candidate("3e-8*cbrt(w)^2"))
        assert verdict.status == "not_minimal"
        assert verdict.evidence["divergence"]["outcome"] == "convergent"

    def test_square_rate_is_minimal_by_divergence(self):
        verdict = classify(make_candidate("w^2"))
        assert verdict.status == "minimal"
        assert verdict.case == "4"
        assert verdict.evidence["divergence"]["outcome"] == "divergent"

    def test_rate_vanishing_near_origin(self):
        verdict = classify(make_candidate("max(-w - 0.5, 0)"))
        assert verdict.case == "2"
        assert verdict.evidence["eps"] == 0.5

    def test_declared_divergence_overrides_quadrature(self):
        verdict = classify(make_candidate("3*cbrt(w)^2", declared={"divergent_integral": True}))
        assert verdict.case == "4"
        assert verdict.evidence["divergence"]["declared"]

    def test_is_deterministic(self):
        cand = make_candidate(LOG_RATE_MU)
        assert classify(cand) == classify(cand)

    @pytest.mark.parametrize("alpha", ["w", "w^3", "w + w^3", "2*w + cbrt(w)"])
    def test_extended_class_k_is_minimal(self, alpha):
        verdict = classify(make_candidate(alpha))
        assert verdict.status == "minimal"
        assert verdict.case == "2"

    @given(st.floats(min_value=1e-6, max_value=1e3), st.floats(min_value=-5.0, max_value=5.0))
    @settings(max_examples=50, deadline=None)
    def test_negative_value_at_origin_always_minimal(self, offset, slope):
        verdict = classify(make_candidate(f"{slope!r}*w - {offset!r}"))
        assert verdict.case == "1"


class TestCandidate:
    """Tests for candidate validation."""

    def test_probe_must_start_below_zero(self):
        with pytest.raises(ValueError):
            make_candidate(probe_interval=(0.5, 0.0))

    def test_probe_must_end_at_zero(self):
        with pytest.raises(ValueError):
            make_candidate(probe_interval=(-1.0, -0.5))

    def test_mu_must_be_univariate(self):
        with pytest.raises(ValueError):
            MuCandidate(parse("t*w", ["t", "w"]))

    def test_probe_width(self):
        assert make_candidate(probe_interval=(-2.0, 0.0)).probe_width == 2.0


class TestDivergence:
    """Tests for the non-integrability test of 1/mu."""

    def test_harmonic_tail_diverges(self):
        result = divergence_test(parse("-w", ["w"]), 1.0)
        assert result.outcome == "divergent"

    def test_cube_root_tail_converges(self):
        result = divergence_test(parse("cbrt(w)^2", ["w"]), 1.0)
        assert result.outcome == "convergent"
        # closed form: integral of w^(-2/3) over [-1, -eta] is 3 - 3 eta^(1/3)
        expected = 3.0 - 3.0 * np.cbrt(np.asarray(result.etas))
        assert np.allclose(result.partial_integrals, expected, atol=1e-8)

    def test_log_rate_partial_integrals(self):
        result = divergence_test(parse(LOG_RATE_MU, ["w"]), 0.5)
        assert result.outcome == "divergent"
        assert len(result.etas) == 40
        for eta, partial in zip(result.etas, result.partial_integrals):
            expected = math.log(abs(math.log(eta))) - math.log(abs(math.log(0.5)))
            assert partial == pytest.approx(expected, abs=1e-6)

    def test_nonpositive_rate_raises(self):
        with pytest.raises(SignViolation):
            divergence_test(parse("w", ["w"]), 0.5)

    def test_rejects_short_sequence(self):
        with pytest.raises(ValueError):
            divergence_test(parse("-w", ["w"]), 1.0, eta_sequence_len=5)


class TestSimpson:
    """Tests for adaptive Simpson quadrature."""

    def test_polynomial(self):
        value, error = adaptive_simpson(lambda x: x**4, 0.0, 1.0)
        assert value == pytest.approx(0.2, abs=1e-10)
        assert error < 1e-9

    def test_exponential(self):
        value, _ = adaptive_simpson(math.exp, 0.0, 1.0, tol=1e-12)
        assert value == pytest.approx(math.e - 1.0, abs=1e-11)

    def test_reversed_limits(self):
        value, _ = adaptive_simpson(math.exp, 1.0, 0.0)
        assert value == pytest.approx(1.0 - math.e, abs=1e-9)

    def test_empty_interval(self):
        assert adaptive_simpson(math.exp, 0.3, 0.3) == (0.0, 0.0)

    def test_peaked_integrand(self):
        value, _ = adaptive_simpson(lambda x: 1.0 / math.sqrt(x), 1e-8, 1.0, tol=1e-10)
        assert value == pytest.approx(2.0 - 2e-4, abs=1e-7)
