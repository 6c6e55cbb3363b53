"""Tests for barrier certification, boundary checks, Gamma and stability."""

import numpy as np
import pytest

from invariant_kit.certify import (
    BarrierProblem,
    check_mbf,
    check_tmbf,
    distance_quotient_check,
    gamma_construct,
    nagumo_boundary_check,
    stability_classify,
    tightest_mu,
)
from invariant_kit.errors import DomainError, EmptyBoundary
from invariant_kit.expr import parse, parse_vector
from invariant_kit.minfunc import MuCandidate, classify
from invariant_kit.models import BoxDomain, DeclaredProperties, TimeDomain


def make_problem(**kwargs) -> BarrierProblem:
    """Create a barrier problem from expression sources with defaults."""
    defaults = {
        "f": ["-x1 + x2", "x1 - x2"],
        "h": "x1*x2",
        "mu": "2*w",
        "states": ("x1", "x2"),
        "lo": None,
        "hi": None,
        "grid": None,
        "T": None,
        "declared": {"locally_lipschitz": True},
    }
    defaults.update(kwargs)
    states = tuple(defaults["states"])
    n = len(states)
    lo = defaults["lo"] if defaults["lo"] is not None else [-2.0] * n
    hi = defaults["hi"] if defaults["hi"] is not None else [2.0] * n
    grid = defaults["grid"] if defaults["grid"] is not None else [101] * n
    declared = DeclaredProperties(**defaults["declared"])

    time = None
    variables = states
    if defaults["T"] is not None:
        time = TimeDomain(T=defaults["T"], grid=21)
        variables = states + ("t",)

    mu = defaults["mu"]
    if isinstance(mu, str):
        if "t" in parse(mu, ["t", "w"]).free_variables:
            mu = parse(mu, ["t", "w"])
        else:
            mu = MuCandidate(parse(mu, ["w"]), declared)
    return BarrierProblem(
        f=parse_vector(defaults["f"], variables),
        h=parse(defaults["h"], variables),
        mu=mu,
        domain=BoxDomain(lo=lo, hi=hi, grid=grid),
        time=time,
        declared=declared,
    )


def make_scalar_problem(**kwargs) -> BarrierProblem:
    """Create a one-state problem on [-1, 1]."""
    defaults = {
        "f": ["x"],
        "h": "x",
        "mu": "-w",
        "states": ("x",),
        "lo": [-1.0],
        "hi": [1.0],
        "grid": [201],
        "declared": {},
    }
    defaults.update(kwargs)
    return make_problem(**defaults)


class TestCheckMbf:
    """Tests for the time-invariant barrier check."""

    def test_linear_flow_with_product_barrier(self):
        report = check_mbf(make_problem())
        assert report.verdict == "certified"
        assert report.min_margin >= -1e-9
        assert report.mu_verdict.case == "corollary1"
        assert len(report.margins) == 101 * 101

    def test_cubic_barrier_holds_but_mu_is_not_minimal(self):
        prob = make_scalar_problem(f=["-1"], h="x^3", mu="3*cbrt(w)^2", lo=[-2.0], hi=[2.0], grid=[401])
        report = check_mbf(prob)
        assert report.min_margin >= -1e-9
        assert report.verdict == "mu_not_minimal"
        assert not report.certified

    def test_scaled_cubic_barrier_is_not_certified(self):
        prob = make_scalar_problem(f=["-1e-8"], h="x^3", mu="3e-8*cbrt(w)^2", lo=[-2.0], hi=[2.0], grid=[401])
        report = check_mbf(prob)
        assert report.min_margin >= -1e-9
        assert report.mu_verdict.status == "not_minimal"
        assert report.verdict == "mu_not_minimal"

    def test_unstable_flow_with_decreasing_mu(self):
        prob = make_scalar_problem(lo=[-5.0], hi=[5.0], grid=[101])
        report = check_mbf(prob)
        assert report.verdict == "certified"
        assert report.mu_verdict.case == "4"

    def test_class_k_rate_is_violated(self):
        prob = make_scalar_problem(mu="w", lo=[-5.0], hi=[5.0], grid=[101])
        report = check_mbf(prob)
        assert report.verdict == "violated"
        assert report.witness["x"][0] < 0
        assert report.witness["margin"] < 0

    def test_inequality_on_safe_set_only(self):
        prob = make_scalar_problem(f=["-1"], h="x^3", mu="3*cbrt(w)*abs(cbrt(w))", lo=[-2.0], hi=[2.0])
        report = check_mbf(prob)
        assert report.verdict == "violated"
        assert report.holds_only_on_S
        assert report.min_margin_on_S >= -1e-9
        assert any("whole domain" in warning for warning in report.warnings)

    def test_empty_safe_set_warns(self):
        prob = make_scalar_problem(h="-1 - x^2", mu="-w")
        report = check_mbf(prob)
        assert report.empty_S
        assert report.min_margin_on_S is None

    def test_kinks_are_counted(self):
        prob = make_scalar_problem(f=["-x"], h="-abs(x) + 0.5", mu="-w")
        report = check_mbf(prob)
        assert report.nondifferentiable_points == 1

    def test_refined_grid_never_raises_min_margin(self):
        for source in ("w", "3*cbrt(w)*abs(cbrt(w))"):
            coarse = make_scalar_problem(f=["-1"], h="x^3", mu=source, grid=[21])
            fine = make_scalar_problem(f=["-1"], h="x^3", mu=source, grid=[41])
            assert fine.domain.grid == coarse.domain.refined().grid
            assert check_mbf(fine).min_margin <= check_mbf(coarse).min_margin

    def test_samples_table(self):
        report = check_mbf(make_scalar_problem(grid=[5]))
        header, rows = report.samples_table()
        assert header == ["x", "h", "Lfh", "margin"]
        assert rows.shape == (5, 4)

    def test_rejects_time_varying_problem(self):
        prob = make_scalar_problem(f=["x*t"], mu="-w*t", T=2.0, declared={"locally_lipschitz": True})
        with pytest.raises(ValueError):
            check_mbf(prob)


class TestCheckTmbf:
    """Tests for the time-varying barrier check."""

    def test_time_scaled_rate(self):
        prob = make_scalar_problem(
            f=["x*t"], mu="-w*t", lo=[-3.0], hi=[3.0], grid=[61], T=2.0,
            declared={"locally_lipschitz": True},
        )
        report = check_tmbf(prob)
        assert report.verdict == "certified"
        assert len(report.margins) == 61 * 21

    def test_time_invariant_rate_is_violated(self):
        prob = make_scalar_problem(f=["x*t"], mu="-w", lo=[-3.0], hi=[3.0], grid=[61], T=2.0)
        report = check_tmbf(prob)
        assert report.verdict == "violated"
        assert report.witness["x"][0] < 0
        assert report.witness["t"] == pytest.approx(2.0)

    def test_time_varying_barrier(self):
        mu = "-(w^3*exp(2*t) + 3*w^2 + 3*w*exp(-2*t) + exp(-4*t) + 2*exp(-2*t))"
        prob = make_scalar_problem(
            f=["x^3 + x"], h="exp(-t)*x - exp(-2*t)", mu=mu, lo=[0.5], hi=[3.0], grid=[26], T=2.0,
            declared={"locally_lipschitz": True},
        )
        report = check_tmbf(prob)
        assert report.verdict == "certified"
        assert report.min_margin >= -1e-9

    def test_undeclared_uniqueness_is_inconclusive(self):
        prob = make_scalar_problem(f=["x*t"], mu="-w*t", lo=[-3.0], hi=[3.0], grid=[61], T=2.0)
        report = check_tmbf(prob)
        assert report.verdict == "certified_modulo_classification"
        assert report.mu_verdict.status == "inconclusive"


class TestNagumo:
    """Tests for the tangency check on the boundary."""

    def test_boundary_equilibrium_passes(self):
        result = nagumo_boundary_check(make_scalar_problem())
        assert result.passed
        assert not result.irregular

    def test_outward_flow_fails(self):
        result = nagumo_boundary_check(make_scalar_problem(f=["-1"]))
        assert not result.passed
        assert result.witness[0] == pytest.approx(0.0, abs=1e-3)
        assert result.min_lfh == pytest.approx(-1.0)

    def test_degenerate_boundary_is_flagged(self):
        result = nagumo_boundary_check(make_scalar_problem(f=["-1"], h="x^3"), band=1e-7)
        assert result.passed
        assert result.irregular
        assert result.summary()["zero_may_not_be_regular_value"]

    def test_band_is_widened_once(self):
        result = nagumo_boundary_check(make_scalar_problem(h="x - 0.005"), band=1e-3)
        assert result.boundary.widened
        assert result.boundary.band == pytest.approx(1e-2)

    def test_no_boundary_raises(self):
        with pytest.raises(EmptyBoundary):
            nagumo_boundary_check(make_scalar_problem(h="x + 5"), band=1e-3)

    def test_indeterminate_boundary_gradient_raises(self):
        prob = make_scalar_problem(f=["-x"], h="cbrt(x)^2", lo=[0.0], hi=[1.0], grid=[11])
        with pytest.raises(DomainError):
            nagumo_boundary_check(prob)


class TestDistanceQuotient:
    """Tests for rho(x + eps f(x), S) / eps."""

    def test_fixed_point_on_boundary(self):
        result = distance_quotient_check(make_scalar_problem(), boundary_points=[[0.0]])
        assert np.all(result.quotients == 0.0)
        assert result.all_to_zero

    def test_unit_outward_speed(self):
        result = distance_quotient_check(make_scalar_problem(f=["-1"]), boundary_points=[[0.0]])
        assert np.allclose(result.quotients, 1.0)
        assert result.trends == ["bounded_away"]

    def test_rotation_is_tangent_to_disk(self):
        prob = make_problem(
            f=["-x2", "x1"], h="1 - x1^2 - x2^2", mu="-w", lo=[-1.5, -1.5], hi=[1.5, 1.5], grid=[31, 31],
        )
        result = distance_quotient_check(
            prob,
            boundary_points=[[1.0, 0.0]],
            distance=lambda p: max(0.0, float(np.linalg.norm(p)) - 1.0),
        )
        assert result.exact_distance
        assert result.all_to_zero
        assert result.quotients[0, -1] == pytest.approx(0.5e-4, rel=1e-3)

    def test_rejects_increasing_sequence(self):
        with pytest.raises(ValueError):
            distance_quotient_check(make_scalar_problem(), eps_sequence=[1e-3, 1e-2])


class TestGamma:
    """Tests for the level-band construction of the tightest mu."""

    def test_identity_barrier(self):
        prob = make_scalar_problem(lo=[-2.0], hi=[2.0], grid=[401])
        w_grid = np.linspace(-2.0, 2.0, 41)
        result = gamma_construct(prob, w_grid, band=1e-3)
        assert not result.empty.any()
        assert np.max(np.abs(result.gamma - w_grid)) <= 2e-3

    def test_cubic_barrier(self):
        prob = make_scalar_problem(f=["-1"], h="x^3")
        w_grid = prob.domain.axes()[0][::10] ** 3
        result = gamma_construct(prob, w_grid, band=1e-9)
        expected = -3.0 * np.cbrt(result.w_grid) ** 2
        assert np.allclose(result.gamma, expected, atol=1e-9)

    def test_contracting_disk(self):
        prob = make_problem(f=["-x1", "-x2"], h="1 - x1^2 - x2^2", mu="-w", lo=[-1.0, -1.0], hi=[1.0, 1.0], grid=[201, 201])
        w_grid = np.linspace(0.0, 0.9, 10)
        result = gamma_construct(prob, w_grid, band=0.02)
        assert not result.empty.any()
        assert np.max(np.abs(result.gamma - 2.0 * (1.0 - w_grid))) <= 0.04 + 1e-12

    def test_empty_levels_are_reported(self):
        prob = make_scalar_problem(lo=[-2.0], hi=[2.0], grid=[401])
        result = gamma_construct(prob, [-5.0, 0.0, 5.0], band=1e-3)
        assert list(result.empty) == [True, False, True]
        assert result.summary()["empty_levels"] == [-5.0, 5.0]

    def test_tightest_mu_is_minimal_and_certifies(self):
        prob = make_scalar_problem(lo=[-2.0], hi=[2.0], grid=[401])
        mu = tightest_mu(gamma_construct(prob, np.linspace(-2.0, 2.0, 41), band=1e-3))
        candidate = MuCandidate(mu)
        assert classify(candidate).status == "minimal"

        tight = make_scalar_problem(lo=[-2.0], hi=[2.0], grid=[401], mu=candidate)
        assert check_mbf(tight).verdict == "certified"

    def test_lfh_dominates_gamma_of_h(self):
        prob = make_scalar_problem(f=["-1"], h="x^3")
        result = gamma_construct(prob, prob.domain.axes()[0] ** 3, band=1e-9)
        lie = prob.lie(prob.domain.points())
        assert np.all(lie.lfh >= np.interp(lie.h, result.w_grid, result.gamma) - 1e-9)


class TestStability:
    """Tests for the stability certificate level."""

    @pytest.mark.parametrize(
        "source, expected",
        [("w", "asymptotic_certificate"), ("0", "stability_certificate"), ("-w", "none")],
    )
    def test_sign_of_mu(self, source, expected):
        result = stability_classify(MuCandidate(parse(source, ["w"])), delta=1.0)
        assert result.certificate == expected
        assert "not checked" in result.caveat

    def test_rejects_nonpositive_delta(self):
        with pytest.raises(ValueError):
            stability_classify(parse("w", ["w"]), delta=0.0)


class TestBumpBarrier:
    """Smooth flat barrier whose rate function is not Lipschitz."""

    def test_certified_by_divergence(self):
        prob = make_scalar_problem(
            f=["-abs(x)"],
            h="ifpos(x, exp(-1/x), ifpos(-x, -exp(1/x), 0))",
            mu="ifpos(w, -w*ln(w), ifpos(-w, w*ln(-w), 0))",
        )
        report = check_mbf(prob)
        assert report.verdict == "certified"
        assert report.mu_verdict.case == "4"
        assert report.min_margin >= -1e-9
