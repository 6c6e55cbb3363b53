"""Tests for trajectory integration and the invariance diagnostics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invariant_kit.certify import BarrierProblem, check_mbf
from invariant_kit.control import ControlProblem
from invariant_kit.errors import DomainError, QPInfeasibleAtState
from invariant_kit.expr import parse, parse_vector
from invariant_kit.minfunc import MuCandidate
from invariant_kit.models import BoxDomain, DeclaredProperties
from invariant_kit.sim import (
    ClosedLoop,
    OpenLoop,
    comparison_overlay,
    integrate,
    invariance_test,
    random_initial_states,
    safe_grid,
    set_distance_series,
    simulate_many,
)

BUMP_H = "ifpos(x, exp(-1/x), ifpos(-x, -exp(1/x), 0))"


def make_control_problem() -> ControlProblem:
    """Single integrator x' = u with h = x, mu = w and |u| <= 1."""
    variables = ["x"]
    return ControlProblem(
        f=parse_vector(["0"], variables),
        g=parse_vector([["1"]], variables),
        h=parse("x", variables),
        mu=MuCandidate(parse("w", ["w"])),
        A=parse_vector([["1"], ["-1"]], variables),
        b=parse_vector(["1", "1"], variables),
        k_nom=parse_vector(["0"], variables),
        domain=BoxDomain(lo=[-0.9], hi=[3.0], grid=[40]),
    )


def make_linear_problem() -> BarrierProblem:
    """x' = (-x1 + x2, x1 - x2) with h = x1 x2 and mu = 2w on [-2, 2]^2."""
    variables = ["x1", "x2"]
    declared = DeclaredProperties(locally_lipschitz=True)
    return BarrierProblem(
        f=parse_vector(["-x1 + x2", "x1 - x2"], variables),
        h=parse("x1*x2", variables),
        mu=MuCandidate(parse("2*w", ["w"]), declared),
        domain=BoxDomain(lo=[-2.0, -2.0], hi=[2.0, 2.0], grid=[101, 101]),
        declared=declared,
    )


def make_open_loop(f=("-1",), variables=("x",)) -> OpenLoop:
    """Create an uncontrolled right-hand side."""
    return OpenLoop(parse_vector(list(f), list(variables)))


class FailingDynamics:
    """x' = -1 with a zero input, failing once the call budget is spent."""

    state_names = ("x",)

    def __init__(self, calls: int):
        self.calls = calls

    def evaluate(self, t, x):
        self.calls -= 1
        if self.calls < 0:
            raise QPInfeasibleAtState(t, x)
        return np.array([-1.0]), np.array([0.0])


def run_open_loop(f=("-1",), h="x", x0=(0.0,), T=1.0, dt=0.01, variables=("x",), **kwargs):
    """Integrate an open loop with defaults."""
    return integrate(make_open_loop(f, variables), parse(h, list(variables)), x0, T, dt, **kwargs)


def run_closed_loop(x0=(-0.5,), T=1.0, dt=0.01, **kwargs):
    """Integrate the filtered single integrator x' = k(x)."""
    prob = make_control_problem()
    return integrate(ClosedLoop(prob), prob.h, x0, T, dt, **kwargs)


class TestIntegrate:
    """Tests for the fixed-step RK4 integrator."""

    def test_constant_field(self):
        traj = run_open_loop()
        assert traj.final_state[0] == pytest.approx(-1.0, abs=1e-10)
        assert len(traj.times) == 101

    def test_closed_loop_follows_barrier(self):
        traj = run_closed_loop()
        assert traj.final_state[0] == pytest.approx(-0.5 * math.exp(-1.0), abs=1e-6)
        assert traj.controls[0][0] == pytest.approx(0.5)

    def test_absolute_value_field(self):
        traj = run_open_loop(f=("-abs(x)",), x0=(1.0,))
        assert traj.final_state[0] == pytest.approx(math.exp(-1.0), abs=1e-6)

    def test_time_dependent_field(self):
        traj = run_open_loop(f=("x*t",), h="x", x0=(1.0,), variables=("x", "t"))
        assert traj.final_state[0] == pytest.approx(math.exp(0.5), abs=1e-6)
        assert traj.state_names == ("x",)

    @pytest.mark.parametrize(
        "run, exact",
        [
            (lambda dt: run_open_loop(f=("-abs(x)",), x0=(1.0,), dt=dt), math.exp(-1.0)),
            (lambda dt: run_closed_loop(dt=dt), -0.5 * math.exp(-1.0)),
            (lambda dt: run_open_loop(f=("x",), x0=(1.0,), dt=dt), math.exp(1.0)),
        ],
    )
    def test_fourth_order_convergence(self, run, exact):
        coarse = abs(run(0.05).final_state[0] - exact)
        fine = abs(run(0.025).final_state[0] - exact)
        assert math.log2(coarse / fine) >= 3.9

    def test_leaving_the_box_truncates(self):
        domain = BoxDomain(lo=[-1.0], hi=[1.0], grid=[3])
        traj = run_open_loop(f=("x",), x0=(0.5,), T=2.0, domain=domain)
        assert traj.exit_time == pytest.approx(math.log(2.0), abs=0.011)
        assert traj.events[-1][1] == "domain_exit"
        assert np.all(np.abs(traj.states) <= 1.0)

    def test_start_outside_box(self):
        domain = BoxDomain(lo=[-1.0], hi=[1.0], grid=[3])
        with pytest.raises(ValueError):
            run_open_loop(x0=(2.0,), domain=domain)

    def test_infeasible_filter_ends_trajectory(self):
        traj = run_closed_loop(x0=(-1.5,))
        assert traj.events == [(0.0, "qp_infeasible")]
        assert len(traj.times) == 1

    def test_infeasible_filter_raises_when_strict(self):
        with pytest.raises(QPInfeasibleAtState):
            run_closed_loop(x0=(-1.5,), strict=True)

    def test_infeasible_filter_at_final_state(self):
        traj = integrate(FailingDynamics(calls=4), parse("x", ["x"]), [0.0], 0.1, 0.1)
        assert len(traj.times) == 2
        assert traj.events == [(pytest.approx(0.1), "qp_infeasible")]
        assert traj.controls[-1][0] == 0.0

    def test_infeasible_filter_at_final_state_strict(self):
        with pytest.raises(QPInfeasibleAtState):
            integrate(FailingDynamics(calls=4), parse("x", ["x"]), [0.0], 0.1, 0.1, strict=True)

    def test_domain_error_ends_trajectory(self):
        traj = run_open_loop(f=("-1 + 0*sqrt(x)",), x0=(0.05,), dt=0.1)
        assert traj.events[-1][1] == "domain_error"
        with pytest.raises(DomainError):
            run_open_loop(f=("-1 + 0*sqrt(x)",), x0=(0.05,), dt=0.1, strict=True)

    def test_table_layout(self):
        header, rows = run_closed_loop(T=0.1).table()
        assert header == ["t", "x", "h", "u1", "event"]
        assert len(rows) == 11

    def test_simulate_many_keeps_order(self):
        dynamics = make_open_loop(("-x",))
        x0s = [[0.1], [0.2], [0.3], [0.4]]
        trajectories = simulate_many(dynamics, parse("x", ["x"]), x0s, 1.0, 0.1, threads=3)
        assert [t.x0[0] for t in trajectories] == [0.1, 0.2, 0.3, 0.4]


class TestInvariance:
    """Tests for h(x(t)) >= -tol along trajectories."""

    def test_linear_flow_keeps_product_positive(self):
        f = ("-x1 + x2", "x1 - x2")
        traj = run_open_loop(f=f, h="x1*x2", x0=(1.0, 0.5), T=5.0, variables=("x1", "x2"))
        assert invariance_test(traj).invariant

    def test_cubic_barrier_is_left_immediately(self):
        traj = run_open_loop(h="x^3", T=1.0, dt=1e-3)
        assert np.allclose(traj.h_values, -traj.times**3, atol=1e-6)
        result = invariance_test(traj, tol=0.0)
        assert not result.invariant
        assert result.first_violation_time == pytest.approx(1e-3)
        assert result.violation_h < 0

    def test_bump_barrier(self):
        traj = run_open_loop(f=("-abs(x)",), h=BUMP_H, x0=(0.5,), T=3.0)
        assert invariance_test(traj).invariant
        assert traj.final_state[0] == pytest.approx(0.5 * math.exp(-3.0), abs=1e-6)


class TestComparisonOverlay:
    """Tests for h(x(t)) against the minimal comparison solution."""

    def test_cubic_barrier_matches_minimal_solution(self):
        traj = run_open_loop(h="x^3", T=1.0, dt=1e-3)
        overlay = comparison_overlay(traj, MuCandidate(parse("3*cbrt(w)^2", ["w"])), eps0=1e-3, n_refine=8)
        assert overlay.dominance.dominates
        # perturbation 1e-3/2^8 shifts the minimal solution -t^3 to about -(t + 0.016)^3
        assert np.max(np.abs(overlay.comparison.estimate + traj.times**3)) <= 0.05
        assert overlay.comparison.estimate[-1] == pytest.approx(-1.0, abs=0.05)
        header, rows = overlay.table()
        assert header == ["t", "h", "w_min", "err_estimate"]
        assert rows.shape == (1001, 4)

    def test_growing_barrier(self):
        traj = run_open_loop(f=("x",), x0=(1.0,))
        overlay = comparison_overlay(traj, MuCandidate(parse("-w", ["w"])), eps0=1e-3, n_refine=4)
        assert overlay.dominance.dominates
        assert overlay.comparison.estimate[-1] == pytest.approx(math.e, abs=1e-3)

    def test_constant_rate_with_faster_flow(self):
        traj = run_open_loop(f=("2",), x0=(0.0,))
        overlay = comparison_overlay(traj, MuCandidate(parse("-1", ["w"])), eps0=1e-3, n_refine=4)
        assert overlay.dominance.dominates
        assert overlay.dominance.min_gap >= 0


class TestSetDistance:
    """Tests for the distance from x(t) to S."""

    def setup_method(self):
        domain = BoxDomain(lo=[-1.0], hi=[1.0], grid=[201])
        self.S_grid = safe_grid(domain, parse("x", ["x"]))

    def test_closed_loop_approaches_safe_set(self):
        traj = run_closed_loop()
        series = set_distance_series(traj, self.S_grid)
        assert np.allclose(series.distances, 0.5 * np.exp(-traj.times), atol=1e-6)
        assert series.decaying

    def test_inside_safe_set(self):
        traj = run_open_loop(f=("x",), x0=(0.1,))
        series = set_distance_series(traj, self.S_grid)
        assert np.all(series.distances == 0.0)

    def test_unstable_flow_moves_away(self):
        traj = run_open_loop(f=("x",), x0=(-0.1,))
        series = set_distance_series(traj, self.S_grid)
        assert not series.decaying
        assert series.distances[-1] == pytest.approx(0.1 * math.e, abs=1e-6)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            set_distance_series(run_open_loop(), np.zeros((0, 1)))


class TestInitialStates:
    """Tests for rejection sampling of initial states in S."""

    def test_same_seed_same_states(self):
        domain = BoxDomain(lo=[-2.0, -2.0], hi=[2.0, 2.0], grid=[41, 41])
        h = parse("x1*x2", ["x1", "x2"])
        first = random_initial_states(domain, h, 25, seed=7)
        second = random_initial_states(domain, h, 25, seed=7)
        assert np.array_equal(first, second)
        assert np.all(h.eval_many(first) >= 0)

    def test_empty_safe_set(self):
        domain = BoxDomain(lo=[-1.0], hi=[1.0], grid=[11])
        with pytest.raises(ValueError):
            random_initial_states(domain, parse("-1 - x^2", ["x"]), 5, seed=0)


class TestEndToEnd:
    """Certified barriers keep simulated trajectories in S."""

    def test_certified_linear_flow(self):
        prob = make_linear_problem()
        assert check_mbf(prob).certified
        x0s = random_initial_states(prob.domain, prob.h, 100, seed=0)
        dynamics = OpenLoop(prob.f)
        for traj in simulate_many(dynamics, prob.h, x0s, 5.0, 0.05, prob.domain):
            assert invariance_test(traj).invariant

    def test_filtered_single_integrator(self):
        prob = make_control_problem()
        x0s = random_initial_states(prob.domain, prob.h, 100, seed=0)
        for traj in simulate_many(ClosedLoop(prob), prob.h, x0s, 5.0, 0.05, prob.domain):
            assert invariance_test(traj).invariant
            assert not traj.events


rates = st.integers(min_value=10, max_value=100).map(lambda n: n / 100)
fractions = st.integers(min_value=0, max_value=10).map(lambda n: n / 10)


@st.composite
def certified_problems(draw) -> BarrierProblem:
    """Linear flows with quadratic or cubic barriers and a Lipschitz mu, certified by construction."""
    family = draw(st.sampled_from(["quadratic_decay", "cubic_decay", "quadratic_growth"]))
    declared = DeclaredProperties(locally_lipschitz=True)
    b = draw(st.integers(min_value=1, max_value=20).map(lambda n: n / 10))
    if family == "quadratic_decay":
        a1, a2, r = draw(rates), draw(rates), b
        s = draw(st.integers(min_value=-10, max_value=10).map(lambda n: n / 10))
        c = 2.0 * min(a1, a2) * max(draw(fractions), 0.1)
        d = c * r * draw(fractions)
        variables = ["x1", "x2"]
        f = [f"-{a1!r}*x1 + ({s!r})*x2", f"-({s!r})*x1 - {a2!r}*x2"]
        h, mu = f"{r!r} - x1^2 - x2^2", f"{c!r}*w - {d!r}"
        domain = BoxDomain(lo=[-2.0, -2.0], hi=[2.0, 2.0], grid=[41, 41])
    elif family == "cubic_decay":
        a = draw(rates)
        c = 3.0 * a
        d = c * b * draw(fractions)
        variables = ["x"]
        f, h, mu = [f"-{a!r}*x"], f"{b!r} - x^3", f"{c!r}*w - {d!r}"
        domain = BoxDomain(lo=[-2.0], hi=[2.0], grid=[201])
    else:
        a = draw(rates)
        k = 2.0 * a * draw(fractions)
        variables = ["x"]
        f, h, mu = [f"{a!r}*x"], f"x^2 - {b!r}", f"-{k!r}*w"
        domain = BoxDomain(lo=[-2.0], hi=[2.0], grid=[201])
    return BarrierProblem(
        f=parse_vector(f, variables),
        h=parse(h, variables),
        mu=MuCandidate(parse(mu, ["w"]), declared),
        domain=domain,
        declared=declared,
    )


class TestComparisonSoundness:
    """Certified barriers stay above the minimal comparison solution from every x0 in S."""

    @given(certified_problems(), st.integers(min_value=0, max_value=2**16))
    @settings(max_examples=50, deadline=None)
    def test_overlay_dominates(self, prob, seed):
        assert check_mbf(prob).certified
        x0s = random_initial_states(prob.domain, prob.h, 10, seed=seed)
        for traj in simulate_many(OpenLoop(prob.f), prob.h, x0s, 1.0, 0.01):
            assert len(traj.times) == 101
            overlay = comparison_overlay(traj, prob.mu, eps0=1e-4, n_refine=4)
            assert overlay.dominance.dominates
