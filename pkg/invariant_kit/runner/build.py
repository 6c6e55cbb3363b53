"""Turn a validated ProblemConfig into problem objects."""

import logging

from invariant_kit.certify import BarrierProblem
from invariant_kit.control import ControlProblem
from invariant_kit.expr import ScalarFunction, parse, parse_vector
from invariant_kit.minfunc import MuCandidate
from invariant_kit.models import ProblemConfig

logger = logging.getLogger(__name__)


def expression_variables(config: ProblemConfig) -> list[str]:
    names = list(config.state_names)
    return names + ["t"] if config.kind == "tmbf" else names


def mu_candidate(config: ProblemConfig, probe_width: float = 1.0) -> MuCandidate:
    return MuCandidate(parse(config.expressions.mu, ["w"]), config.mu_properties, (-probe_width, 0.0))


def _time_varying_mu(config: ProblemConfig) -> MuCandidate | ScalarFunction:
    """mu(t, w), or a MuCandidate when the source does not use t."""
    mu = parse(config.expressions.mu, ["t", "w"])
    if "t" in mu.free_variables:
        return mu
    return mu_candidate(config)


def build_barrier_problem(config: ProblemConfig) -> BarrierProblem:
    variables = expression_variables(config)
    f = parse_vector(config.expressions.f, variables)
    h = parse(config.expressions.h, variables)
    if config.kind == "tmbf":
        return BarrierProblem(f, h, _time_varying_mu(config), config.domain, config.time, config.mu_properties)
    return BarrierProblem(f, h, mu_candidate(config), config.domain)


def build_control_problem(config: ProblemConfig) -> ControlProblem:
    if config.kind != "mcbf":
        raise ValueError(f"kind {config.kind!r} has no control inputs")
    variables = expression_variables(config)
    expressions = config.expressions
    m = len(expressions.k_nom)
    return ControlProblem(
        f=parse_vector(expressions.f, variables),
        g=parse_vector(expressions.g, variables),
        h=parse(expressions.h, variables),
        mu=mu_candidate(config),
        A=parse_vector(expressions.A or [], variables, columns=m),
        b=parse_vector(expressions.b or [], variables),
        k_nom=parse_vector(expressions.k_nom, variables),
        domain=config.domain,
    )
