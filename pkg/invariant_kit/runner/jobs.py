"""Run the jobs of a problem config and write report.json plus CSV tables."""

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
from pydantic import ValidationError

from invariant_kit import __version__
from invariant_kit.certify import (
    BarrierProblem,
    SANDWICH_CAVEAT,
    check_mbf,
    check_tmbf,
    distance_quotient_check,
    gamma_construct,
    nagumo_boundary_check,
    stability_classify,
    tightest_mu,
)
from invariant_kit.config import override_settings, settings
from invariant_kit.control import ControlProblem, check_mcbf, continuity_scan
from invariant_kit.errors import ConfigError, InvariantKitError
from invariant_kit.minfunc import SAMPLED_CAVEAT, MuCandidate, classify
from invariant_kit.models import (
    CertifyJob,
    ClassifyJob,
    CompareJob,
    DistanceQuotientJob,
    GammaJob,
    NagumoJob,
    ProblemConfig,
    QPScanJob,
    SimulateJob,
    StabilityJob,
    Tolerances,
)
from invariant_kit.runner.build import build_barrier_problem, build_control_problem, mu_candidate
from invariant_kit.runner.export import export_to_csv, print_summary, write_json_atomic
from invariant_kit.sim import (
    ClosedLoop,
    OpenLoop,
    comparison_overlay,
    invariance_test,
    random_initial_states,
    simulate_many,
)

logger = logging.getLogger(__name__)

EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 2, "error": 3}
# worst outcome first
PRECEDENCE = ("error", "fail", "inconclusive", "pass")

VERDICT_OUTCOMES = {
    "certified": "pass",
    "violated": "fail",
    "mu_not_minimal": "fail",
    "certified_modulo_classification": "inconclusive",
}
STATUS_OUTCOMES = {"minimal": "pass", "not_minimal": "fail", "inconclusive": "inconclusive"}


def combine_outcomes(outcomes: list[str]) -> str:
    for outcome in PRECEDENCE:
        if outcome in outcomes:
            return outcome
    return "pass"


def load_config(path: Path) -> ProblemConfig:
    """Read and validate a problem config; any failure becomes ConfigError."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(str(path), None, "file not found")
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), None, f"invalid JSON: {e}")
    try:
        return ProblemConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(str(path), location, first["msg"])


def resolve_config_path(path: Path) -> Path:
    """A path as given, else a bundled problem of that name."""
    if path.exists():
        return path
    bundled = settings.problems_dir / (path.name if path.suffix else f"{path.name}.json")
    return bundled if bundled.exists() else path


@dataclass
class RunContext:
    config: ProblemConfig
    out_dir: Path
    seed: int
    threads: int
    files: list[str] = field(default_factory=list)

    @cached_property
    def barrier(self) -> BarrierProblem:
        return build_barrier_problem(self.config)

    @cached_property
    def control(self) -> ControlProblem:
        return build_control_problem(self.config)

    def write_csv(self, name: str, header, rows) -> str:
        export_to_csv(self.out_dir / name, header, rows)
        self.files.append(name)
        return name

    def dynamics(self):
        if self.config.kind == "mcbf":
            return ClosedLoop(self.control)
        return OpenLoop(self.barrier.f)


def _classify(ctx: RunContext, job: ClassifyJob, prefix: str) -> dict[str, Any]:
    verdict = classify(mu_candidate(ctx.config, job.probe_width))
    result = {"outcome": STATUS_OUTCOMES[verdict.status], "verdict": verdict.status, "mu_verdict": verdict.model_dump()}
    if verdict.confidence == "sampled":
        result["caveats"] = [SAMPLED_CAVEAT]
    return result


def _certify(ctx: RunContext, job: CertifyJob, prefix: str) -> dict[str, Any]:
    if ctx.config.kind == "mcbf":
        report = check_mcbf(ctx.control, threads=ctx.threads)
    elif ctx.config.kind == "tmbf":
        report = check_tmbf(ctx.barrier)
    else:
        report = check_mbf(ctx.barrier)
    header, rows = report.samples_table()
    result = {
        "outcome": VERDICT_OUTCOMES[report.verdict],
        "verdict": report.verdict,
        "report": report.summary(),
        "samples_csv": ctx.write_csv(f"{prefix}_samples.csv", header, rows),
    }
    if report.mu_verdict.confidence == "sampled":
        result["caveats"] = [SAMPLED_CAVEAT]
    return result


def _nagumo(ctx: RunContext, job: NagumoJob, prefix: str) -> dict[str, Any]:
    check = nagumo_boundary_check(ctx.barrier, band=job.band)
    summary = check.summary()
    boundary = check.boundary
    header = list(ctx.barrier.state_names) + ["h", "Lfh", "grad_norm"]
    rows = np.column_stack([boundary.points, boundary.h, boundary.lfh, boundary.grad_norms])
    result = {"outcome": summary["outcome"], "verdict": summary["outcome"], "check": summary}
    result["samples_csv"] = ctx.write_csv(f"{prefix}_boundary.csv", header, rows)
    if check.irregular:
        result["caveats"] = ["0 may not be a regular value of h; the boundary test is not conclusive there"]
    return result


def _distance_quotient(ctx: RunContext, job: DistanceQuotientJob, prefix: str) -> dict[str, Any]:
    check = distance_quotient_check(ctx.barrier, job.eps_sequence, band=job.band)
    summary = check.summary()
    header, rows = check.table()
    return {
        "outcome": summary["outcome"],
        "verdict": summary["outcome"],
        "check": summary,
        "samples_csv": ctx.write_csv(f"{prefix}_quotients.csv", header, rows),
    }


def _gamma(ctx: RunContext, job: GammaJob, prefix: str) -> dict[str, Any]:
    gamma = gamma_construct(ctx.barrier, np.linspace(job.w_lo, job.w_hi, job.w_count), band=job.band)
    header, rows = gamma.table()
    result = {"gamma": gamma.summary(), "samples_csv": ctx.write_csv(f"{prefix}_gamma.csv", header, rows)}
    try:
        probe = (job.w_lo if job.w_lo < 0 else -1.0, 0.0)
        verdict = classify(MuCandidate(tightest_mu(gamma), probe_interval=probe))
    except ValueError as e:
        result.update({"outcome": "inconclusive", "verdict": "insufficient levels", "error": str(e)})
        return result
    result.update(
        {
            "outcome": STATUS_OUTCOMES[verdict.status],
            "verdict": verdict.status,
            "mu_verdict": verdict.model_dump(),
            "caveats": ["compactness of the level sets near 0 is assumed, not checked", SAMPLED_CAVEAT],
        }
    )
    return result


def _stability(ctx: RunContext, job: StabilityJob, prefix: str) -> dict[str, Any]:
    check = stability_classify(mu_candidate(ctx.config), job.delta)
    outcome = "inconclusive" if check.certificate == "none" else "pass"
    return {"outcome": outcome, "verdict": check.certificate, "check": check.summary(), "caveats": [SANDWICH_CAVEAT]}


def _qp_scan(ctx: RunContext, job: QPScanJob, prefix: str) -> dict[str, Any]:
    start, stop = np.asarray(job.start, dtype=float), np.asarray(job.stop, dtype=float)
    path = start + np.linspace(0.0, 1.0, job.count).reshape(-1, 1) * (stop - start)
    scan = continuity_scan(ctx.control, path, threads=ctx.threads)
    summary = scan.summary()
    if scan.infeasible_indices:
        outcome = "fail"
    elif scan.interior_empty_indices:
        outcome = "inconclusive"
    else:
        outcome = "pass"
    header, rows = scan.table()
    return {
        "outcome": outcome,
        "verdict": f"max jump quotient {scan.max_quotient:.6g}",
        "scan": summary,
        "samples_csv": ctx.write_csv(f"{prefix}_continuity.csv", header, rows),
    }


def _initial_states(ctx: RunContext, explicit, count) -> list[list[float]]:
    states = [list(x0) for x0 in explicit or []]
    if count:
        h = ctx.control.h if ctx.config.kind == "mcbf" else ctx.barrier.h
        states += random_initial_states(ctx.config.domain, h, count, ctx.seed).tolist()
    return states


def _simulate(ctx: RunContext, job: SimulateJob, prefix: str) -> dict[str, Any]:
    h = ctx.control.h if ctx.config.kind == "mcbf" else ctx.barrier.h
    x0s = _initial_states(ctx, job.x0, job.random)
    trajectories = simulate_many(ctx.dynamics(), h, x0s, job.T, job.dt, ctx.config.domain, ctx.threads)
    checks = [invariance_test(traj) for traj in trajectories]
    runs = []
    for i, (traj, check) in enumerate(zip(trajectories, checks)):
        header, rows = traj.table()
        runs.append(
            {
                "trajectory": traj.summary(),
                "invariance": check.summary(),
                "csv": ctx.write_csv(f"{prefix}_trajectory_{i:03d}.csv", header, rows),
            }
        )
    violated = sum(not check.invariant for check in checks)
    return {
        "outcome": "fail" if violated else "pass",
        "verdict": f"{len(checks) - violated}/{len(checks)} trajectories stayed in S",
        "runs": runs,
        "caveats": ["simulation follows one solution; other solutions may exist when f is not Lipschitz"],
    }


def _compare(ctx: RunContext, job: CompareJob, prefix: str) -> dict[str, Any]:
    h = ctx.control.h if ctx.config.kind == "mcbf" else ctx.barrier.h
    mu = mu_candidate(ctx.config)
    trajectories = simulate_many(ctx.dynamics(), h, job.x0, job.T, job.dt, ctx.config.domain, ctx.threads)
    runs = []
    failures = 0
    for i, traj in enumerate(trajectories):
        overlay = comparison_overlay(traj, mu, threads=ctx.threads)
        failures += not overlay.dominance.dominates
        header, rows = overlay.table()
        family_header, family_rows = overlay.comparison.table()
        runs.append(
            {
                "x0": [float(v) for v in traj.x0],
                "overlay": overlay.summary(),
                "csv": ctx.write_csv(f"{prefix}_overlay_{i:03d}.csv", header, rows),
                "family_csv": ctx.write_csv(f"{prefix}_family_{i:03d}.csv", family_header, family_rows),
            }
        )
    return {
        "outcome": "fail" if failures else "pass",
        "verdict": f"{len(runs) - failures}/{len(runs)} trajectories dominate the minimal solution",
        "runs": runs,
    }


HANDLERS: dict[str, Callable[[RunContext, Any, str], dict[str, Any]]] = {
    "classify": _classify,
    "certify": _certify,
    "nagumo": _nagumo,
    "distance_quotient": _distance_quotient,
    "gamma": _gamma,
    "stability": _stability,
    "qp_scan": _qp_scan,
    "simulate": _simulate,
    "compare": _compare,
}


def run_job(ctx: RunContext, index: int, job) -> dict[str, Any]:
    prefix = f"{index:02d}_{job.job}"
    logger.info(f"Job {index}: {job.job}")
    try:
        result = HANDLERS[job.job](ctx, job, prefix)
    except (InvariantKitError, ValueError) as e:
        logger.error(f"Job {index} ({job.job}) failed: {e}")
        result = {"outcome": "error", "error": str(e), "error_type": type(e).__name__}
    result.update({"index": index, "job": job.job})
    logger.info(f"Job {index}: {result['outcome']}")
    return result


def run(
    config_path: Path,
    out_dir: Optional[Path] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    quiet: bool = False,
) -> int:
    """Run every job of a config; returns the process exit code."""
    config_path = resolve_config_path(Path(config_path))
    try:
        config = load_config(config_path)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_CODES["error"]

    out_dir = Path(out_dir or config.output_dir or settings.output_dir)
    seed = 0 if seed is None else seed
    effective = config.tolerances.resolve(settings)
    overrides = {key: getattr(effective, key) for key in Tolerances.model_fields}
    if threads is not None:
        overrides["threads"] = threads

    with override_settings(**overrides):
        ctx = RunContext(config, out_dir, seed, settings.threads)
        try:
            # parse all expressions before running anything
            if config.kind == "mcbf":
                ctx.control
            else:
                ctx.barrier
        except (InvariantKitError, ValueError) as e:
            logger.error(f"{config_path}: {e}")
            return EXIT_CODES["error"]
        jobs = [run_job(ctx, index, job) for index, job in enumerate(config.jobs)]

    outcome = combine_outcomes([job["outcome"] for job in jobs])
    report = {
        "schema": 1,
        "version": __version__,
        "name": config.name,
        "kind": config.kind,
        "description": config.description,
        "config": config_path.name,
        "seed": seed,
        "settings": {key: overrides.get(key, getattr(settings, key)) for key in Tolerances.model_fields},
        "jobs": jobs,
        "files": sorted(ctx.files),
        "outcome": outcome,
    }
    path = write_json_atomic(out_dir / "report.json", report)
    logger.info(f"Report written to {path}")
    if not quiet:
        print_summary(report)
    return EXIT_CODES[outcome]
