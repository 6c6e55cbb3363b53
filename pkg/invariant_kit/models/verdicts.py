"""Serializable verdict records."""

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class DeclaredProperties(BaseModel):
    """User assertions about mu that sampling cannot establish."""

    locally_lipschitz: Optional[bool] = Field(default=None, description="mu is locally Lipschitz")
    divergent_integral: Optional[bool] = Field(
        default=None,
        description="Override for the divergence of the integral of 1/mu towards 0 from below",
    )
    note: str = Field(default="", description="Provenance of the assertions")


class MinimalityVerdict(BaseModel):
    """Outcome of classifying a comparison function mu."""

    status: Literal["minimal", "not_minimal", "inconclusive"]
    case: Optional[Literal["1", "2", "3", "4", "corollary1"]] = Field(
        default=None, description="Which sufficient case fired (minimal only)"
    )
    evidence: dict[str, Any] = Field(default_factory=dict)
    confidence: Literal["exact", "sampled"] = "sampled"

    @property
    def is_minimal(self) -> bool:
        return self.status == "minimal"


class SafeControlResult(BaseModel):
    """Safety-filter output at one state."""

    feasible: bool
    u: Optional[list[float]] = Field(default=None, description="Filtered input, None when infeasible")
    active_set: list[int] = Field(default_factory=list, description="Rows tight at the optimum")
    active_labels: list[str] = Field(default_factory=list)
    objective: Optional[float] = Field(default=None, description="||u - k_nom(x)||^2")
    multipliers: list[float] = Field(default_factory=list)
    strict_interior_nonempty: Optional[bool] = None
    barrier_row: dict[str, Any] = Field(
        default_factory=dict, description="Lfh, Lgh and -mu(h) at the state"
    )
    degenerate: bool = Field(default=False, description="A rank-deficient active set was used")
    certificate: Optional[list[float]] = Field(
        default=None, description="Farkas multipliers proving emptiness when infeasible"
    )
