"""Configuration settings for invariant-kit."""

from contextlib import contextmanager
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Defaults loaded from INVARIANT_KIT_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="INVARIANT_KIT_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Paths
    base_dir: Path = Path(__file__).parent.parent
    output_dir: Path = Path("out")

    # Runtime
    threads: int = Field(default=1, ge=1, description="Worker threads for independent solves")
    log_level: str = "INFO"
    debug_kkt: bool = Field(default=False, description="Verify the KKT certificate on every QP solve")

    # Sign tests
    zero_threshold: float = 1e-12

    # Comparison system
    eps0: float = 1e-3
    n_refine: int = 8
    comparison_step: float = 1e-3
    escape_floor: float = -1e9

    # Minimal-function classification
    sample_count: int = 10001
    sweep_levels: int = 24
    eta_sequence_len: int = 40
    simpson_tol: float = 1e-10

    # Certification
    certify_tol: float = 1e-9
    boundary_band: float = 1e-3
    regularity_threshold: float = 1e-6
    dominance_tol: float = 1e-6
    invariance_tol: float = 1e-6

    # Safety filter
    primal_tol: float = 1e-9
    dual_tol: float = -1e-10
    interior_slack: float = 1e-9

    @property
    def problems_dir(self) -> Path:
        return self.base_dir / "problems"


settings = Settings()


@contextmanager
def override_settings(**values):
    """Temporarily replace fields of the shared settings object."""
    saved = {key: getattr(settings, key) for key in values}
    for key, value in values.items():
        setattr(settings, key, value)
    try:
        yield settings
    finally:
        for key, value in saved.items():
            setattr(settings, key, value)
