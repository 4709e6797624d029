"""Application configuration settings."""

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings loaded from environment variables (prefix ``QUPST_``)."""

    # App
    app_name: str = "QuPST Circuit Reliability Estimator"
    debug: bool = False
    log_level: str = "INFO"
    log_format: str = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
    workers: int = 0  # 0 = all available cores
    default_seed: int = 0

    # Paths
    base_dir: Path = Path(__file__).parent.parent.parent
    output_dir: Path = base_dir / "runs"

    # Circuit limits; the baseline feature layout has 10 qubit slots
    max_qubits: int = Field(10, ge=1, le=10)

    # Desk-scale dataset defaults
    n_circuits: int = 400
    min_qubits: int = 3
    max_qubits_generated: int = 6
    min_gates: int = 5
    max_gates: int = 40
    topology: str = "line"
    shots: int = 1024
    noise_factors: list[float] = [0.5, 1.0, 2.0, 4.0, 8.0]

    # Numeric tolerances
    trace_tolerance: float = 1e-9
    kraus_tolerance: float = 1e-12
    std_floor: float = 1e-12
    rz_cancel_tolerance: float = 1e-12

    # Model / training defaults
    checkpoint_version: int = 1
    n_layers: int = 2
    epochs: int = 500
    learning_rate: float = 1e-2
    weight_decay: float = 1e-4
    batch_size: int = 2500
    log_every: int = 25

    # Acceptance floors
    max_test_rmse: float = 0.06
    min_test_r2: float = 0.90
    min_spearman: float = 0.95
    min_speedup: float = 10.0

    class Config:
        env_prefix = "QUPST_"
        env_file = ".env"
        env_file_encoding = "utf-8"


# Global settings instance
settings = Settings()
