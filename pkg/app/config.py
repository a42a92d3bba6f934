"""
Configuration Management
Centralized configuration using Pydantic settings with environment variable support.
"""

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables.
    Uses .env file for local development.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    ENVIRONMENT: str = Field(
        default="development", description="Environment: development, testing, production"
    )
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")

    # Sentry Monitoring
    SENTRY_DSN: str | None = Field(default=None, description="Sentry DSN for error tracking")

    # Objective compilation
    DEFAULT_PRECISION_BITS: int = Field(
        default=8, ge=0, description="Fractional bits kept when quantizing real coefficients"
    )
    DEFAULT_MARGIN_BITS: int = Field(
        default=0, ge=0, description="Extra value-register qubits on top of the minimal width"
    )
    DEFAULT_LAMBDA1: float = Field(
        default=15.0, gt=0, description="Weight of the active-antenna cardinality penalty"
    )
    IMAG_TOLERANCE: float = Field(
        default=1e-12,
        gt=0,
        description="Largest imaginary residue (relative) dropped after the norm expansion",
    )
    MAX_COEFFICIENT_BITS: int = Field(
        default=62, ge=8, description="Width limit for quantized integer coefficients"
    )

    # Grover adaptive search
    GAS_LAMBDA_GROWTH: float = Field(
        default=8 / 7, gt=1, description="Growth factor of the rotation-count bound k"
    )
    GAS_MAX_ITERATIONS: int = Field(
        default=10_000, ge=1, description="Hard cap on GAS iterations regardless of termination"
    )

    # Simulator size guards
    STATEVECTOR_MAX_QUBITS: int = Field(
        default=26, ge=2, description="Largest n+m accepted by the gate-level simulator"
    )
    STRUCTURED_MAX_VARIABLES: int = Field(
        default=26, ge=1, description="Largest n accepted by the structured simulator"
    )
    DEBUG_DUMP_MAX_QUBITS: int = Field(
        default=16, ge=1, description="Largest n+m for per-basis-state CSV dumps"
    )
    EXHAUSTIVE_RANGE_MAX_VARS: int = Field(
        default=20, ge=1, description="Largest n for the exhaustive min/max range helper"
    )

    # Experiment harness
    TRIAL_BATCH_SIZE: int = Field(
        default=8,
        ge=1,
        description="Number of trials dispatched concurrently per batch",
    )
    OUTPUT_DIR: str = Field(default="results", description="Default directory for run outputs")

    @field_validator("ENVIRONMENT")
    @classmethod
    def validate_environment(cls, v: str) -> str:
        """Validate environment value"""
        allowed = {"development", "testing", "production"}
        if v not in allowed:
            raise ValueError(f"ENVIRONMENT must be one of {allowed}")
        return v

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level"""
        allowed = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
        v_upper = v.upper()
        if v_upper not in allowed:
            raise ValueError(f"LOG_LEVEL must be one of {allowed}")
        return v_upper

    @property
    def is_production(self) -> bool:
        """Check if running in production"""
        return self.ENVIRONMENT == "production"

    @property
    def is_development(self) -> bool:
        """Check if running in development"""
        return self.ENVIRONMENT == "development"


# Global settings instance
settings = Settings()
