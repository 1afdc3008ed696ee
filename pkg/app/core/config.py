"""
Configuration management for the Gammoid Decider application.
Handles environment variables, enumeration caps and engine defaults.
"""

from typing import Any, Dict

from pydantic import field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Application
    APP_NAME: str = "Gammoid Decider"
    ENVIRONMENT: str = "development"

    # Server (HTTP surface)
    HOST: str = "0.0.0.0"
    PORT: int = 8000

    # Logging
    LOG_LEVEL: str = "WARNING"
    LOG_FORMAT: str = "console"

    # Enumeration caps
    MAX_GROUND_SIZE: int = 20  # subset scans are 2^n
    MAX_CANONICAL_SIZE: int = 12  # exact permutation search
    MAX_FLATS_FOR_CUTS: int = 64
    MAX_ORACLE_VERTICES: int = 24
    MAX_EXTENSION_SIZE: int = 7

    # Engine defaults
    ENGINE_WORKERS: int = 1
    ENGINE_EXTENSION_BATCH: int = 8
    ENGINE_GOAL_SELECTION: str = "smallest"
    ENGINE_SEED: int = 0
    ENGINE_MAX_ITERATIONS: int = 500
    ENGINE_TIME_LIMIT_SECONDS: float = 300.0

    # Audit budget for tableau validity checks
    AUDIT_MAX_SIZE: int = 10

    # Heuristic switches
    ALPHA_FLATS_ONLY: bool = False
    DEFLATE_GREEDY: bool = False

    @field_validator("ENVIRONMENT")
    @classmethod
    def validate_environment(cls, v):
        """Validate environment setting."""
        allowed_envs = ["development", "staging", "production"]
        if v not in allowed_envs:
            raise ValueError(f"Environment must be one of {allowed_envs}")
        return v

    @field_validator("MAX_GROUND_SIZE")
    @classmethod
    def validate_ground_cap(cls, v):
        """Ground sets are bitmasks over at most 20 elements."""
        if not 0 <= v <= 20:
            raise ValueError("MAX_GROUND_SIZE must lie in 0..20")
        return v

    @field_validator("ENGINE_GOAL_SELECTION")
    @classmethod
    def validate_goal_selection(cls, v):
        """Validate intermediate-goal heuristic id."""
        allowed = ["smallest", "goal-first"]
        if v not in allowed:
            raise ValueError(f"ENGINE_GOAL_SELECTION must be one of {allowed}")
        return v

    def get_engine_defaults(self) -> Dict[str, Any]:
        """Get engine configuration defaults."""
        return {
            "worker_count": self.ENGINE_WORKERS,
            "extension_batch": self.ENGINE_EXTENSION_BATCH,
            "goal_selection": self.ENGINE_GOAL_SELECTION,
            "deterministic_seed": self.ENGINE_SEED,
            "max_iterations": self.ENGINE_MAX_ITERATIONS,
            "time_limit_seconds": self.ENGINE_TIME_LIMIT_SECONDS,
            "max_extension_size": self.MAX_EXTENSION_SIZE,
        }

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True
        extra = "ignore"


# Create global settings instance
settings = Settings()
