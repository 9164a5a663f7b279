import os
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class EngineSettings(BaseSettings):
    """
    Numerical defaults of the engine.
    Loads from environment variables (prefixed with NQA_).
    """
    model_config = SettingsConfigDict(env_prefix='NQA_', env_file='.env', extra='ignore')

    ode_method: Literal["RK45", "DOP853"] = "RK45"
    rtol: float = 1e-10
    atol: float = 1e-12
    tracking_points: int = 4096
    sample_count: int = 512

    # Modes per executor job; fixed so that results do not depend on the pool size.
    chunk_size: int = 64
    determinant_budget: int = 256
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)

    log_file: str = "nqa.log"
    log_level: str = "INFO"


class Settings(BaseSettings):
    """
    Main application settings.
    """
    model_config = SettingsConfigDict(env_file='.env', extra='ignore')

    engine: EngineSettings = EngineSettings()


# Export a single instance of settings for easy access throughout the app.
settings = Settings()
