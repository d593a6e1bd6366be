from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Operational knobs only; nothing here changes a numeric result."""

    model_config = SettingsConfigDict(env_file=".env", env_prefix="GATELAB_", extra="ignore")

    # Logging
    LOG_LEVEL: str = Field(default="INFO")

    # Threads for per-sequence gradient work (results reduced in batch order)
    WORKERS: int = Field(default=1, ge=1)

    # Probes
    TSNE_MAX_FRAMES: int = Field(default=2000, ge=3)


settings = Settings()
