import os
import sys
from typing import Literal

from loguru import logger
from pydantic import model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing_extensions import Self

from qkdhydro import __version__


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_ignore_empty=True,
        extra="ignore",
    )
    # Application
    APP_NAME: str = "QKD Hydro Toolkit"
    APP_VERSION: str = __version__
    LANGUAGE: Literal["en", "vi"] = "en"
    # Output
    CSV_SIGNIFICANT_DIGITS: int = 6
    SWEEP_WORKERS: int = 1
    # Error reporting
    SENTRY_DSN: str | None = None
    # Logging
    LOG_FILE: str = "./logs/qkdhydro.log"
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    LOG_STDERR: bool = False

    @model_validator(mode="after")
    def config_logging(self) -> Self:
        logger.remove()
        os.makedirs(os.path.dirname(self.LOG_FILE) or ".", exist_ok=True)
        logger.add(
            self.LOG_FILE,
            format="{message}",
            level=self.LOG_LEVEL,
            enqueue=True,
            encoding="utf-8",
            rotation="50 MB",
            retention="7 days",
            compression="zip",
        )
        if self.LOG_STDERR:
            logger.add(sys.stderr, format="{message}", level=self.LOG_LEVEL)
        return self


settings = Settings()
