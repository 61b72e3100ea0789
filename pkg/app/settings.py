from pydantic_settings import BaseSettings
from typing import Optional


class Settings(BaseSettings):
    REPORT_DIR: str = "reports"
    LOG_LEVEL: str = "INFO"

    DEFAULT_VARIANT: str = "A"
    DEFAULT_MODE: str = "ofb"
    DEFAULT_ROUNDS: int = 4
    DEFAULT_ITERATIONS: int = 3

    ANALYSIS_KEY: str = "2b7e151628aed2a6abf7158809cf4f3c"
    ANALYSIS_SEED: int = 2011
    CORRELATION_SAMPLES: Optional[int] = None
    TEST_IMAGE_SIZE: int = 512

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True


settings = Settings()
