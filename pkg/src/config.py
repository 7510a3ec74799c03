import os
from dataclasses import dataclass
from typing import Optional

from src.utils.logger import logger


@dataclass(frozen=True)
class Settings:
    logger = logger

    env: str = "prod"
    output_root: str = "runs"
    database_url: str = "sqlite+aiosqlite:///atomtokens.db"
    echo: bool = False
    record_runs: bool = True

    @classmethod
    def from_env(cls) -> "Settings":
        def parse_bool(value: Optional[str], default: bool) -> bool:
            if value is None:
                return default
            if value.strip().lower() in ("1", "true", "yes", "y"):
                return True
            elif value.strip().lower() in ("0", "false", "no", "n"):
                return False
            else:
                cls.logger.error("Failed to parse boolean value. Using default value as fallback variant.")
                return default

        def parse_str(value: Optional[str], default: str) -> str:
            if value is None or not value.strip():
                return default
            return value.strip()

        return cls(
            env=parse_str(os.getenv("ATOMTOK_ENV"), "prod").lower(),
            output_root=parse_str(os.getenv("ATOMTOK_OUTPUT_ROOT"), "runs"),
            database_url=parse_str(
                os.getenv("ATOMTOK_DATABASE_URL"), "sqlite+aiosqlite:///atomtokens.db"
            ),
            echo=parse_bool(os.getenv("ATOMTOK_DB_ECHO"), False),
            record_runs=parse_bool(os.getenv("ATOMTOK_RECORD_RUNS"), True),
        )
