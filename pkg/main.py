import asyncio
import sys
from typing import List, Optional

from dotenv import load_dotenv, find_dotenv

from src.cli.app import run
from src.config import Settings
from src.utils.logger import logger


async def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv(find_dotenv())
    settings = Settings.from_env()
    logger.set_level(settings.env)
    try:
        return await run(argv, settings)
    except (KeyboardInterrupt, asyncio.CancelledError):
        logger.info("Stopped by user")
        return 1


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
