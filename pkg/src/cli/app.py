import traceback
from typing import List, Optional

from src.cli.commands import COMMANDS, CommandResult
from src.cli.parser import build_parser, split_flags
from src.config import Settings
from src.db.session import Database
from src.errors import AtomTokensError, ConfigError
from src.run_config import resolve_run_config
from src.services.run_service import RunService
from src.utils.logger import logger

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
UNRECORDED = frozenset({"plot-data"})


class RunRecorder:
    """Mirrors a command's outputs into the run registry; a no-op when disabled."""

    logger = logger

    def __init__(self, settings: Settings, enabled: bool = True) -> None:
        self.enabled = enabled and settings.record_runs
        self.db = Database(settings.database_url, echo=settings.echo) if self.enabled else None
        self.service = RunService(self.db.session_factory) if self.db else None
        self.run_id: Optional[int] = None

    async def start(self, config) -> None:
        if not self.enabled:
            return
        await self.db.initialize()
        self.run_id = await self.service.start_run(
            config.command, str(config.output_dir), config.to_json(), seed=config.seed
        )

    async def complete(self, result: CommandResult) -> None:
        if self.run_id is None:
            return
        if result.metrics:
            await self.service.add_metrics(self.run_id, result.metrics)
        for step, path, checksum in result.checkpoints:
            await self.service.add_checkpoint(self.run_id, step, path, checksum)
        await self.service.finish_run(self.run_id, "completed")
        self.logger.info(f"Recorded run {self.run_id}")

    async def fail(self, message: str) -> None:
        if self.run_id is not None:
            await self.service.finish_run(self.run_id, "failed", message)

    async def close(self) -> None:
        if self.db:
            await self.db.close()


async def run(argv: Optional[List[str]], settings: Settings) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        config = resolve_run_config(args.command, split_flags(args), settings, args.config)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE

    recorder = RunRecorder(settings, enabled=args.command not in UNRECORDED)
    try:
        if args.command not in UNRECORDED:
            config.echo()
        await recorder.start(config)
        result = COMMANDS[args.command](config)
        await recorder.complete(result)
        return EXIT_OK
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        await recorder.fail(str(e))
        return EXIT_USAGE
    except FileNotFoundError as e:
        logger.error(f"Missing input: {e}")
        await recorder.fail(str(e))
        return EXIT_USAGE
    except AtomTokensError as e:
        logger.error(str(e))
        await recorder.fail(str(e))
        return EXIT_FAILURE
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}")
        logger.debug(traceback.format_exc())
        await recorder.fail(str(e))
        return EXIT_FAILURE
    finally:
        await recorder.close()
