from typing import Any, Dict, Iterable, List, Optional

from sqlalchemy import select
from sqlalchemy.orm import selectinload

from src.db.models import CheckpointRecord, MetricRecord, Run
from src.utils.logger import logger


class RunService:
    logger = logger

    def __init__(self, session_factory) -> None:
        self.session_factory = session_factory

    async def start_run(
        self, command: str, output_dir: str, config: Dict[str, Any], seed: Optional[int] = None
    ) -> int:
        async with self.session_factory() as db_session:
            run = Run(command=command, output_dir=output_dir, config=config, seed=seed, status="running")
            db_session.add(run)
            await db_session.commit()
            await db_session.refresh(run)
            self.logger.debug(f"Registered run {run.run_id} ({command})")
            return run.run_id

    async def add_metrics(self, run_id: int, records: Iterable[Dict[str, Any]]) -> int:
        async with self.session_factory() as db_session:
            rows = [MetricRecord(run_id=run_id, step=record.get("step"), payload=record) for record in records]
            db_session.add_all(rows)
            await db_session.commit()
            return len(rows)

    async def add_checkpoint(self, run_id: int, step: int, path: str, checksum: str) -> None:
        async with self.session_factory() as db_session:
            db_session.add(CheckpointRecord(run_id=run_id, step=step, path=path, checksum=checksum))
            await db_session.commit()

    async def finish_run(self, run_id: int, status: str = "completed", error_message: Optional[str] = None) -> bool:
        async with self.session_factory() as db_session:
            result = await db_session.execute(select(Run).where(Run.run_id == run_id))
            run = result.scalar_one_or_none()
            if not run:
                return False
            run.status = status
            run.error_message = error_message
            await db_session.commit()
            return True

    async def get_run(self, run_id: int) -> Optional[Dict[str, Any]]:
        async with self.session_factory() as db_session:
            result = await db_session.execute(
                select(Run)
                .options(selectinload(Run.checkpoints))
                .where(Run.run_id == run_id)
            )
            run = result.scalar_one_or_none()
            if not run:
                return None

            return {
                "run_id": run.run_id,
                "command": run.command,
                "seed": run.seed,
                "output_dir": run.output_dir,
                "config": run.config,
                "status": run.status,
                "error_message": run.error_message,
                "checkpoints": [
                    {"step": c.step, "path": c.path, "checksum": c.checksum}
                    for c in sorted(run.checkpoints, key=lambda c: c.checkpoint_id)
                ],
                "created_at": run.created_at.isoformat(),
                "updated_at": run.updated_at.isoformat() if run.updated_at else None,
            }

    async def list_metrics(self, run_id: int) -> List[Dict[str, Any]]:
        async with self.session_factory() as db_session:
            result = await db_session.execute(
                select(MetricRecord)
                .where(MetricRecord.run_id == run_id)
                .order_by(MetricRecord.record_id.asc())
            )
            return [record.payload for record in result.scalars().all()]
