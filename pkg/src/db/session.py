from pathlib import Path

from sqlalchemy.engine import make_url
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine

from src.db.base import Base
from src.utils.logger import logger


def ensure_sqlite_parent(database_url: str) -> None:
    """Create the directory holding a file-backed SQLite registry."""
    url = make_url(database_url)
    if url.get_backend_name() != "sqlite" or not url.database or url.database == ":memory:":
        return
    Path(url.database).expanduser().parent.mkdir(parents=True, exist_ok=True)


class Database:
    logger = logger

    def __init__(self, database_url: str, echo: bool = False) -> None:
        ensure_sqlite_parent(database_url)
        self.url = database_url
        self.engine = create_async_engine(database_url, echo=echo)
        self.session_factory = async_sessionmaker(
            bind=self.engine, class_=AsyncSession, expire_on_commit=False
        )

    async def initialize(self) -> None:
        async with self.engine.begin() as conn:
            await conn.run_sync(Base.metadata.create_all)
        self.logger.debug(f"Run registry ready at {make_url(self.url).render_as_string(hide_password=True)}")

    async def close(self) -> None:
        await self.engine.dispose()
