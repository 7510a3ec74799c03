from datetime import datetime, timezone

from sqlalchemy import JSON, Column, DateTime, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from src.db.base import Base


class Run(Base):
    """One CLI invocation that wrote outputs."""

    __tablename__ = "runs"

    run_id = Column(Integer, primary_key=True, autoincrement=True)
    command = Column(String(50), nullable=False, index=True)
    seed = Column(Integer, nullable=True)
    output_dir = Column(String(500), nullable=False)
    config = Column(JSON, nullable=True)
    status = Column(String(20), default="running", nullable=False)
    error_message = Column(Text, nullable=True)
    created_at = Column(
        DateTime(timezone=True), default=lambda: datetime.now(timezone.utc), nullable=False
    )
    updated_at = Column(
        DateTime(timezone=True),
        default=lambda: datetime.now(timezone.utc),
        onupdate=lambda: datetime.now(timezone.utc),
    )

    metrics = relationship(
        "MetricRecord", back_populates="run", cascade="all, delete-orphan"
    )
    checkpoints = relationship(
        "CheckpointRecord", back_populates="run", cascade="all, delete-orphan"
    )


class MetricRecord(Base):
    """A metrics line mirrored from the run's JSONL log."""

    __tablename__ = "metric_records"

    record_id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("runs.run_id"), nullable=False, index=True)
    step = Column(Integer, nullable=True)
    payload = Column(JSON, nullable=False)
    created_at = Column(
        DateTime(timezone=True), default=lambda: datetime.now(timezone.utc), nullable=False
    )

    run = relationship("Run", back_populates="metrics")


class CheckpointRecord(Base):
    __tablename__ = "checkpoint_records"

    checkpoint_id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("runs.run_id"), nullable=False, index=True)
    step = Column(Integer, nullable=False)
    path = Column(String(500), nullable=False)
    checksum = Column(String(64), nullable=False)
    created_at = Column(
        DateTime(timezone=True), default=lambda: datetime.now(timezone.utc), nullable=False
    )

    run = relationship("Run", back_populates="checkpoints")
