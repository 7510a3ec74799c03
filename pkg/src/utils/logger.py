import inspect
import sys
from typing import Optional, TextIO


class Logger:
    """Process-wide logger: ``[CallerClass] LEVEL: message`` lines on stderr."""

    _instance = None
    DEBUG = 10
    INFO = 20
    WARNING = 30
    ERROR = 40

    ALIASES = {"DEV": DEBUG, "PROD": INFO}
    LEVELS = {"DEBUG": DEBUG, "INFO": INFO, "WARNING": WARNING, "ERROR": ERROR}

    def __new__(cls, *args, **kwargs):
        if not cls._instance:
            cls._instance = super(Logger, cls).__new__(cls)
            cls._instance.name = "AtomTokens"
            cls._instance.level = cls.INFO
            cls._instance.stream = None
        return cls._instance

    def set_level(self, level_name: str) -> None:
        """``dev``/``prod`` or an explicit level name; anything else means INFO."""
        level_name = level_name.upper()
        self.level = self.ALIASES.get(level_name, self.LEVELS.get(level_name, self.INFO))

    def set_stream(self, stream: Optional[TextIO]) -> None:
        # None means "whatever sys.stderr is at call time"
        self.stream = stream

    def _get_caller_name(self) -> str:
        # frames: _get_caller_name, _format, the public method, then the caller
        for frame_info in inspect.stack()[3:]:
            frame = frame_info.frame
            if 'self' not in frame.f_locals:
                break
            cls_name = frame.f_locals['self'].__class__.__name__
            if cls_name != "Logger":
                return cls_name
        return self.name

    def _format(self, label: str, msg: str) -> str:
        return f"[{self._get_caller_name()}] {label}: {msg}"

    def _log(self, level: int, label: str, msg: str) -> None:
        if self.level <= level:
            print(self._format(label, msg), file=self.stream or sys.stderr)

    def debug(self, msg: str) -> None:
        self._log(self.DEBUG, "DEBUG", msg)
    def format_debug(self, msg: str) -> str:
        return self._format("DEBUG", msg)
    def info(self, msg: str) -> None:
        self._log(self.INFO, "INFO", msg)
    def format_info(self, msg: str) -> str:
        return self._format("INFO", msg)
    def warning(self, msg: str) -> None:
        self._log(self.WARNING, "WARNING", msg)
    def format_warning(self, msg: str) -> str:
        return self._format("WARNING", msg)
    def error(self, msg: str) -> None:
        self._log(self.ERROR, "ERROR", msg)
    def format_error(self, msg: str) -> str:
        return self._format("ERROR", msg)

logger = Logger()
