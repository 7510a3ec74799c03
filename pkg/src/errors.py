from typing import Optional, Sequence


class AtomTokensError(Exception):
    """Base class for every error raised by the package."""


class ShapeError(AtomTokensError):
    def __init__(self, op: str, *shapes: Sequence[int], detail: str = "") -> None:
        self.op = op
        self.shapes = [tuple(s) for s in shapes]
        shown = " vs ".join(str(s) for s in self.shapes)
        message = f"{op}: incompatible shapes {shown}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class GradientCheckError(AtomTokensError):
    def __init__(self, parameter: str, index: int, message: str) -> None:
        self.parameter = parameter
        self.index = index
        super().__init__(f"{parameter}[{index}]: {message}")


class NonFiniteStateError(AtomTokensError):
    def __init__(self, step: int) -> None:
        self.step = step
        super().__init__(f"scan state became non-finite at step {step}")


class SelectiveModeError(AtomTokensError):
    pass


class CodebookError(AtomTokensError):
    pass


class SpecMismatchError(AtomTokensError):
    def __init__(self, expected: Sequence[int], found: Sequence[int]) -> None:
        self.expected = list(expected)
        self.found = list(found)
        super().__init__(f"FSQ levels mismatch: checkpoint {self.expected}, tokens {self.found}")


class ParseError(AtomTokensError):
    pass


class SamplingError(AtomTokensError):
    pass


class ConfigError(AtomTokensError):
    def __init__(self, field: str, message: str) -> None:
        self.field = field
        super().__init__(f"{field}: {message}")


class CheckpointError(AtomTokensError):
    pass


class TrainingAborted(AtomTokensError):
    def __init__(self, step: int, reason: Optional[str] = None) -> None:
        self.step = step
        super().__init__(f"training aborted at step {step}: {reason or 'repeated non-finite steps'}")


class AnchorError(AtomTokensError):
    pass
