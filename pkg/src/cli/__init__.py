from src.cli.app import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, run
from src.cli.parser import build_parser

__all__ = ["EXIT_FAILURE", "EXIT_OK", "EXIT_USAGE", "run", "build_parser"]
