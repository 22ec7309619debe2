#!/usr/bin/env python3
"""Entry point script for phaseseg when the package is not installed."""

import sys
from pathlib import Path

# Add the src directory to Python path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from phaseseg.cli.main import cli  # noqa: E402


if __name__ == "__main__":
    cli()
