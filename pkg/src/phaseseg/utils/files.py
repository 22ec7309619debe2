"""Output directory handling."""

import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Union

from .exceptions import ConfigurationError


def is_empty_dir(path: Path) -> bool:
    return path.is_dir() and not any(path.iterdir())


@contextmanager
def atomic_output_dir(target: Union[str, Path], force: bool = False) -> Iterator[Path]:
    """Stage writes in a sibling temporary directory and move it into place on success.

    A non-empty existing ``target`` is only replaced with ``force``. On any
    exception the staging directory is removed and ``target`` is left as it was.
    """
    target = Path(target)
    if target.exists():
        if not target.is_dir():
            raise ConfigurationError(f"Output path {target} exists and is not a directory")
        if not force and not is_empty_dir(target):
            raise ConfigurationError(f"Output directory {target} is not empty; pass --force to replace it")
    target.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    staging.chmod(0o755)
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if target.exists():
        shutil.rmtree(target)
    os.replace(staging, target)
