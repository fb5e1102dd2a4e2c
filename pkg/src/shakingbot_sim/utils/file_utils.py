"""
File operation utilities shared by snapshot, log and report writers.
"""

from pathlib import Path
from typing import Iterable, Optional, Union

PathLike = Union[str, Path]


def ensure_parent_dir(file_path: PathLike) -> Path:
    """Create the parent directory of ``file_path`` if needed and return the path."""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def read_file(file_path: PathLike, encoding: Optional[str] = "utf-8") -> str:
    """
    Read the contents of a text file with automatic encoding fallback.

    Args:
        file_path: Path to the file to read
        encoding: Initial encoding to try (defaults to utf-8)

    Returns:
        The contents of the file as a string

    Raises:
        FileNotFoundError: If the file does not exist
        PermissionError: If access to the file is denied
    """
    try:
        with open(file_path, "r", encoding=encoding) as f:
            return f.read()
    except UnicodeDecodeError:
        with open(file_path, "r", encoding="latin-1") as f:
            return f.read()


def write_lines(file_path: PathLike, lines: Iterable[str]) -> Path:
    """Write ``lines`` to a text file, one per line, creating parent directories."""
    path = ensure_parent_dir(file_path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line)
            f.write("\n")
    return path
