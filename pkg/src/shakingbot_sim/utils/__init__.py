"""
Utils package for shared utilities.

- file_utils: file reading and writing helpers
"""

from .file_utils import PathLike, ensure_parent_dir, read_file, write_lines

__all__ = [
    "PathLike",
    "ensure_parent_dir",
    "read_file",
    "write_lines",
]
