# ========================================
# FileName: misc.py
# Brief: Small helpers shared by the CLI commands.
# =========================================

import hashlib
import os
import pathlib

import psutil
from rich.filesize import decimal
from rich.markup import escape
from rich.text import Text
from rich.tree import Tree


def default_jobs(config=None) -> int:
    """Worker count: the `jobs` configuration key, else the number of
    logical CPUs."""
    if config and config.get('jobs'):
        return int(config['jobs'])
    return psutil.cpu_count(logical=True) or 1


def sha256_file(path, buf_size=1 << 16) -> str:
    """Hex sha256 digest of a file.

    :param path: file path
    :type path: str

    :param buf_size: read chunk size
    :type buf_size: int

    :returns: the digest
    :rtype: str
    """
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(buf_size), b''):
            h.update(chunk)
    return h.hexdigest()


def ensure_parent(path) -> str:
    """Create the directory holding `path` and return that directory."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    return directory


def artifact_tree(paths, title) -> Tree:
    """Tree of written artifacts with their sizes, for the console."""
    tree = Tree(f"[bold magenta]:open_file_folder: {escape(str(title))}")
    for path in sorted(pathlib.Path(p) for p in paths):
        if not path.exists():
            continue
        label = Text(path.name, "green")
        label.highlight_regex(r"\..*$", "bold red")
        label.append(f" ({decimal(path.stat().st_size)})", "blue")
        tree.add(Text("📄 ") + label)
    return tree
