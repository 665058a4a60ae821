# ========================================
# FileName: manifest.py
# Brief: Reproducibility manifest written next to CLI artifacts.
# =========================================

import json
import os

import numpy as np
from filelock import FileLock

from .. import __version__
from .misc import sha256_file

MANIFEST_NAME = 'manifest.json'


def _file_entry(path, base) -> dict:
    entry = {'path': os.path.relpath(os.path.abspath(path), base)}
    if os.path.isfile(path):
        entry['sha256'] = sha256_file(path)
    return entry


def write_manifest(directory, command, inputs=(), outputs=(), seeds=None,
                   parameters=None) -> str:
    """Record one command in the manifest of an output directory.

    Entries are keyed by command name, a later run of the same command
    replaces its entry. No timestamps are stored.

    :param directory: Output directory.
    :type directory: str

    :param command: Command name, e.g. 'gen-dataset'.
    :type command: str

    :param inputs: Paths read by the command.
    :param outputs: Paths written by the command.
    :param seeds: Seeds used, by name.
    :type seeds: dict
    :param parameters: Other settings.
    :type parameters: dict

    :return: Path of the manifest.
    :rtype: str
    """
    directory = os.path.abspath(directory)
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, MANIFEST_NAME)
    entry = {
        'inputs': [_file_entry(p, directory) for p in inputs],
        'outputs': [_file_entry(p, directory) for p in outputs],
        'seeds': seeds or {},
        'parameters': parameters or {},
        'versions': {'jetfdi': __version__, 'numpy': np.__version__},
    }

    lock = FileLock(path + '.lock')
    with lock:
        content = {'commands': {}}
        if os.path.exists(path):
            try:
                with open(path, 'r') as f:
                    content = json.load(f)
            except json.JSONDecodeError:
                content = {'commands': {}}
        content.setdefault('commands', {})[command] = entry
        with open(path, 'w') as f:
            json.dump(content, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
    return path
