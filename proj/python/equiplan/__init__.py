"""Finite-group equivariant sampling-based planning.

The heavy lifting happens in the compiled ``_core`` extension; this package
re-exports it and adds a couple of conveniences for reading experiment output.
"""

import csv
import io

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_experiment


def read_csv(text):
    """Parses one CSV string returned by ``run_experiment`` into row dicts."""
    return list(csv.DictReader(io.StringIO(text)))


def run(command, config=None, jobs=1):
    """Runs an experiment and returns ``(tables, summary, exit_code)`` with
    every CSV already parsed into row dicts."""
    files, summary, code = run_experiment(command, config, jobs)
    return {name: read_csv(text) for name, text in files.items()}, summary, code
