import os
from pathlib import Path

import pytest

from kickedising.runner import run_manifest

_VERDICTS: dict[int, str] = {}
_RUNS: dict[str, object] = {}


@pytest.fixture(scope="session")
def verdicts():
    """criterion number -> one-line verdict, echoed in the terminal summary."""
    return _VERDICTS


@pytest.fixture(scope="session")
def desk_run(tmp_path_factory):
    """Run a manifest once per session; KICKEDISING_RUN_DIR keeps the spectrum cache between sessions."""
    root = os.environ.get("KICKEDISING_RUN_DIR")
    base = Path(root) if root else tmp_path_factory.mktemp("runs")

    def run(name, manifest):
        if name not in _RUNS:
            _RUNS[name] = run_manifest(manifest, base / name, threads=os.cpu_count() or 1)
        return _RUNS[name]

    return run


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[k])
