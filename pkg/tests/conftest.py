import sys
from pathlib import Path

import pytest

# Ensure the project root (containing `src/`) is importable for all tests.
PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.core.run_spec import OUTPUT_DIR_ENV  # noqa: E402


@pytest.fixture(autouse=True)
def scratch_output_dir(tmp_path, monkeypatch):
    """Point default trace and sweep output at a per-test directory instead of ./output."""
    directory = tmp_path / 'default-output'
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(directory))
    return directory
