import sys
from pathlib import Path

import pytest

# Allow running the suite from a fresh checkout without installing.
_SRC = Path(__file__).resolve().parents[1] / "src"
if str(_SRC) not in sys.path:
    sys.path.insert(0, str(_SRC))

from ehikit.entities import default_gazetteer  # noqa: E402


@pytest.fixture(scope="session")
def gazetteer():
    return default_gazetteer()
