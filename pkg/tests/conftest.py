import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent))

from lpor import RadioParams  # noqa: E402


@pytest.fixture
def table3_radio():
    """The evaluation radio setup: 0.28 W, unit gains, 914 MHz, 225 m."""
    return RadioParams()
