"""Run the acceptance suite and print its per-criterion summary."""
import sys
from pathlib import Path

import pytest

root = Path(__file__).resolve().parent.parent
sys.exit(pytest.main(["-q", str(root / "tests" / "test_acceptance.py"), "-p", "no:cacheprovider"]))
