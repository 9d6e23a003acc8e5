import os
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

ACCEPTANCE = os.getenv("PHASE_ACCEPTANCE", "").strip().lower() in {"1", "true", "yes", "on"}

acceptance = pytest.mark.skipif(not ACCEPTANCE, reason="set PHASE_ACCEPTANCE=1 for statistical runs")
