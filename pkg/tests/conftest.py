import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FREE_FREE_GRID = [(r, 0, 1, N) for r in (2, 3, 4, 5) for N in range(2, 13)]
FIXED_FIXED_GRID = [(r, k0, k1, N) for (k0, k1) in ((1, 2), (2, 3), (1, 4), (3, 4))
                    for r in (2, 3) for N in range(2, 11)]
DESIGN_GRID = FREE_FREE_GRID + FIXED_FIXED_GRID
SMALL_DESIGNS = [(2, 0, 1, 1), (2, 0, 1, 3), (2, 0, 1, 4), (3, 0, 1, 5), (2, 1, 2, 2),
                 (2, 1, 2, 3), (3, 2, 3, 4), (2, 1, 4, 5), (3, 3, 4, 6)]


@pytest.fixture(autouse=True)
def _quiet_conditioning(recwarn):
    # ConditioningWarning fires routinely for large grids; tests that care use pytest.warns.
    yield
