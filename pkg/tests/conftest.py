import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from econcomplex import IncidenceMatrix  # noqa: E402

M1 = np.array([[1, 1, 0], [0, 1, 0], [0, 1, 1]])


@pytest.fixture
def m1():
    return IncidenceMatrix(("A", "B", "C"), ("p", "q", "r"), M1)


@pytest.fixture
def m1_csv(tmp_path):
    path = tmp_path / "m1.csv"
    rows = ["actor,item,value"]
    for a, row in zip("ABC", M1):
        for p, v in zip("pqr", row):
            rows.append(f"{a},{p},{v}")
    path.write_text("\n".join(rows) + "\n")
    return path


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
