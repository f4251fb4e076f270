import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sampling_privacy.datasets import AGE_GROUPS, TUMOR_SIZE_GROUPS  # noqa: E402

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def breast_cancer_rows(n=286, seed=3):
    """Synthetic rows in the UCI breast-cancer column order."""
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        cls = rng.choice(["no-recurrence-events"] * 7 + ["recurrence-events"] * 3)
        age = rng.choice(AGE_GROUPS[1:7])
        meno = rng.choice(["premeno", "ge40", "lt40"])
        size = rng.choice(TUMOR_SIZE_GROUPS[:11])
        nodes = rng.choice(["0-2", "3-5", "6-8"])
        caps = rng.choice(["yes", "no", "?"])
        rows.append(",".join([cls, age, meno, size, nodes, caps, str(rng.randint(1, 3)),
                              rng.choice(["left", "right"]), "left_low",
                              rng.choice(["yes", "no"])]))
    return rows


@pytest.fixture
def breast_cancer_file(tmp_path):
    path = tmp_path / "breast-cancer.data"
    path.write_text("\n".join(breast_cancer_rows()) + "\n", encoding="utf-8")
    return path


CHECKINS = [
    "u1\t2010-10-19T23:55:27Z\t40.7480\t-73.9857\t101",
    "u2\t2010-10-18T22:17:43Z\t40.7480\t-73.9857\t101",
    "u3\t2010-10-17T23:42:03Z\t40.6892\t-74.0445\t202",
]


@pytest.fixture
def checkin_file(tmp_path):
    path = tmp_path / "checkins.txt"
    path.write_text("\n".join(CHECKINS) + "\n", encoding="utf-8")
    return path
