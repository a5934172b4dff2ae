from pathlib import Path

import pytest

from amenent.config import load_system
from amenent.groups import GroupSpec
from amenent.symbolic import SystemSpec

DATA = Path(__file__).parent / "data"

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def data():
    return DATA


@pytest.fixture
def full_shift():
    return load_system(DATA / "full_shift.json")


@pytest.fixture
def golden():
    return load_system(DATA / "golden_mean.json")


def cyclic_full_shift(*moduli, k=2):
    return SystemSpec(GroupSpec(0, tuple(moduli)), tuple(str(i) for i in range(k)))
