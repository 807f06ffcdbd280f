import numpy as np
import pytest


class Scripted:
    """Measurement stub that replays a fixed list of SNR readings and records the vectors."""

    def __init__(self, readings):
        self.readings = list(readings)
        self.vectors = []

    def __call__(self, v):
        self.vectors.append(np.array(v))
        return self.readings.pop(0)


@pytest.fixture
def scripted():
    return Scripted


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(ok, detail)`` then assert on ``ok``."""
    doc = (request.function.__doc__ or request.node.name).strip().splitlines()[0]

    def record(ok, detail):
        ACCEPTANCE.append((request.node.name, doc, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {doc}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, doc, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {doc}: {detail}")
