import numpy as np
import pytest

from tincl.netsim import NetworkConfig, generate_dataset


@pytest.fixture
def net3():
    return NetworkConfig(3, 1.0)


@pytest.fixture
def small_ds(net3):
    return generate_dataset(7, 40, net3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture
def record_criterion():
    """Log one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    def record(name, ok, detail=""):
        _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
