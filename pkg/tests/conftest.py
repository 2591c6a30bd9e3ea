import pytest

from geolevy import BrownianMotion, CompoundPoissonGauss


@pytest.fixture
def bm():
    return BrownianMotion(0.0, 1.0)


@pytest.fixture
def cpg():
    return CompoundPoissonGauss(rate=1.0, jump_mean=0.0, jump_sd=1.0, drift=0.0)


@pytest.fixture
def cpg2():
    return CompoundPoissonGauss(rate=2.0, jump_mean=0.3, jump_sd=0.5, drift=-0.1)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for n, m in list(sys.modules.items()) if n.endswith("test_acceptance")), None)
    lines = getattr(mod, "VERDICTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
