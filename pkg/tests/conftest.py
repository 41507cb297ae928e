import pytest

from dqdlp.numt import ProblemInstance, multiplicative_order

ACCEPTANCE_LINES: dict[int, str] = {}


def find_instance(r: int, t: int = 1) -> ProblemInstance:
    """Smallest prime-modulus instance whose generator has order exactly r."""
    N = r + 1
    while True:
        if all(N % d for d in range(2, int(N**0.5) + 1)) and (N - 1) % r == 0:
            for a in range(2, N):
                if multiplicative_order(a, N) == r:
                    return ProblemInstance.create(a, pow(a, t, N), N)
        N += 1


@pytest.fixture(scope="session")
def sec6():
    return ProblemInstance.create(3, 12, 71)


@pytest.fixture(scope="session")
def r8():
    return ProblemInstance.create(2, 13, 17)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
