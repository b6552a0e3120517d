import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nctorus.core import DeformationMatrix

settings.register_profile(
    "nctorus",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("nctorus")

TWO_PI = 2 * math.pi


@pytest.fixture
def xi2():
    return DeformationMatrix.from_upper(2, {(1, 2): 0.25})


@pytest.fixture
def xi3():
    return DeformationMatrix.from_upper(3, {(1, 2): 0.25, (1, 3): math.sqrt(2) / 10, (2, 3): -0.37})


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# criterion number -> list of (check name, passed, detail)
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def criterion():
    """Record an acceptance check, print its status line, then assert it."""

    def check(number: int, name: str, ok: bool, detail: str = "") -> None:
        ACCEPTANCE.setdefault(number, []).append((name, bool(ok), detail))
        print(f"criterion {number} [{name}]: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
        assert ok, f"criterion {number} [{name}] failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[number]
        failed = [name for name, ok, _ in checks if not ok]
        status = "FAIL" if failed else "PASS"
        extra = f" (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {number:2d}: {status} - {len(checks)} checks{extra}")
