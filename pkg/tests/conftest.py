import numpy as np
import pytest

from adiaspin.su2 import Su2


def random_su2(rng) -> Su2:
    return Su2.from_array(rng.normal(size=4))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def matrix_close(u: Su2, m, tol=1e-12) -> bool:
    """True when ``u.matrix()`` equals ``m`` up to an overall sign."""
    a = u.matrix()
    m = np.asarray(m, dtype=complex)
    return min(np.max(np.abs(a - m)), np.max(np.abs(a + m))) < tol


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, passed, detail)`` for the end-of-run summary."""
    store = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number: int, passed: bool, detail: str):
        store[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPTANCE, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        passed, detail = store[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}")
