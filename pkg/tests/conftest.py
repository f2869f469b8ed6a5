import pytest

from pisotdyn import make_field


@pytest.fixture(scope="session")
def golden():
    return make_field([-1, -1, 1], (1, 2))


@pytest.fixture(scope="session")
def big():
    # (3 + sqrt 5)/2
    return make_field([1, -3, 1], (2, 3))


@pytest.fixture(scope="session")
def two():
    return make_field([-2, 1], (1, 3))


@pytest.fixture(scope="session")
def three():
    return make_field([-3, 1], (2, 4))


@pytest.fixture(scope="session")
def plastic():
    return make_field([-1, -1, 0, 1], (1, 2))


_ACCEPTANCE = {}


def record_acceptance(number, passed, detail=""):
    _ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
