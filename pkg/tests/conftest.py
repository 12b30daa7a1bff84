import numpy as np
import pytest

from wbcbench import dataset as ds

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call ``criterion(number, ok, detail)``."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, ok, detail):
        lines.append((number, request.node.name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(lines, key=lambda t: (t[0], t[1])):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture(scope="session")
def raw_table():
    return ds.load_raw(ds.bundled_data_path())


@pytest.fixture(scope="session")
def cleaned(raw_table):
    return ds.clean(raw_table)


@pytest.fixture(scope="session")
def balanced(cleaned):
    return ds.balance(cleaned, seed=ds.DEFAULT_SEED)


@pytest.fixture(scope="session")
def standardized(balanced):
    x = balanced.features
    z = (x - x.mean(axis=0)) / x.std(axis=0)
    return ds.Dataset(z, balanced.labels)


@pytest.fixture
def rng():
    return np.random.default_rng(20231016)
