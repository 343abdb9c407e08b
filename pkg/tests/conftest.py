import numpy as np
import pytest

from calderon.zernike import ZernikeCoeffs

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_coeffs(rng, K, J):
    shape = (K + 1, 2 * J + 1)
    array = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return ZernikeCoeffs.from_array(array, J=J)


def sparse_coeffs(rng, K, J, n_entries):
    entries = {}
    while len(entries) < n_entries:
        key = (int(rng.integers(-J, J + 1)), int(rng.integers(0, K + 1)))
        entries[key] = complex(rng.standard_normal(), rng.standard_normal())
    return ZernikeCoeffs(entries, K=K, J=J)


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
