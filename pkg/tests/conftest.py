import os
import tempfile

import numpy as np
import pytest

# keep the user's critical-value cache out of test runs
_CACHE = tempfile.mkdtemp(prefix="locgauss-test-cache-")
os.environ["LOCGAUSS_CACHE_DIR"] = _CACHE

#: criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def cache_dir():
    return _CACHE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
