import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PI = math.pi


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria report")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, text in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(text)


@pytest.fixture
def acceptance(request):
    """``acceptance(key, ok, detail)`` prints and records one criterion line."""
    def record(key, ok, detail):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        text = f"criterion {key}: {status}  {detail}"
        print(text)
        request.config.acceptance_lines.append((_sort_key(key), text))
        return ok
    return record


def _sort_key(key):
    head = "".join(ch for ch in str(key) if ch.isdigit())
    return (int(head or 0), str(key))


@pytest.fixture(autouse=True)
def _isolated_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("FLOQFLUX_OUTPUT_ROOT", str(tmp_path / "runs"))


def mod2pi_close(a, b, tol=1e-12):
    return abs((a - b + PI) % (2 * PI) - PI) < tol


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)
