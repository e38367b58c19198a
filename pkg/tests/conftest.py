import contextlib
import time

import numpy as np
import pytest

from hilbext.mesh import annulus_tower, build_disk_mesh, cycle_space


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def disk64():
    return build_disk_mesh(4, 64)


@pytest.fixture(scope="session")
def tower64():
    return annulus_tower(3, 64)


def circle_cycle(n):
    theta = 2 * np.pi * np.arange(n) / n
    return cycle_space(n, list(zip(np.cos(theta), np.sin(theta))))


def omega(k, n, phase=0.0):
    """``exp(i k theta)`` on ``n`` equispaced angles."""
    return np.exp(1j * (k * 2 * np.pi * np.arange(n) / n + phase))


def brute_force_quotient_norm(s, z, rng, n_trials=1000):
    """min of sup_norm(s + t) over random sections t vanishing at z."""
    from hilbext.sampling import random_section

    best = np.inf
    n = s.values.shape[0]
    for i in range(n_trials):
        if i % 2:
            # damp s away from z by a random factor
            g = rng.random() ** 4 * rng.random(n)
            g[z] = 1.0
            t = s.values * (g - 1.0)[:, None]
        else:
            t = random_section(s.bundle, rng, scale=rng.random()).values.copy()
            t[z] = 0.0
        best = min(best, float(np.linalg.norm(s.values + t, axis=1).max()))
    return best


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


class _Criterion:
    def __init__(self, number, title, lines):
        self.number, self.title, self.lines = number, title, lines
        self.details = []
        self.ok = True

    def check(self, cond, what):
        if not cond:
            self.ok = False
            self.details.append(f"failed: {what}")
        return cond

    def note(self, text):
        self.details.append(text)


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion and assert it."""
    lines = request.config.acceptance_lines

    @contextlib.contextmanager
    def make(number, title, budget=None):
        c = _Criterion(number, title, lines)
        start = time.perf_counter()
        try:
            yield c
        except Exception as exc:  # recorded, then re-raised
            c.ok = False
            c.details.append(f"error: {type(exc).__name__}: {exc}")
            raise
        finally:
            elapsed = time.perf_counter() - start
            if budget is not None:
                c.check(elapsed < budget, f"runtime {elapsed:.2f}s over {budget}s")
            status = "PASS" if c.ok else "FAIL"
            lines.append(
                f"[{status}] criterion {number}: {title} ({elapsed:.2f}s) " + "; ".join(c.details)
            )
        assert c.ok, "; ".join(c.details)

    return make
