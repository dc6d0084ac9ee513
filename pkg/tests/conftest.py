from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng(request) -> np.random.Generator:
    """Per-test generator seeded from the test's node id."""
    seed = np.frombuffer(request.node.nodeid.encode(), dtype=np.uint8).astype(np.uint64)
    return np.random.default_rng(np.random.SeedSequence(seed.tolist()))


def random_state(n_qubits: int, rng: np.random.Generator, batch: int | None = None) -> np.ndarray:
    shape = (2 ** n_qubits,) if batch is None else (2 ** n_qubits, batch)
    v = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return v / np.linalg.norm(v, axis=0)


# ---------------------------------------------------------------- acceptance summary

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    entry = _criteria.setdefault(mark.args[0], {"failed": [], "seconds": 0.0, "tests": 0})
    entry["seconds"] += rep.duration
    if rep.when == "call":
        entry["tests"] += 1
    if rep.failed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        verdict = "FAIL" if e["failed"] else "PASS"
        extra = f" failed: {', '.join(e['failed'])}" if e["failed"] else ""
        terminalreporter.write_line(f"criterion {n}: {verdict} ({e['tests']} checks, {e['seconds']:.1f}s){extra}")
