import numpy as np
import pytest

from erkn_wave.spectral import mode_indices


def random_hermitian(rng, K, decay=1.0):
    """Random coefficients of a real trigonometric polynomial."""
    v = rng.normal(size=2 * K) + 1j * rng.normal(size=2 * K)
    v = 0.5 * (v + np.conj(v[(-mode_indices(K)) % (2 * K)]))
    return v * np.maximum(1.0, np.abs(mode_indices(K))) ** (-decay)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line; the lines are repeated in the terminal summary."""

    def emit(label: str, ok: bool, detail: str) -> bool:
        line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
