import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from hidden_gtnl.qlin import DensityMatrix

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(0, 2**32 - 1)
angles = st.floats(0, 2 * np.pi, allow_nan=False)
probs = st.floats(0, 1, allow_nan=False)
quarter = st.floats(0, np.pi / 4, allow_nan=False)


def random_density(seed: int, qubits: int = 3, rank: int | None = None) -> DensityMatrix:
    """Ginibre-distributed mixed state (rank defaults to full)."""
    rng = np.random.default_rng(seed)
    d = 2**qubits
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_unitary(seed: int, d: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def assert_density(m, tol=1e-9):
    m = np.asarray(m)
    assert np.allclose(m, m.conj().T, atol=1e-10)
    assert abs(np.trace(m).real - 1) < 1e-10
    assert np.linalg.eigvalsh(m)[0] > -tol


@pytest.fixture(scope="session")
def wide_cfg():
    from hidden_gtnl.optimize import OptimizerConfig
    return OptimizerConfig(starts=512)


# --- acceptance reporting -------------------------------------------------------------

ACCEPTANCE: dict = {}


def record_criterion(number: int, title: str, ok, detail: str = "") -> None:
    """Remember a criterion outcome (True, False or None for skipped) and echo it."""
    status = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
    line = f"criterion {number} [{status}] {title}" + (f": {detail}" if detail else "")
    ACCEPTANCE[number] = line
    print(line)


def pytest_collection_modifyitems(config, items):
    for item in items:
        if getattr(getattr(item, "obj", None), "is_hypothesis_test", False):
            item.add_marker(pytest.mark.property)


def pytest_configure(config):
    config.addinivalue_line("markers", "property: randomized or grid invariant check")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
