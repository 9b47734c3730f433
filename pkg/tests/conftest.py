import numpy as np
import pytest
import scipy.linalg

from trotter_oracle.pauli import PauliString

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def kron_label(label: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, SINGLE[ch])
    return out


def dense_h(h) -> np.ndarray:
    return sum(c * kron_label(p.to_label()) for c, p in h.terms)


def dense_product(schedule) -> np.ndarray:
    """Ordered product of expm(-i a P), later rotations on the left."""
    u = np.eye(1 << schedule.n_qubits, dtype=complex)
    for p, angle in schedule.rotations:
        u = scipy.linalg.expm(-1j * angle * kron_label(p.to_label())) @ u
    return u


def random_label(rng, n):
    return "".join(rng.choice(list("IXYZ"), size=n))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
