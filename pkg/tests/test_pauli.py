import itertools

import numpy as np
import pytest

from conftest import dense_h, kron_label, random_label
from trotter_oracle.hamiltonians import random_pauli_hamiltonian
from trotter_oracle.pauli import (
    DenseLimitError,
    PauliString,
    PauliSum,
    WidthMismatchError,
    commutator,
    commutator_bound,
    l1_norm,
    multiply,
    to_dense_matrix,
)


def test_label_roundtrip():
    for label in ["X", "IZ", "XYZI", "YYYY"]:
        assert PauliString.from_label(label).to_label() == label


def test_bad_label():
    with pytest.raises(ValueError):
        PauliString.from_label("XA")


def test_known_product():
    r = multiply(PauliString.from_label("XZ"), PauliString.from_label("ZX"))
    assert r.coefficient == 1 and r.pauli.to_label() == "YY"
    r = multiply(PauliString.from_label("X"), PauliString.from_label("Y"))
    assert r.coefficient == 1j and r.pauli.to_label() == "Z"


@pytest.mark.parametrize("seed", range(25))
def test_product_matches_kron(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    a, b = random_label(rng, n), random_label(rng, n)
    r = multiply(PauliString.from_label(a), PauliString.from_label(b))
    expected = kron_label(a) @ kron_label(b)
    assert np.allclose(r.coefficient * kron_label(r.pauli.to_label()), expected)


@pytest.mark.parametrize("seed", range(25))
def test_commutation_matches_matrices(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(1, 5))
    a, b = random_label(rng, n), random_label(rng, n)
    ma, mb = kron_label(a), kron_label(b)
    comm = ma @ mb - mb @ ma
    pa, pb = PauliString.from_label(a), PauliString.from_label(b)
    assert pa.commutes_with(pb) == np.allclose(comm, 0)
    c = commutator(pa, pb)
    if c is None:
        assert np.allclose(comm, 0)
    else:
        assert np.allclose(c.coefficient * kron_label(c.pauli.to_label()), comm)


def test_width_mismatch():
    with pytest.raises(WidthMismatchError):
        multiply(PauliString.from_label("X"), PauliString.from_label("XX"))
    with pytest.raises(WidthMismatchError):
        PauliSum(2, [(1.0, PauliString.from_label("X"))])


def test_pauli_sum_rejects_duplicates_and_complex():
    with pytest.raises(ValueError):
        PauliSum.from_labels([("XI", 1.0), ("XI", 2.0)])
    with pytest.raises(ValueError):
        PauliSum.from_labels([("XI", 1j)])


@pytest.mark.parametrize("seed", range(6))
def test_dense_matrix_matches_kron(seed):
    h = random_pauli_hamiltonian(4, 10, seed)
    assert np.allclose(to_dense_matrix(h), dense_h(h))


def test_dense_limit():
    with pytest.raises(DenseLimitError):
        to_dense_matrix(PauliSum.from_labels([("X" * 13, 1.0)]))


def test_l1_norm():
    assert l1_norm(PauliSum.from_labels([("XI", -2.0), ("ZZ", 0.5)])) == 2.5


def _trace_norm_of_coeffs(m):
    # L1 norm of the Pauli expansion of m, via Hilbert-Schmidt projection
    n = int(np.log2(m.shape[0]))
    total = 0.0
    for label in itertools.product("IXYZ", repeat=n):
        total += abs(np.trace(kron_label("".join(label)).conj().T @ m) / m.shape[0])
    return total


def _dense_commutator_bound(h):
    mats = [c * kron_label(p.to_label()) for c, p in h.terms]
    comm = lambda a, b: a @ b - b @ a
    L = len(mats)
    total = 0.0
    for b in range(L - 1):
        triple = sum(comm(comm(mats[b], mats[c]), mats[a]) for c in range(b + 1, L) for a in range(b + 1, L))
        double = sum(comm(comm(mats[b], mats[c]), mats[b]) for c in range(b + 1, L))
        total += _trace_norm_of_coeffs(triple) + 0.5 * _trace_norm_of_coeffs(double)
    return total / 12


def test_commutator_bound_x_plus_z():
    assert commutator_bound(PauliSum.from_labels([("X", 1.0), ("Z", 1.0)])) == pytest.approx(0.5, abs=1e-14)


def test_commutator_bound_commuting_is_zero():
    assert commutator_bound(PauliSum.from_labels([("ZI", 1.0), ("IZ", 0.3), ("ZZ", 2.0)])) == 0.0


@pytest.mark.parametrize("seed", range(4))
def test_commutator_bound_matches_dense(seed):
    rng = np.random.default_rng(seed)
    h = random_pauli_hamiltonian(2 + seed % 2, None, seed)
    h = PauliSum(h.n_qubits, [(float(rng.normal()), p) for _, p in h.terms])
    assert commutator_bound(h) == pytest.approx(_dense_commutator_bound(h), rel=1e-10)
