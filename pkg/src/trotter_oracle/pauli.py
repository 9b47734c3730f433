"""Pauli strings in symplectic (x-mask, z-mask) form, and weighted sums of them.

Bit ``q`` of each mask refers to qubit ``q``; in the character form qubit 0 is
the leftmost character.  Dense matrices use the Kronecker order
``P_0 (x) P_1 (x) ... (x) P_{N-1}``, so qubit 0 is the most significant bit of
a basis-state index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

DENSE_LIMIT = 12
PRUNE_TOL = 1e-14

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}
_PHASES = (1, 1j, -1, -1j)

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class WidthMismatchError(ValueError):
    pass


class DenseLimitError(ValueError):
    pass


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, slots=True)
class PauliString:
    n_qubits: int
    x_bits: int = 0
    z_bits: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_bits & ~full or self.z_bits & ~full:
            raise ValueError("bitmask wider than n_qubits")

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        x = z = 0
        for q, ch in enumerate(label.upper()):
            try:
                xb, zb = _CHAR_TO_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r} in {label!r}") from None
            x |= xb << q
            z |= zb << q
        return cls(len(label), x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits, 0, 0)

    def to_label(self) -> str:
        return "".join(
            _BITS_TO_CHAR[((self.x_bits >> q) & 1, (self.z_bits >> q) & 1)]
            for q in range(self.n_qubits)
        )

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    @property
    def n_y(self) -> int:
        return _popcount(self.x_bits & self.z_bits)

    def commutes_with(self, other: PauliString) -> bool:
        _check_width(self, other)
        return (_popcount(self.x_bits & other.z_bits) + _popcount(self.z_bits & other.x_bits)) % 2 == 0

    def index_masks(self) -> tuple[int, int]:
        """Masks over basis-state indices (qubit q lives at bit N-1-q)."""
        n = self.n_qubits
        xm = zm = 0
        for q in range(n):
            if (self.x_bits >> q) & 1:
                xm |= 1 << (n - 1 - q)
            if (self.z_bits >> q) & 1:
                zm |= 1 << (n - 1 - q)
        return xm, zm

    def to_matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for ch in self.to_label():
            out = np.kron(out, _SINGLE[ch])
        return out

    def __str__(self) -> str:
        return self.to_label()


@dataclass(frozen=True, slots=True)
class ScaledPauli:
    coefficient: complex
    pauli: PauliString


def _check_width(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise WidthMismatchError(f"width mismatch: {a.n_qubits} vs {b.n_qubits}")


def multiply(a: PauliString, b: PauliString) -> ScaledPauli:
    """Product ``a @ b`` as a phase in {1, i, -1, -i} times a Pauli string.

    With P = i^{|x&z|} X^x Z^z, moving Z^{z_a} past X^{x_b} costs (-1)^{|z_a & x_b|}.
    """
    _check_width(a, b)
    x = a.x_bits ^ b.x_bits
    z = a.z_bits ^ b.z_bits
    k = a.n_y + b.n_y - _popcount(x & z) + 2 * _popcount(a.z_bits & b.x_bits)
    return ScaledPauli(_PHASES[k % 4], PauliString(a.n_qubits, x, z))


def commutator(a: PauliString, b: PauliString) -> ScaledPauli | None:
    """``[a, b]``; ``None`` when the strings commute."""
    if a.commutes_with(b):
        return None
    prod = multiply(a, b)
    return ScaledPauli(2 * prod.coefficient, prod.pauli)


class PauliSum:
    """Real-weighted sum of distinct Pauli strings, kept in insertion order."""

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Iterable[tuple[float, PauliString]] = ()):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = n_qubits
        self._terms: dict[PauliString, float] = {}
        for coeff, pauli in terms:
            if pauli.n_qubits != n_qubits:
                raise WidthMismatchError(
                    f"term {pauli.to_label()} has width {pauli.n_qubits}, expected {n_qubits}"
                )
            if pauli in self._terms:
                raise ValueError(f"duplicate term {pauli.to_label()}")
            c = complex(coeff)
            if abs(c.imag) > 0:
                raise ValueError(f"coefficient of {pauli.to_label()} must be real")
            self._terms[pauli] = float(c.real)

    @classmethod
    def from_labels(cls, items: Sequence[tuple[str, float]]) -> PauliSum:
        if not items:
            raise ValueError("cannot infer width from an empty term list")
        paulis = [(c, PauliString.from_label(s)) for s, c in items]
        return cls(paulis[0][1].n_qubits, paulis)

    @property
    def terms(self) -> list[tuple[float, PauliString]]:
        return [(c, p) for p, c in self._terms.items()]

    @property
    def coefficients(self) -> np.ndarray:
        return np.fromiter(self._terms.values(), dtype=float, count=len(self._terms))

    @property
    def paulis(self) -> list[PauliString]:
        return list(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        return iter(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*{p.to_label()}" for c, p in self.terms[:6])
        more = " + ..." if len(self) > 6 else ""
        return f"PauliSum(n_qubits={self.n_qubits}, {body or '0'}{more})"

    def scaled(self, factor: float) -> PauliSum:
        return PauliSum(self.n_qubits, [(factor * c, p) for c, p in self.terms])

    def commutes_pairwise(self) -> bool:
        ps = self.paulis
        return all(ps[i].commutes_with(ps[j]) for i in range(len(ps)) for j in range(i + 1, len(ps)))


def l1_norm(h: PauliSum) -> float:
    return float(np.sum(np.abs(h.coefficients))) if len(h) else 0.0


def to_dense_matrix(h: PauliSum, limit: int = DENSE_LIMIT) -> np.ndarray:
    n = h.n_qubits
    if n > limit:
        raise DenseLimitError(f"{n} qubits exceeds the dense limit of {limit}")
    dim = 1 << n
    rows = np.arange(dim)
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, pauli in h.terms:
        xm, zm = pauli.index_masks()
        # P|b> = i^{n_y} (-1)^{|z & b|} |b ^ x>
        signs = 1 - 2 * (np.bitwise_count(rows & zm).astype(np.int64) & 1)
        out[rows ^ xm, rows] += coeff * _PHASES[pauli.n_y % 4] * signs
    return out


class _Accumulator:
    """Complex-weighted Pauli sum used while building nested commutators."""

    def __init__(self):
        self.terms: dict[PauliString, complex] = {}

    def add(self, coeff: complex, pauli: PauliString) -> None:
        self.terms[pauli] = self.terms.get(pauli, 0.0) + coeff

    def pruned(self) -> dict[PauliString, complex]:
        return {p: c for p, c in self.terms.items() if abs(c) > PRUNE_TOL}


def nested_commutator_sums(h: PauliSum) -> list[tuple[dict[PauliString, complex], dict[PauliString, complex]]]:
    """For each b < L-1: (sum_{c>b} sum_{a>b} [[H_b,H_c],H_a], sum_{c>b} [[H_b,H_c],H_b]).

    Equal strings are merged and coefficients below ``PRUNE_TOL`` dropped.
    """
    coeffs = h.coefficients
    paulis = h.paulis
    n = len(paulis)
    out = []
    for b in range(n - 1):
        triple = _Accumulator()
        double = _Accumulator()
        for c in range(b + 1, n):
            first = commutator(paulis[b], paulis[c])
            if first is None:
                continue
            cw = coeffs[b] * coeffs[c] * first.coefficient
            for a in range(b + 1, n):
                nested = commutator(first.pauli, paulis[a])
                if nested is not None:
                    triple.add(cw * coeffs[a] * nested.coefficient, nested.pauli)
            nested = commutator(first.pauli, paulis[b])
            if nested is not None:
                double.add(cw * coeffs[b] * nested.coefficient, nested.pauli)
        out.append((triple.pruned(), double.pruned()))
    return out


def commutator_bound(h: PauliSum) -> float:
    """Nested-commutator constant W_C for the second-order product formula.

    Each inner sum is accumulated as a Pauli sum before its coefficient
    L1-norm is taken. The result depends on the stored term order.
    """
    total = 0.0
    for triple, double in nested_commutator_sums(h):
        total += sum(abs(c) for c in triple.values()) + 0.5 * sum(abs(c) for c in double.values())
    return total / 12.0
