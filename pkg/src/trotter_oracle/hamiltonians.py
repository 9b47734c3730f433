"""Hamiltonian sources: random Pauli sums, JSON files, spectral norms."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .pauli import DENSE_LIMIT, PauliString, PauliSum, to_dense_matrix
from .rng import RngSeed, as_seed


class HamiltonianFileError(ValueError):
    """Malformed Hamiltonian file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DuplicateTermError(HamiltonianFileError):
    pass


class TermWidthError(HamiltonianFileError):
    pass


def random_pauli_hamiltonian(n_qubits: int, n_terms: int | None = None, seed: RngSeed | int = 0) -> PauliSum:
    """Sum of ``n_terms`` distinct Pauli strings with unit coefficients.

    Strings are drawn uniformly without replacement from all 4^N tensor
    products, identity included. ``n_terms`` defaults to N^2. The sampling
    order is kept as the term order.
    """
    if n_terms is None:
        n_terms = n_qubits * n_qubits
    total = 4**n_qubits
    if n_terms > total:
        raise ValueError(f"cannot draw {n_terms} distinct strings from {total}")
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    rng = as_seed(seed, "hamiltonian").generator()
    codes = rng.choice(total, size=n_terms, replace=False)
    mask = (1 << n_qubits) - 1
    paulis = [PauliString(n_qubits, int(c) & mask, int(c) >> n_qubits) for c in codes]
    return PauliSum(n_qubits, [(1.0, p) for p in paulis])


def hamiltonian_to_dict(h: PauliSum, metadata: dict | None = None) -> dict:
    return {
        "n_qubits": h.n_qubits,
        "terms": [{"pauli": p.to_label(), "coeff": c} for c, p in h.terms],
        "metadata": dict(metadata or {}),
    }


def dumps_hamiltonian(h: PauliSum, metadata: dict | None = None) -> str:
    # one term per line; 17 significant digits round-trip every double exactly
    lines = ["{", f'  "n_qubits": {h.n_qubits},', '  "terms": [']
    body = [
        f'    {{"pauli": "{p.to_label()}", "coeff": {float(c):.17g}}}' for c, p in h.terms
    ]
    lines.append(",\n".join(body))
    lines.append("  ],")
    lines.append(f'  "metadata": {json.dumps(dict(metadata or {}), sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_hamiltonian(h: PauliSum, path: str | Path, metadata: dict | None = None) -> None:
    Path(path).write_text(dumps_hamiltonian(h, metadata), encoding="utf-8")


def _line_of(text: str, needle: str, start: int = 0) -> int | None:
    pos = text.find(needle, start)
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def loads_hamiltonian(text: str) -> tuple[PauliSum, dict]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HamiltonianFileError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict):
        raise HamiltonianFileError("top level must be an object", 1)
    unknown = set(doc) - {"n_qubits", "terms", "metadata"}
    if unknown:
        raise HamiltonianFileError(f"unknown keys {sorted(unknown)}")
    n = doc.get("n_qubits")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise HamiltonianFileError("n_qubits must be a positive integer", _line_of(text, '"n_qubits"'))
    terms = doc.get("terms")
    if not isinstance(terms, list):
        raise HamiltonianFileError("terms must be a list", _line_of(text, '"terms"'))
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise HamiltonianFileError("metadata must be an object", _line_of(text, '"metadata"'))

    seen: dict[str, int] = {}
    parsed = []
    cursor = 0
    for i, entry in enumerate(terms):
        line = _line_of(text, '"pauli"', cursor)
        if line is not None:
            cursor = text.find('"pauli"', cursor) + 1
        if not isinstance(entry, dict) or set(entry) != {"pauli", "coeff"}:
            raise HamiltonianFileError(f"term {i} must have exactly 'pauli' and 'coeff'", line)
        label, coeff = entry["pauli"], entry["coeff"]
        if not isinstance(label, str) or not label or set(label.upper()) - set("IXYZ"):
            raise HamiltonianFileError(f"term {i}: bad Pauli string {label!r}", line)
        if not isinstance(coeff, (int, float)) or isinstance(coeff, bool) or not math.isfinite(coeff):
            raise HamiltonianFileError(f"term {i}: coefficient must be a finite real number", line)
        if len(label) != n:
            raise TermWidthError(f"term {i}: {label!r} has length {len(label)}, expected {n}", line)
        key = label.upper()
        if key in seen:
            raise DuplicateTermError(f"term {i}: duplicate Pauli string {label!r} (first at term {seen[key]})", line)
        seen[key] = i
        parsed.append((float(coeff), PauliString.from_label(key)))
    return PauliSum(n, parsed), metadata


def load_hamiltonian(path: str | Path, with_metadata: bool = False):
    text = Path(path).read_text(encoding="utf-8")
    h, meta = loads_hamiltonian(text)
    return (h, meta) if with_metadata else h


def spectral_norm(h: PauliSum, limit: int = DENSE_LIMIT) -> float:
    """Largest |eigenvalue| of the dense Hermitian matrix."""
    eig = np.linalg.eigvalsh(to_dense_matrix(h, limit))
    return float(np.max(np.abs(eig)))


def default_time(h: PauliSum, divisor: float = 4.0, norm: float | None = None) -> float:
    """pi / (divisor * ||H||)."""
    if divisor <= 0:
        raise ValueError("divisor must be positive")
    norm = spectral_norm(h) if norm is None else norm
    if norm == 0:
        raise ValueError("zero Hamiltonian has no default time")
    return math.pi / (divisor * norm)
