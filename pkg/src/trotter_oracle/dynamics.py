"""Dense statevector dynamics and Suzuki-Trotter rotation schedules.

States are plain complex numpy arrays of length 2^N. Functions that act on a
state also accept a 2-D array whose columns are states.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .pauli import DENSE_LIMIT, DenseLimitError, PauliString, PauliSum, WidthMismatchError, to_dense_matrix

STATE_LIMIT = 20


class NonUnitaryError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def state(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k].copy()


@dataclass(frozen=True)
class EffectiveSpectrum:
    evolution_time: float
    effective_eigenvalues: np.ndarray
    effective_eigenvectors: np.ndarray


@dataclass(frozen=True)
class RotationSchedule:
    """Ordered rotations; each (P, angle) means exp(-i * angle * P).

    ``step_time`` is the duration of one Trotter step, so the whole schedule
    evolves for ``n_steps * step_time``.
    """

    n_qubits: int
    rotations: tuple[tuple[PauliString, float], ...]
    order_p: int
    n_steps: int
    step_time: float
    ordering_tag: str = "stored"

    @property
    def total_time(self) -> float:
        return self.n_steps * self.step_time

    def __len__(self) -> int:
        return len(self.rotations)

    def angle_totals(self) -> dict[PauliString, float]:
        out: dict[PauliString, float] = {}
        for p, a in self.rotations:
            out[p] = out.get(p, 0.0) + a
        return out


def suzuki_weight(p: int) -> float:
    """Outer step fraction of the order-p recursion, 1 / (4 - 4^{1/(p-1)})."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (p - 1)))


def _check_order(p: int) -> None:
    if p != 1 and (p < 2 or p % 2):
        raise ValueError(f"order must be 1 or an even integer >= 2, got {p}")


def _step(paulis, coeffs, p: int, tau: float) -> list[tuple[PauliString, float]]:
    if p == 1:
        return [(P, c * tau) for c, P in zip(coeffs, paulis)]
    if p == 2:
        half = [(P, c * tau / 2) for c, P in zip(coeffs, paulis)]
        return half + half[::-1]
    a = suzuki_weight(p)
    outer = _step(paulis, coeffs, p - 2, a * tau)
    middle = _step(paulis, coeffs, p - 2, (1 - 4 * a) * tau)
    return outer + outer + middle + outer + outer


def _merge_adjacent(rotations):
    merged: list[tuple[PauliString, float]] = []
    for p, a in rotations:
        if merged and merged[-1][0] == p:
            merged[-1] = (p, merged[-1][1] + a)
        else:
            merged.append((p, a))
    return merged


def trotter_schedule(h: PauliSum, p: int, n_steps: int = 1, t: float = 1.0, *,
                     merge: bool = False, ordering_tag: str = "stored") -> RotationSchedule:
    """Rotation list for [U'_p(t/S)]^S in the Hamiltonian's stored term order."""
    _check_order(p)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    tau = t / n_steps
    one = _step(h.paulis, h.coefficients.tolist(), p, tau)
    rotations = one * n_steps
    if merge:
        rotations = _merge_adjacent(rotations)
    return RotationSchedule(h.n_qubits, tuple(rotations), p, n_steps, tau, ordering_tag)


@lru_cache(maxsize=8192)
def _kernel(pauli: PauliString) -> tuple[np.ndarray, np.ndarray]:
    # (P psi)[c] = i^{n_y} (-1)^{|z & (c^x)|} psi[c ^ x]
    xm, zm = pauli.index_masks()
    rows = np.arange(1 << pauli.n_qubits)
    src = rows ^ xm
    sign = 1 - 2 * (np.bitwise_count(src & zm).astype(np.int64) & 1)
    return src, (1j ** (pauli.n_y % 4)) * sign


def apply_pauli(pauli: PauliString, psi: np.ndarray) -> np.ndarray:
    src, factor = _kernel(pauli)
    if psi.ndim == 1:
        return factor * psi[src]
    return factor[:, None] * psi[src]


def apply_rotation(pauli: PauliString, angle: float, psi: np.ndarray) -> np.ndarray:
    """exp(-i angle P) psi = cos(angle) psi - i sin(angle) P psi."""
    if pauli.is_identity:
        return np.exp(-1j * angle) * psi
    return np.cos(angle) * psi - 1j * np.sin(angle) * apply_pauli(pauli, psi)


def _dim_qubits(psi: np.ndarray) -> int:
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise WidthMismatchError(f"state length {dim} is not a power of two")
    return n


def apply_schedule(schedule: RotationSchedule, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if _dim_qubits(psi) != schedule.n_qubits:
        raise WidthMismatchError(
            f"schedule acts on {schedule.n_qubits} qubits, state has {_dim_qubits(psi)}"
        )
    if schedule.n_qubits > STATE_LIMIT:
        raise DenseLimitError(f"{schedule.n_qubits} qubits exceeds the statevector limit of {STATE_LIMIT}")
    out = psi.copy()
    for pauli, angle in schedule.rotations:
        out = apply_rotation(pauli, angle, out)
    return out


def schedule_unitary(schedule: RotationSchedule, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Matrix of the schedule, built column-by-column from basis states."""
    if schedule.n_qubits > limit:
        raise DenseLimitError(f"{schedule.n_qubits} qubits exceeds the dense limit of {limit}")
    return apply_schedule(schedule, np.eye(1 << schedule.n_qubits, dtype=complex))


def exact_eigenpairs(h: PauliSum, limit: int = DENSE_LIMIT) -> SpectralData:
    vals, vecs = np.linalg.eigh(to_dense_matrix(h, limit))
    return SpectralData(vals, vecs)


def exact_evolve(spec: SpectralData, t: float, psi: np.ndarray) -> np.ndarray:
    """exp(-i H t) psi through the eigenbasis."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[0] != spec.dim:
        raise WidthMismatchError(f"state length {psi.shape[0]} vs spectrum dimension {spec.dim}")
    phases = np.exp(-1j * spec.eigenvalues * t)
    coeffs = spec.eigenvectors.conj().T @ psi
    if psi.ndim == 1:
        return spec.eigenvectors @ (phases * coeffs)
    return spec.eigenvectors @ (phases[:, None] * coeffs)


def exact_unitary(spec: SpectralData, t: float) -> np.ndarray:
    v = spec.eigenvectors
    return (v * np.exp(-1j * spec.eigenvalues * t)) @ v.conj().T


def effective_spectrum(u: np.ndarray, t: float, tol: float = 1e-8) -> EffectiveSpectrum:
    """Eigenphases of a unitary as energies, lambda' = -arg(mu) / t in (-pi/t, pi/t]."""
    if t <= 0:
        raise ValueError("evolution time must be positive")
    u = np.asarray(u, dtype=complex)
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > tol:
        raise NonUnitaryError(f"matrix deviates from unitarity by {dev:.3e}")
    # complex Schur form of a normal matrix is diagonal with unitary Z
    tri, z = scipy.linalg.schur(u, output="complex")
    phase = -np.angle(np.diag(tri))
    phase[phase <= -np.pi] += 2 * np.pi
    return EffectiveSpectrum(t, phase / t, z)


def match_eigenpair(target: np.ndarray, eff: EffectiveSpectrum) -> tuple[int, float]:
    """Index of the effective eigenvector with the largest squared overlap (lowest index on ties)."""
    if target.shape[0] != eff.effective_eigenvectors.shape[0]:
        raise WidthMismatchError("target and effective spectrum dimensions differ")
    overlaps = np.abs(eff.effective_eigenvectors.conj().T @ target) ** 2
    j = int(np.argmax(overlaps))
    return j, float(overlaps[j])


def query_count(p: int, n_steps: int, n_terms: int) -> tuple[int, int]:
    """(calls to the second-order formula, single-Pauli evolutions)."""
    if p < 2 or p % 2:
        raise ValueError(f"query counting needs an even order >= 2, got {p}")
    queries = n_steps * 5 ** (p // 2 - 1)
    return queries, queries * 2 * n_terms


def basis_state(n_qubits: int, index: int = 0) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def haar_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random state from normalized complex Gaussian amplitudes."""
    dim = 1 << n_qubits
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)
