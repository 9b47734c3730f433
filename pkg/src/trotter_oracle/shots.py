"""Shot-level simulation of the Hadamard test and fidelity-controlled states.

The two Hadamard circuits (real and imaginary part) are modelled at the
amplitude level: the noiseless amplitude is computed from statevectors, and
each shot is a Bernoulli draw with 0-outcome probability (1 + v) / 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import RotationSchedule, SpectralData, exact_eigenpairs
from .errors import phase_error, reference_overlap
from .pauli import PauliSum
from .rng import RngSeed, as_seed

Z95 = 1.96


class UncertaintyUndefinedError(ArithmeticError):
    pass


@dataclass(frozen=True)
class AmplitudePair:
    x: float
    y: float

    @property
    def phase(self) -> float:
        return math.atan2(self.y, self.x)

    @property
    def modulus(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def fidelity_error(self) -> float:
        return 1.0 - self.x**2 - self.y**2


@dataclass(frozen=True)
class ShotEstimate:
    estimate: float
    stderr: float
    shots: int

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.estimate - Z95 * self.stderr, self.estimate + Z95 * self.stderr)

    def excludes_zero(self) -> bool:
        lo, hi = self.ci95
        return lo > 0 or hi < 0


def hadamard_amplitude(target: RotationSchedule, reference: RotationSchedule, psi: np.ndarray) -> AmplitudePair:
    amp = reference_overlap(target, reference, psi)
    return AmplitudePair(amp.real, amp.imag)


def _estimate_part(value: float, n: int, rng: np.random.Generator) -> ShotEstimate:
    p0 = min(1.0, max(0.0, (1.0 + value) / 2.0))
    n0 = int(rng.binomial(n, p0))
    est = (2 * n0 - n) / n
    return ShotEstimate(est, math.sqrt(max(0.0, 1.0 - est * est) / n), n)


def sample_amplitude(truth: AmplitudePair, shots_per_part: int, seed: RngSeed | int) -> tuple[ShotEstimate, ShotEstimate]:
    """Estimate x and y from ``shots_per_part`` shots of each circuit."""
    if shots_per_part < 1:
        raise ValueError("shots_per_part must be >= 1")
    rng = as_seed(seed, "shots").generator()
    return _estimate_part(truth.x, shots_per_part, rng), _estimate_part(truth.y, shots_per_part, rng)


def phase_from_parts(x: ShotEstimate, y: ShotEstimate) -> ShotEstimate:
    """atan2(y, x) with delta_theta = (x^2 + y^2)^{-1} sqrt(y^2 dx^2 + x^2 dy^2)."""
    r2 = x.estimate**2 + y.estimate**2
    if r2 < 1e-8:
        raise UncertaintyUndefinedError(f"estimated amplitude modulus^2 {r2:.2e} is too small")
    stderr = math.sqrt(y.estimate**2 * x.stderr**2 + x.estimate**2 * y.stderr**2) / r2
    return ShotEstimate(math.atan2(y.estimate, x.estimate), stderr, x.shots + y.shots)


def estimate_phase_with_shots(target: RotationSchedule, reference: RotationSchedule, psi: np.ndarray,
                              shots: int, seed: RngSeed | int, real_fraction: float = 0.5) -> ShotEstimate:
    """Shot-noise estimate of theta~; ``shots`` is the total over both circuits."""
    if not 0 < real_fraction < 1:
        raise ValueError("real_fraction must lie strictly between 0 and 1")
    n_real = max(1, int(round(shots * real_fraction)))
    n_imag = max(1, shots - n_real)
    truth = hadamard_amplitude(target, reference, psi)
    rng = as_seed(seed, "shots").generator()
    x = _estimate_part(truth.x, n_real, rng)
    y = _estimate_part(truth.y, n_imag, rng)
    return phase_from_parts(x, y)


def random_state_with_fidelity(target: np.ndarray, f: float, seed: RngSeed | int) -> np.ndarray:
    """sqrt(f)|target> + sqrt(1-f)|phi>, |phi> Haar-random orthogonal to target.

    ``target`` must be normalized; it is used as-is so that f=1 returns it exactly.
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fidelity {f} outside [0, 1]")
    target = np.asarray(target, dtype=complex)
    rng = as_seed(seed, "fidelity-state").generator()
    dim = target.shape[0]
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v -= np.vdot(target, v) * target
    v -= np.vdot(target, v) * target
    v /= np.linalg.norm(v)
    return math.sqrt(f) * target + math.sqrt(1.0 - f) * v


@dataclass(frozen=True)
class FidelityRow:
    f: float
    mean_theta: float
    ci_low: float
    ci_high: float
    n_states: int


def fidelity_sweep(h: PauliSum | SpectralData, schedule: RotationSchedule, k: int, f_grid,
                   states_per_point: int = 100, seed: RngSeed | int = 0) -> list[FidelityRow]:
    """Mean phase error over fidelity-f states for each f, with 95% CIs."""
    if states_per_point < 2:
        raise ValueError("states_per_point must be >= 2")
    spec = h if isinstance(h, SpectralData) else exact_eigenpairs(h)
    base = as_seed(seed, "fidelity-sweep")
    target = spec.eigenvectors[:, k]
    rows = []
    for i, f in enumerate(f_grid):
        f = float(f)
        thetas = np.array([
            phase_error(spec, schedule, random_state_with_fidelity(target, f, base.child(i, r)))
            for r in range(states_per_point)
        ])
        if np.all(thetas == thetas[0]):  # f=1: every state is the eigenstate
            mean, half = float(thetas[0]), 0.0
        else:
            mean = float(thetas.mean())
            half = Z95 * float(thetas.std(ddof=1)) / math.sqrt(states_per_point)
        rows.append(FidelityRow(f, mean, mean - half, mean + half, states_per_point))
    return rows
