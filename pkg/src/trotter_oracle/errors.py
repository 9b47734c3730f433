"""Simulation-error metrics for product formulas.

Every phase is taken on the principal branch (-pi, pi]. Amplitudes whose
modulus falls below ``MIN_AMPLITUDE`` carry no usable phase and raise
:class:`UndefinedPhaseError` instead of returning noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    RotationSchedule,
    SpectralData,
    apply_schedule,
    effective_spectrum,
    exact_eigenpairs,
    exact_evolve,
    exact_unitary,
    haar_state,
    match_eigenpair,
    schedule_unitary,
    trotter_schedule,
)
from .pauli import PauliSum, commutator_bound
from .rng import RngSeed, as_seed

MIN_AMPLITUDE = 1e-13
DEGENERATE_ERROR = 1e-13


class UndefinedPhaseError(ArithmeticError):
    pass


class UnfittableError(ArithmeticError):
    pass


def _spectrum(h_or_spec: PauliSum | SpectralData) -> SpectralData:
    return h_or_spec if isinstance(h_or_spec, SpectralData) else exact_eigenpairs(h_or_spec)


def _phase(amplitude: complex) -> float:
    if abs(amplitude) < MIN_AMPLITUDE:
        raise UndefinedPhaseError(f"amplitude modulus {abs(amplitude):.3e} too small to define a phase")
    return float(np.angle(amplitude))


def eigenvalue_shift(h: PauliSum | SpectralData, p: int, n_steps: int, t: float, k: int = 0,
                     schedule: RotationSchedule | None = None) -> float:
    """Signed lambda_k - lambda'_k, with lambda'_k from the best-overlap effective eigenvector."""
    spec = _spectrum(h)
    if schedule is None:
        schedule = trotter_schedule(h, p, n_steps, t)
    eff = effective_spectrum(schedule_unitary(schedule), schedule.total_time)
    j, _ = match_eigenpair(spec.eigenvectors[:, k], eff)
    return float(spec.eigenvalues[k] - eff.effective_eigenvalues[j])


def trotter_error(h: PauliSum, p: int, n_steps: int, t: float, k: int = 0,
                  spec: SpectralData | None = None) -> float:
    """|lambda_k - lambda'_k| for the order-p formula with n_steps steps over time t."""
    schedule = trotter_schedule(h, p, n_steps, t)
    return abs(eigenvalue_shift(spec if spec is not None else h, p, n_steps, t, k, schedule))


def overlap(spec: SpectralData, schedule: RotationSchedule, psi: np.ndarray) -> complex:
    """<psi| U(t)^dagger U'(t) |psi> with t the schedule's total time."""
    exact = exact_evolve(spec, schedule.total_time, psi)
    return complex(np.vdot(exact, apply_schedule(schedule, psi)))


def reference_overlap(target: RotationSchedule, reference: RotationSchedule, psi: np.ndarray) -> complex:
    """<psi| U_ref(t)^dagger U'(t) |psi>; no diagonalization involved."""
    if target.n_qubits != reference.n_qubits:
        raise ValueError("target and reference act on different widths")
    if not math.isclose(target.total_time, reference.total_time, rel_tol=1e-12, abs_tol=1e-15):
        raise ValueError("target and reference must share the evolution time")
    return complex(np.vdot(apply_schedule(reference, psi), apply_schedule(target, psi)))


def phase_error(h: PauliSum | SpectralData, schedule: RotationSchedule, psi: np.ndarray) -> float:
    return _phase(overlap(_spectrum(h), schedule, psi))


def approx_phase_error(target: RotationSchedule, reference: RotationSchedule, psi: np.ndarray) -> float:
    return _phase(reference_overlap(target, reference, psi))


def fidelity_error(reference: PauliSum | SpectralData | RotationSchedule, target: RotationSchedule,
                   psi: np.ndarray) -> float:
    """1 - |amplitude|^2.

    With a Hamiltonian or spectrum as ``reference`` the amplitude is against
    exact evolution; with a schedule it is the reference-approximation
    amplitude, i.e. 1 - x^2 - y^2 from the Hadamard-test parts.
    """
    if isinstance(reference, RotationSchedule):
        amp = reference_overlap(target, reference, psi)
    else:
        amp = overlap(_spectrum(reference), target, psi)
    return float(min(1.0, max(0.0, 1.0 - abs(amp) ** 2)))


def operator_norm_exact(h: PauliSum | SpectralData, schedule: RotationSchedule) -> float:
    """Largest singular value of U(t) - U'(t)."""
    spec = _spectrum(h)
    diff = exact_unitary(spec, schedule.total_time) - schedule_unitary(schedule)
    return float(np.linalg.norm(diff, 2))


def sampled_phase_errors(h: PauliSum | SpectralData, schedule: RotationSchedule, m: int,
                         seed: RngSeed | int, batch: int = 256) -> np.ndarray:
    """|theta| on m Haar-random states, in draw order."""
    if m < 1:
        raise ValueError("m must be >= 1")
    spec = _spectrum(h)
    rng = as_seed(seed, "opnorm").generator()
    n = schedule.n_qubits
    out = np.empty(m)
    done = 0
    while done < m:
        size = min(batch, m - done)
        states = np.stack([haar_state(n, rng) for _ in range(size)], axis=1)
        exact = exact_evolve(spec, schedule.total_time, states)
        approx = apply_schedule(schedule, states)
        amps = np.einsum("ij,ij->j", exact.conj(), approx)
        out[done:done + size] = np.abs(np.angle(amps))
        done += size
    return out


def operator_norm_sampled(h: PauliSum | SpectralData, schedule: RotationSchedule, m: int,
                          seed: RngSeed | int) -> float:
    """Largest |phase error| over m Haar-random states."""
    return float(np.max(sampled_phase_errors(h, schedule, m, seed)))


def eigenstate_phase_errors(h: PauliSum | SpectralData, schedule: RotationSchedule) -> np.ndarray:
    """Signed phase error on every exact eigenstate."""
    spec = _spectrum(h)
    approx = schedule_unitary(schedule) @ spec.eigenvectors
    amps = np.einsum("ij,ij->j", spec.eigenvectors.conj(), approx) * np.exp(1j * spec.eigenvalues * schedule.total_time)
    return np.angle(amps)


@dataclass
class WkFit:
    w: float
    exponent_check: float
    r_squared: float
    t_grid: np.ndarray
    errors: np.ndarray
    order: int
    source: str
    w_commutator: float | None = None
    w_operator: float | None = None
    intercept_free: float = field(default=float("nan"), repr=False)


def log_grid(norm: float, n_points: int = 10, lo_divisor: float = 4.0, hi_divisor: float = 2.0) -> np.ndarray:
    """n_points log-spaced times in [pi/(lo_divisor ||H||), pi/(hi_divisor ||H||)]."""
    return np.geomspace(math.pi / (lo_divisor * norm), math.pi / (hi_divisor * norm), n_points)


def fit_power_law(t: np.ndarray, errors: np.ndarray, power: int) -> tuple[float, float, float, float]:
    """(W, r^2, free slope, free intercept) for log e = log W + power * log t."""
    t = np.asarray(t, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= DEGENERATE_ERROR):
        raise UnfittableError(f"error values at or below {DEGENERATE_ERROR:g} cannot be fitted")
    lt, le = np.log(t), np.log(errors)
    log_w = float(np.mean(le - power * lt))
    resid = le - (log_w + power * lt)
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    slope, intercept = np.polyfit(lt, le, 1)
    return math.exp(log_w), max(0.0, r2), float(slope), float(intercept)


def fit_wk(h: PauliSum, p: int = 2, k: int = 0, grid: np.ndarray | None = None, source: str = "exact",
           p_ref: int = 4, with_bounds: bool = False, spec: SpectralData | None = None) -> WkFit:
    """Fit eps_k(t) = W t^p on a log-spaced time grid.

    ``source="exact"`` uses |lambda_k - lambda'_k| from diagonalization;
    ``source="approx_phase"`` uses |theta~|/t against an order-``p_ref``
    reference on the exact eigenstate, the quantity a device could measure.
    """
    if source not in ("exact", "approx_phase"):
        raise ValueError(f"unknown source {source!r}")
    spec = spec if spec is not None else exact_eigenpairs(h)
    norm = float(np.max(np.abs(spec.eigenvalues)))
    grid = log_grid(norm) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be strictly increasing")
    psi = spec.eigenvectors[:, k]
    errs = np.empty(len(grid))
    for i, t in enumerate(grid):
        target = trotter_schedule(h, p, 1, t)
        if source == "exact":
            errs[i] = abs(eigenvalue_shift(spec, p, 1, t, k, target))
        else:
            reference = trotter_schedule(h, p_ref, 1, t)
            amp = reference_overlap(target, reference, psi)
            errs[i] = abs(_phase(amp)) / t if abs(amp) >= MIN_AMPLITUDE else 0.0
    w, r2, slope, intercept = fit_power_law(grid, errs, p)
    fit = WkFit(w, slope, r2, grid, errs, p, source, intercept_free=intercept)
    if with_bounds:
        if p == 2:
            fit.w_commutator = commutator_bound(h)
        # smallest W_O with eps <= Delta_p / t <= W_O t^p on the grid
        fit.w_operator = max(
            operator_norm_exact(spec, trotter_schedule(h, p, 1, t)) / t ** (p + 1) for t in grid
        )
    return fit


@dataclass
class ErrorReport:
    t: float
    order: int
    k: int
    trotter_error: float
    phase_error: float
    approx_phase_error: float
    phase_error_energy: float
    fidelity_error: float
    operator_norm: float
    sampled_norm: float | None = None


def error_report(h: PauliSum, p: int, t: float, k: int = 0, p_ref: int = 4,
                 m_samples: int = 0, seed: RngSeed | int = 0) -> ErrorReport:
    spec = exact_eigenpairs(h)
    target = trotter_schedule(h, p, 1, t)
    reference = trotter_schedule(h, p_ref, 1, t)
    psi = spec.eigenvectors[:, k]
    theta = phase_error(spec, target, psi)
    return ErrorReport(
        t=t,
        order=p,
        k=k,
        trotter_error=abs(eigenvalue_shift(spec, p, 1, t, k, target)),
        phase_error=theta,
        approx_phase_error=approx_phase_error(target, reference, psi),
        phase_error_energy=abs(theta) / t,
        fidelity_error=fidelity_error(spec, target, psi),
        operator_norm=operator_norm_exact(spec, target),
        sampled_norm=operator_norm_sampled(spec, target, m_samples, seed) if m_samples else None,
    )


def relative_error(estimate: float, truth: float) -> float:
    return abs(estimate - truth) / abs(truth)

