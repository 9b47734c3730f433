"""Experiment catalog: configuration schema, task expansion and CSV rows.

Each experiment expands a resolved configuration into independent tasks.
Tasks carry their own derived seed, so rows are identical whatever order or
process they run in; the runner concatenates rows in task order.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .dynamics import exact_eigenpairs, trotter_schedule
from .errors import (
    approx_phase_error,
    eigenstate_phase_errors,
    eigenvalue_shift,
    fit_power_law,
    log_grid,
    operator_norm_exact,
    phase_error,
    reference_overlap,
    relative_error,
    sampled_phase_errors,
)
from .hamiltonians import load_hamiltonian, random_pauli_hamiltonian
from .pauli import PauliSum, commutator_bound, l1_norm
from .qre import compare_estimates
from .rng import RngSeed
from .shots import estimate_phase_with_shots, fidelity_sweep, hadamard_amplitude


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(message)


@dataclass
class Experiment:
    name: str
    summary: str
    defaults: dict[str, Any]
    columns: list[str]
    expand: Callable[[dict], list[dict]]
    run_task: Callable[[dict, dict], list[list]]
    notes: dict[str, str] = field(default_factory=dict)


COMMON_DEFAULTS = {"master_seed": 0, "output_dir": "runs"}
DEFAULT_GRID = {"points": 10, "lo_divisor": 4.0, "hi_divisor": 2.0}
DEFAULT_SWEEP = [2, 3, 4, 5, 6, 7, 8]


# -- helpers -------------------------------------------------------------------

def system_seed(config: dict, label: str) -> int:
    return RngSeed(int(config["master_seed"]), f"{config['experiment']}/{label}").derived_seed()


def build_hamiltonian(spec: Any, config: dict, label: str = "system") -> PauliSum:
    if isinstance(spec, str):
        return load_hamiltonian(spec)
    if "file" in spec:
        return load_hamiltonian(spec["file"])
    seed = spec.get("seed")
    if seed is None:
        seed = system_seed(config, label)
    return random_pauli_hamiltonian(int(spec["n"]), spec.get("l"), RngSeed(int(seed), "hamiltonian"))


def resolve_time(time_spec: dict, norm: float) -> float:
    if "t" in time_spec:
        return float(time_spec["t"])
    return math.pi / (float(time_spec["divisor"]) * norm)


def resolve_grid(time_spec: dict, norm: float) -> np.ndarray:
    grid = time_spec.get("grid", DEFAULT_GRID)
    if isinstance(grid, list):
        return np.asarray(grid, dtype=float)
    g = {**DEFAULT_GRID, **grid}
    return log_grid(norm, int(g["points"]), float(g["lo_divisor"]), float(g["hi_divisor"]))


def _sweep_tasks(config: dict) -> list[dict]:
    tasks = []
    for n in config["n_values"]:
        for i in range(int(config["seeds_per_n"])):
            label = f"system/n={n}/{i}"
            tasks.append({"label": label, "n": int(n), "replicate": i, "seed": system_seed(config, label)})
    return tasks


def _sweep_system(task: dict, config: dict) -> PauliSum:
    return random_pauli_hamiltonian(task["n"], config.get("l"), RngSeed(task["seed"], "hamiltonian"))


def _single_task(config: dict) -> list[dict]:
    return [{"label": "system", "seed": system_seed(config, "system")}]


def _norm(spec) -> float:
    return float(np.max(np.abs(spec.eigenvalues)))


# -- phase-accuracy ------------------------------------------------------------

def _phase_accuracy_tasks(config):
    return [{"label": f"p_prime={pp}", "p_prime": int(pp)} for pp in config["p_prime"]]


def _phase_accuracy_run(config, task):
    h = build_hamiltonian(config["hamiltonian"], config)
    spec = exact_eigenpairs(h)
    t = resolve_time(config["time_spec"], _norm(spec))
    psi = spec.eigenvectors[:, config["k"]]
    target = trotter_schedule(h, config["p"], config["s"], t)
    reference = trotter_schedule(h, task["p_prime"], config["s_ref"], t)
    theta = phase_error(spec, target, psi)
    tilde = approx_phase_error(target, reference, psi)
    return [[task["p_prime"], tilde, theta, relative_error(tilde, theta)]]


# -- size-sweep ----------------------------------------------------------------

def _size_sweep_run(config, task):
    h = _sweep_system(task, config)
    spec = exact_eigenpairs(h)
    t = resolve_time(config["time_spec"], _norm(spec))
    psi = spec.eigenvectors[:, config["k"]]
    target = trotter_schedule(h, config["p"], 1, t)
    reference = trotter_schedule(h, config["p_prime"], 1, t)
    theta = phase_error(spec, target, psi)
    tilde = approx_phase_error(target, reference, psi)
    return [[task["n"], len(h), task["replicate"], t, theta, tilde, relative_error(tilde, theta)]]


# -- error-ratio ---------------------------------------------------------------

def _error_ratio_run(config, task):
    h = _sweep_system(task, config)
    spec = exact_eigenpairs(h)
    t = resolve_time(config["time_spec"], _norm(spec))
    k = config["k"]
    psi = spec.eigenvectors[:, k]
    target = trotter_schedule(h, config["p"], 1, t)
    reference = trotter_schedule(h, config["p_prime"], 1, t)
    eps_ts = abs(eigenvalue_shift(spec, config["p"], 1, t, k, target))
    eps_tilde = abs(approx_phase_error(target, reference, psi)) / t
    eps_c = commutator_bound(h) * t**2
    return [[task["n"], len(h), task["replicate"], t, eps_ts, eps_tilde, eps_c, eps_c / eps_ts, eps_tilde / eps_ts]]


# -- resources -----------------------------------------------------------------

def _resources_run(config, task):
    h = _sweep_system(task, config)
    norm = _norm(exact_eigenpairs(h))
    grid = resolve_grid(config["time_spec"], norm)
    cmp = compare_estimates(h, config["k"], config["epsilon"], config["p"], config["p_prime"], grid)
    rows = []
    for est_name, est in (("classical", cmp.classical), ("quantum", cmp.quantum), ("exact", cmp.exact)):
        rows.append([task["n"], len(h), task["replicate"], config["epsilon"], est_name, est.w, est.t_star,
                     est.t_max, est.feasible, est.b_star_real, est.b_star, est.q_star, est.o_star])
    rows.append([task["n"], len(h), task["replicate"], config["epsilon"], "measurement", "", "", "", "", "", "",
                 cmp.measurement_queries, cmp.measurement_operations])
    return rows


# -- shots ---------------------------------------------------------------------

def _shots_tasks(config):
    tasks = []
    for shots in config["shots"]:
        for r in range(int(config["repetitions"])):
            label = f"shots={int(shots)}/{r}"
            tasks.append({"label": label, "shots": int(shots), "replicate": r, "seed": system_seed(config, label)})
    return tasks


def _shots_run(config, task):
    h = build_hamiltonian(config["hamiltonian"], config)
    spec = exact_eigenpairs(h)
    t = resolve_time(config["time_spec"], _norm(spec))
    psi = spec.eigenvectors[:, config["k"]]
    target = trotter_schedule(h, config["p"], config["s"], t)
    reference = trotter_schedule(h, config["p_prime"], config["s_ref"], t)
    truth = hadamard_amplitude(target, reference, psi)
    est = estimate_phase_with_shots(target, reference, psi, task["shots"], RngSeed(task["seed"], "shots"))
    lo, hi = est.ci95
    return [[task["shots"], task["replicate"], est.estimate, est.stderr, lo, hi, truth.phase, est.excludes_zero()]]


# -- fidelity-sweep ------------------------------------------------------------

def _fidelity_run(config, task):
    h = build_hamiltonian(config["hamiltonian"], config)
    spec = exact_eigenpairs(h)
    t = resolve_time(config["time_spec"], _norm(spec))
    k = config["k"]
    schedule = trotter_schedule(h, config["p"], config["s"], t)
    theta_k = phase_error(spec, schedule, spec.eigenvectors[:, k])
    rows = fidelity_sweep(spec, schedule, k, config["f_grid"], config["states_per_point"], RngSeed(task["seed"]))
    return [[r.f, r.mean_theta, r.ci_low, r.ci_high, theta_k, r.n_states] for r in rows]


# -- opnorm --------------------------------------------------------------------

def _opnorm_run(config, task):
    h = build_hamiltonian(config["hamiltonian"], config)
    spec = exact_eigenpairs(h)
    t = resolve_time(config["time_spec"], _norm(spec))
    schedule = trotter_schedule(h, config["p"], config["s"], t)
    m_max = int(config["m_samples"])
    samples = sampled_phase_errors(spec, schedule, m_max, RngSeed(task["seed"], "opnorm"))
    running = np.maximum.accumulate(samples)
    delta = operator_norm_exact(spec, schedule)
    eig = np.abs(eigenstate_phase_errors(spec, schedule))
    grid = config["m_grid"] or [m for m in (10**e for e in range(0, 12)) if m <= m_max]
    return [[int(m), float(running[int(m) - 1]), delta, float(eig.max()), float(eig.min())] for m in grid if m <= m_max]


# -- fit-wk --------------------------------------------------------------------

def _fit_wk_run(config, task):
    h = build_hamiltonian(config["hamiltonian"], config)
    spec = exact_eigenpairs(h)
    grid = resolve_grid(config["time_spec"], _norm(spec))
    k, p = config["k"], config["p"]
    psi = spec.eigenvectors[:, k]
    rows = []
    for source in config["sources"]:
        errs = []
        for t in grid:
            target = trotter_schedule(h, p, 1, t)
            if source == "exact":
                errs.append(abs(eigenvalue_shift(spec, p, 1, t, k, target)))
            else:
                reference = trotter_schedule(h, config["p_prime"], 1, t)
                errs.append(abs(np.angle(reference_overlap(target, reference, psi))) / t)
        w, r2, slope, _ = fit_power_law(grid, np.array(errs), p)
        rows.extend([source, float(t), e, w, r2, slope] for t, e in zip(grid, errs))
    return rows


# -- commutator-bound ----------------------------------------------------------

def _commutator_run(config, task):
    h = _sweep_system(task, config)
    spec = exact_eigenpairs(h)
    norm = _norm(spec)
    grid = resolve_grid(config["time_spec"], norm)
    errs = [abs(eigenvalue_shift(spec, 2, 1, t, config["k"], trotter_schedule(h, 2, 1, t))) for t in grid]
    w, r2, slope, _ = fit_power_law(grid, np.array(errs), 2)
    w_c = commutator_bound(h)
    bound_holds = all(e <= w_c * t**2 for t, e in zip(grid, errs))
    return [[task["n"], len(h), task["replicate"], w_c, l1_norm(h), norm, w, r2, w_c / w, bound_holds]]


CATALOG: dict[str, Experiment] = {}


def _register(exp: Experiment) -> None:
    CATALOG[exp.name] = exp


_register(Experiment(
    "phase-accuracy",
    "Relative error of the reference-approximation phase against the exact phase error, per reference order.",
    {"hamiltonian": {"n": 3, "l": None, "seed": None}, "p": 2, "s": 1, "p_prime": [2, 4, 6], "s_ref": 1,
     "time_spec": {"divisor": 4.0}, "k": 0},
    ["p_prime", "theta_tilde", "theta_exact", "rel_err"],
    _phase_accuracy_tasks, _phase_accuracy_run,
    {"p_prime": "list of reference orders; default {2,4,6}", "time_spec": "t = pi/(divisor ||H||) or explicit t"},
))
_register(Experiment(
    "size-sweep",
    "Reference-approximation relative error across random Hamiltonians of growing size (L = N^2).",
    {"n_values": DEFAULT_SWEEP, "seeds_per_n": 5, "l": None, "p": 2, "p_prime": 4,
     "time_spec": {"divisor": 4.0}, "k": 0},
    ["n_qubits", "n_terms", "replicate", "t", "theta_exact", "theta_tilde", "rel_err"],
    _sweep_tasks, _size_sweep_run,
))
_register(Experiment(
    "error-ratio",
    "Commutator bound and measurable phase-error estimate, each divided by the exact Trotter error.",
    {"n_values": DEFAULT_SWEEP, "seeds_per_n": 10, "l": None, "p": 2, "p_prime": 4,
     "time_spec": {"divisor": 4.0}, "k": 0},
    ["n_qubits", "n_terms", "replicate", "t", "eps_ts", "eps_theta_tilde", "eps_commutator",
     "ratio_classical", "ratio_quantum"],
    _sweep_tasks, _error_ratio_run,
))
_register(Experiment(
    "resources",
    "Optimal QPE qubits/queries/operations from commutator, measured and exact error constants, "
    "plus the operation count of one phase-error measurement.",
    {"n_values": DEFAULT_SWEEP, "seeds_per_n": 3, "l": None, "p": 2, "p_prime": 4, "k": 0, "epsilon": 0.01,
     "time_spec": {"grid": dict(DEFAULT_GRID)}},
    ["n_qubits", "n_terms", "replicate", "epsilon", "estimator", "w", "t_star", "t_max", "feasible",
     "b_star_real", "b_star", "q_star", "o_star"],
    _sweep_tasks, _resources_run,
    {"estimator": "classical | quantum | exact | measurement (q_star/o_star = cost of one Hadamard-test pass)"},
))
_register(Experiment(
    "shots",
    "Shot-sampled Hadamard-test estimates of the approximate phase error with 95% confidence intervals.",
    {"hamiltonian": {"n": 4, "l": None, "seed": None}, "p": 1, "s": 1, "p_prime": 4, "s_ref": 1,
     "time_spec": {"divisor": 1.0}, "k": 0, "shots": [100, 1000, 10000, 100000, 1000000], "repetitions": 1},
    ["shots", "replicate", "estimate", "stderr", "ci95_low", "ci95_high", "theta_tilde_exact", "nonzero_95"],
    _shots_tasks, _shots_run,
    {"ci95_low/ci95_high": "95% confidence interval, estimate -/+ 1.96 stderr",
     "shots": "total shots, split equally between the real and imaginary circuits"},
))
_register(Experiment(
    "fidelity-sweep",
    "Mean phase error over random states with prescribed fidelity to the target eigenstate.",
    {"hamiltonian": {"n": 6, "l": None, "seed": None}, "p": 2, "s": 1, "time_spec": {"divisor": 1.0}, "k": 0,
     "f_grid": [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0], "states_per_point": 100},
    ["f", "mean_theta", "ci95_low", "ci95_high", "theta_eigenstate", "n_states"],
    _single_task, _fidelity_run,
    {"ci95_low/ci95_high": "95% confidence interval on the mean"},
))
_register(Experiment(
    "opnorm",
    "Running maximum of |phase error| over Haar-random states against the exact operator norm.",
    {"hamiltonian": {"n": 4, "l": 16, "seed": None}, "p": 2, "s": 1, "time_spec": {"divisor": 2.0},
     "m_samples": 10000, "m_grid": None},
    ["m", "delta_est", "delta_exact", "max_eigen_theta", "min_eigen_theta"],
    _single_task, _opnorm_run,
    {"m_grid": "sample counts to report; default powers of ten up to m_samples"},
))
_register(Experiment(
    "fit-wk",
    "Fit of the eigenvalue error to W t^p on a log-spaced time grid, from exact and measurable sources.",
    {"hamiltonian": {"n": 4, "l": None, "seed": None}, "p": 2, "p_prime": 4, "k": 0,
     "time_spec": {"grid": dict(DEFAULT_GRID)}, "sources": ["exact", "approx_phase"]},
    ["source", "t", "error", "w", "r_squared", "exponent_check"],
    _single_task, _fit_wk_run,
    {"time_spec": "default grid: 10 points evenly spaced on a log scale in [pi/(4||H||), pi/(2||H||)]"},
))
_register(Experiment(
    "commutator-bound",
    "Commutator-bound constant W_C against the fitted exact constant, with the bound checked on the grid.",
    {"n_values": DEFAULT_SWEEP, "seeds_per_n": 3, "l": None, "k": 0, "time_spec": {"grid": dict(DEFAULT_GRID)}},
    ["n_qubits", "n_terms", "replicate", "w_commutator", "l1_norm", "spectral_norm", "w_fit", "r_squared",
     "ratio", "bound_holds"],
    _sweep_tasks, _commutator_run,
))


def _check_type(key: str, value: Any, default: Any) -> None:
    if default is None or value is None:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif isinstance(default, list):
        ok = isinstance(value, list)
    elif isinstance(default, dict):
        ok = isinstance(value, (dict, str)) if key == "hamiltonian" else isinstance(value, dict)
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError(f"config key '{key}' has the wrong type: {value!r}", key)


def resolve_config(raw: dict) -> dict:
    """Validate a raw config and fill every default; unknown keys are rejected."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    name = raw.get("experiment")
    if name not in CATALOG:
        raise ConfigError(f"config key 'experiment' must be one of {sorted(CATALOG)}, got {name!r}", "experiment")
    exp = CATALOG[name]
    allowed = {"experiment", *COMMON_DEFAULTS, *exp.defaults}
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown config key '{key}' for experiment {name}", key)
    config = {"experiment": name, **copy.deepcopy(COMMON_DEFAULTS), **copy.deepcopy(exp.defaults)}
    for key, value in raw.items():
        if key == "experiment":
            continue
        default = config.get(key)
        _check_type(key, value, default)
        if isinstance(default, dict) and isinstance(value, dict) and key != "time_spec":
            config[key] = {**default, **value}
        else:
            config[key] = copy.deepcopy(value)
    _validate_values(config)
    return config


def _validate_values(config: dict) -> None:
    seed = config["master_seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError("config key 'master_seed' must be an unsigned 64-bit integer", "master_seed")
    for key in ("p", "p_prime"):
        vals = config.get(key)
        if vals is None:
            continue
        for v in vals if isinstance(vals, list) else [vals]:
            if not isinstance(v, int) or (v != 1 and (v < 2 or v % 2)):
                raise ConfigError(f"config key '{key}' must be 1 or an even integer >= 2, got {v!r}", key)
    for key in ("s", "s_ref", "seeds_per_n", "states_per_point", "repetitions", "m_samples"):
        if key in config and (not isinstance(config[key], int) or config[key] < 1):
            raise ConfigError(f"config key '{key}' must be a positive integer", key)
    if config.get("states_per_point", 2) < 2:
        raise ConfigError("config key 'states_per_point' must be >= 2", "states_per_point")
    ts = config.get("time_spec")
    if ts is not None:
        if not isinstance(ts, dict) or len(ts) != 1 or next(iter(ts)) not in ("divisor", "t", "grid"):
            raise ConfigError("config key 'time_spec' must be one of {divisor}, {t} or {grid}", "time_spec")
        kind, val = next(iter(ts.items()))
        if kind in ("divisor", "t") and not (isinstance(val, (int, float)) and val > 0):
            raise ConfigError(f"config key 'time_spec.{kind}' must be positive", "time_spec")
        if kind == "grid" and not isinstance(val, (list, dict)):
            raise ConfigError("config key 'time_spec.grid' must be a list of times or a grid object", "time_spec")
    h = config.get("hamiltonian")
    if isinstance(h, dict):
        extra = set(h) - {"n", "l", "seed", "file"}
        if extra:
            raise ConfigError(f"unknown config key 'hamiltonian.{sorted(extra)[0]}'", f"hamiltonian.{sorted(extra)[0]}")
        if "file" not in h and not (isinstance(h.get("n"), int) and h["n"] >= 1):
            raise ConfigError("config key 'hamiltonian.n' must be a positive integer", "hamiltonian.n")
    for key in ("f_grid",):
        if key in config and any(not 0 <= f <= 1 for f in config[key]):
            raise ConfigError("config key 'f_grid' values must lie in [0, 1]", key)
    if "sources" in config and set(config["sources"]) - {"exact", "approx_phase"}:
        raise ConfigError("config key 'sources' accepts 'exact' and 'approx_phase'", "sources")
    if "epsilon" in config and not config["epsilon"] > 0:
        raise ConfigError("config key 'epsilon' must be positive", "epsilon")


def describe(name: str) -> str:
    exp = CATALOG[name]
    lines = [f"{exp.name}: {exp.summary}", "", "config keys (defaults):"]
    for key, val in {**COMMON_DEFAULTS, **exp.defaults}.items():
        note = exp.notes.get(key)
        lines.append(f"  {key} = {val!r}" + (f"    # {note}" if note else ""))
    lines += ["", "output columns:", "  " + ",".join(exp.columns)]
    col_notes = [(k, v) for k, v in exp.notes.items() if k not in exp.defaults]
    for key, note in col_notes:
        lines.append(f"  {key}: {note}")
    return "\n".join(lines) + "\n"

