"""Acceptance criteria 1-12. Each test records one PASS/FAIL line (shown in the terminal summary)."""
import functools
import json
import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, dense_product
from trotter_oracle.cli import main
from trotter_oracle.dynamics import exact_eigenpairs, schedule_unitary, trotter_schedule
from trotter_oracle.errors import (
    approx_phase_error,
    eigenstate_phase_errors,
    eigenvalue_shift,
    fit_wk,
    log_grid,
    operator_norm_exact,
    phase_error,
    relative_error,
    sampled_phase_errors,
)
from trotter_oracle.experiments import CATALOG
from trotter_oracle.hamiltonians import random_pauli_hamiltonian
from trotter_oracle.pauli import PauliSum, commutator_bound
from trotter_oracle.qre import (
    compare_estimates,
    error_split,
    higher_order_query,
    multi_step_query,
    optimal_time,
    qpe_resources,
    query_objective,
)
from trotter_oracle.shots import estimate_phase_with_shots, fidelity_sweep, hadamard_amplitude

SIZES = range(2, 9)
SEEDS = range(5)


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@functools.lru_cache(maxsize=None)
def system(n: int, seed: int):
    h = random_pauli_hamiltonian(n, None, seed)
    spec = exact_eigenpairs(h)
    return h, spec, float(np.max(np.abs(spec.eigenvalues)))


@functools.lru_cache(maxsize=None)
def exact_fit(n: int, seed: int):
    h, spec, _ = system(n, seed)
    return fit_wk(h, 2, 0, source="exact", spec=spec)


@functools.lru_cache(maxsize=None)
def w_commutator(n: int, seed: int) -> float:
    return commutator_bound(system(n, seed)[0])


@functools.lru_cache(maxsize=None)
def relative_errors(n: int, seed: int) -> dict[int, float]:
    h, spec, norm = system(n, seed)
    t = math.pi / (4 * norm)
    psi = spec.eigenvectors[:, 0]
    target = trotter_schedule(h, 2, 1, t)
    theta = phase_error(spec, target, psi)
    return {pp: relative_error(approx_phase_error(target, trotter_schedule(h, pp, 1, t), psi), theta)
            for pp in (2, 4, 6)}


def test_c01_schedule_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(20):
        n = int(rng.integers(1, 7))
        l = int(rng.integers(1, min(4**n, 12) + 1))
        h = random_pauli_hamiltonian(n, l, 1000 + i)
        h = PauliSum(n, [(float(rng.normal()), p) for _, p in h.terms])
        for p in (1, 2, 4):
            for s in (1, 2):
                sched = trotter_schedule(h, p, s, float(rng.uniform(0.1, 1.5)))
                worst = max(worst, float(np.max(np.abs(schedule_unitary(sched) - dense_product(sched)))))
    ok = worst < 1e-10
    report(1, ok, f"max entry difference {worst:.2e} < 1e-10 over 20 Hamiltonians x p{{1,2,4}} x S{{1,2}}")
    assert ok


def test_c02_reference_accuracy():
    per_n = {n: [relative_errors(n, s)[4] for s in SEEDS] for n in SIZES}
    worst = max(max(v) for v in per_n.values())
    medians = {n: float(np.median(v)) for n, v in per_n.items()}
    ok = worst < 0.02 and max(medians.values()) < 0.01
    report(2, ok, f"p'=4 max rel err {worst:.4f} < 0.02, worst per-N median {max(medians.values()):.4f} < 0.01")
    assert ok


def test_c03_monotone_reference_order():
    bad = [(n, s) for n in SIZES for s in SEEDS
           if not relative_errors(n, s)[2] > relative_errors(n, s)[4] > relative_errors(n, s)[6]]
    ok = not bad
    report(3, ok, f"rel err strictly decreasing over p' = 2, 4, 6 on {len(SIZES) * len(SEEDS)} systems; violations {bad}")
    assert ok


def test_c04_quadratic_scaling():
    rows = [(n, s, exact_fit(n, s)) for n in SIZES for s in SEEDS]
    min_r2 = min(f.r_squared for *_, f in rows)
    off = [(n, s, round(f.exponent_check, 4)) for n, s, f in rows if abs(f.exponent_check - 2) > 0.1]
    ok = min_r2 >= 0.99 and not off
    report(4, ok, f"min r^2 {min_r2:.5f} >= 0.99; free slopes outside 2 +/- 0.1: {off}")
    assert ok


def test_c05_bound_ordering_and_anchor():
    violations = []
    for n in SIZES:
        for s in SEEDS:
            f = exact_fit(n, s)
            wc = w_commutator(n, s)
            if np.any(f.errors > wc * f.t_grid**2):
                violations.append((n, s))
    xz = PauliSum.from_labels([("X", 1.0), ("Z", 1.0)])
    norm = math.sqrt(2)
    anchor_dev = 0.0
    for t in log_grid(norm):
        closed = abs(math.sqrt(2) - math.acos(math.cos(t) ** 2) / t)
        anchor_dev = max(anchor_dev, abs(abs(eigenvalue_shift(xz, 2, 1, t, 0)) - closed))
    # W is the t -> 0 coefficient, so it is fitted on a small-t grid
    w = fit_wk(xz, 2, 0, grid=log_grid(norm, 10, 40, 20)).w
    w_dev = abs(w / (math.sqrt(2) / 12) - 1)
    ok = not violations and anchor_dev < 1e-9 and w_dev < 0.01
    report(5, ok, f"bound violations {violations}; X+Z closed-form dev {anchor_dev:.1e} < 1e-9; "
                  f"fitted W {w:.6f} vs sqrt(2)/12 rel dev {w_dev:.4f} < 0.01")
    assert ok


def test_c06_ratio_growth():
    ns, logs = [], []
    for n in SIZES:
        for s in range(10):
            ns.append(n)
            logs.append(math.log(w_commutator(n, s) / exact_fit(n, s).w))
    slope = float(np.polyfit(ns, logs, 1)[0])
    ok = slope > 0
    report(6, ok, f"slope of log(W_C/W_fit) vs N over 70 systems = {slope:.4f} > 0")
    assert ok


def _grid_min(f, lo, hi, n=20001):
    for _ in range(4):
        t = np.geomspace(lo, hi, n)
        q = f(t)
        i = int(np.argmin(q))
        lo, hi = t[max(i - 2, 0)], t[min(i + 2, n - 1)]
    return float(t[i]), float(q[i])


def test_c07_optimizer():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        w = float(10 ** rng.uniform(-2, 2))
        eps = float(10 ** rng.uniform(-4, -1))
        p = int(rng.choice([2, 4, 6]))
        s = int(rng.integers(1, 6))
        t_hi = (eps / w) ** (1 / p)
        t2, q2 = _grid_min(lambda t: query_objective(t, w, eps, 2), t_hi * 1e-4, t_hi)
        est = qpe_resources(w, eps, 4)
        tp, qp = _grid_min(lambda t: query_objective(t, w, eps, p), t_hi * 1e-4, t_hi)
        ts_hi = (eps * s / w) ** 0.5
        ts, qs = _grid_min(lambda t: query_objective(t, w, eps, 2, s), ts_hi * 1e-4, ts_hi)
        ms = multi_step_query(w, eps, s)
        worst = max(worst, abs(est.t_star / t2 - 1), abs(est.q_star / q2 - 1),
                    abs(optimal_time(w, eps, p) / tp - 1), abs(higher_order_query(w, eps, p) / qp - 1),
                    abs(ms.t_star / ts - 1), abs(ms.q_s / qs - 1))
    d, tr = error_split(0.37, 0.013, 2)
    split_dev = max(abs(d / (2 * 0.013 / 3) - 1), abs(tr / (0.013 / 3) - 1))
    ok = worst < 1e-3 and split_dev < 1e-9
    report(7, ok, f"closed forms vs grid minimization worst rel dev {worst:.1e} < 1e-3 (50 tuples); "
                  f"error split dev {split_dev:.1e} < 1e-9")
    assert ok


def test_c08_resource_reduction():
    identity_dev, gaps = 0.0, []
    for s in range(3):
        h, spec, norm = system(8, s)
        cmp = compare_estimates(h, 0, 0.01)
        identity_dev = max(identity_dev, abs(cmp.reduction / math.sqrt(cmp.w_commutator / cmp.w_quantum) - 1))
        gaps.append(cmp.classical.o_star / cmp.quantum.o_star)
    ok = identity_dev < 1e-12 and max(gaps) >= 10
    report(8, ok, f"sqrt-ratio identity dev {identity_dev:.1e}; N=8 classical/quantum operation gaps "
                  f"{[round(g, 1) for g in gaps]} (need one >= 10)")
    assert ok


def test_c09_shot_statistics():
    h, spec, norm = system(4, 0)
    t = math.pi / (4 * norm)
    psi = spec.eigenvectors[:, 0]
    target, ref = trotter_schedule(h, 1, 1, t), trotter_schedule(h, 4, 1, t)
    amp = hadamard_amplitude(target, ref, psi)
    n = 2000
    ests = np.array([estimate_phase_with_shots(target, ref, psi, n, 500 + r).estimate for r in range(200)])
    half = n // 2
    dx2, dy2 = (1 - amp.x**2) / half, (1 - amp.y**2) / half
    predicted = math.sqrt(amp.y**2 * dx2 + amp.x**2 * dy2) / amp.modulus**2
    ratio = float(ests.std(ddof=1)) / predicted

    h8, spec8, norm8 = system(8, 0)
    t8 = math.pi / norm8
    psi8 = spec8.eigenvectors[:, 0]
    tg, rf = trotter_schedule(h8, 1, 1, t8), trotter_schedule(h8, 4, 1, t8)
    needed = None
    for shots in (100, 300, 1000, 3000, 10_000, 30_000, 100_000, 300_000, 999_000):
        if estimate_phase_with_shots(tg, rf, psi8, shots, 9).excludes_zero():
            needed = shots
            break
    ok = amp.modulus >= 0.1 and 1 / 1.3 <= ratio <= 1.3 and needed is not None
    report(9, ok, f"|amp| {amp.modulus:.3f}; empirical/predicted spread {ratio:.3f} within x1.3; "
                  f"N=8 nonzero at 95% with {needed} shots (< 1e6)")
    assert ok


def test_c10_operator_norm():
    commuting = PauliSum.from_labels([("ZZI", 1.0), ("IZZ", 0.4), ("XXX", -0.7), ("ZIZ", 0.2)])
    zero = operator_norm_exact(commuting, trotter_schedule(commuting, 2, 1, 0.9))
    h, spec, norm = system(4, 1)
    sched = trotter_schedule(h, 2, 1, math.pi / (2 * norm))
    ests = [float(np.max(sampled_phase_errors(spec, sched, m, 3))) for m in (1, 10, 100, 1000, 5000)]
    monotone = all(b >= a for a, b in zip(ests, ests[1:]))
    margin = math.inf
    for n in range(2, 7):
        for s in range(3):
            hh, sp, nm = system(n, s)
            sc = trotter_schedule(hh, 2, 1, math.pi / (4 * nm))
            margin = min(margin, operator_norm_exact(sp, sc) - float(np.max(np.abs(eigenstate_phase_errors(sp, sc)))))
    ok = zero < 1e-10 and monotone and margin >= -1e-9
    report(10, ok, f"commuting Delta {zero:.1e} < 1e-10; Delta_est over M=1..5000 {[round(e, 5) for e in ests]} "
                   f"non-decreasing; min(Delta - max|theta_k|) {margin:.2e} >= -1e-9")
    assert ok


def test_c11_fidelity_sweep():
    details, ok = [], True
    for n in (6, 8):
        h, spec, norm = system(n, 0)
        sched = trotter_schedule(h, 2, 1, math.pi / norm)
        theta0 = phase_error(spec, sched, spec.eigenvectors[:, 0])
        rows = {r.f: r for r in fidelity_sweep(spec, sched, 0, [0.5, 0.99, 1.0], 100, 11 + n)}
        gap_lo = abs(rows[0.5].mean_theta - theta0)
        gap_hi = abs(rows[0.99].mean_theta - theta0)
        exact_row = rows[1.0].mean_theta == theta0
        ok = ok and gap_hi < gap_lo and exact_row
        details.append(f"N={n}: |gap| f=0.99 {gap_hi:.2e} < f=0.5 {gap_lo:.2e}, f=1 exact {exact_row}")
    report(11, ok, "; ".join(details))
    assert ok


SMALL_CONFIGS = {
    "phase-accuracy": {"hamiltonian": {"n": 3}},
    "size-sweep": {"n_values": [2, 3], "seeds_per_n": 2},
    "error-ratio": {"n_values": [2, 3], "seeds_per_n": 2},
    "resources": {"n_values": [2, 3], "seeds_per_n": 1},
    "shots": {"hamiltonian": {"n": 3}, "shots": [100, 10000], "repetitions": 2},
    "fidelity-sweep": {"hamiltonian": {"n": 3}, "f_grid": [0.5, 1.0], "states_per_point": 5},
    "opnorm": {"hamiltonian": {"n": 3}, "m_samples": 1000},
    "fit-wk": {"hamiltonian": {"n": 3}},
    "commutator-bound": {"n_values": [2, 3], "seeds_per_n": 1},
}


def test_c12_determinism(tmp_path):
    assert set(SMALL_CONFIGS) == set(CATALOG)
    mismatched = []
    for name, extra in SMALL_CONFIGS.items():
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(json.dumps({"experiment": name, "master_seed": 42, **extra}))
        first, second = tmp_path / f"{name}-1", tmp_path / f"{name}-2"
        assert main(["run", str(cfg), "--output", str(first)]) == 0
        assert main(["run", str(first / "manifest.json"), "--output", str(second), "--jobs", "2"]) == 0
        if (first / f"{name}.csv").read_bytes() != (second / f"{name}.csv").read_bytes():
            mismatched.append(name)
    ok = not mismatched
    report(12, ok, f"{len(SMALL_CONFIGS)} experiments re-run from manifest byte-identical; mismatches {mismatched}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
