"""Closed-form resource estimates for Trotter-based quantum phase estimation.

The QPE error budget splits into a discretization part pi / (t 2^B) and a
Trotter part W t^p. Minimizing the number of calls Q = 2^B - 1 over t gives
the optimal step time and from it B, Q and the operation count O.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .dynamics import query_count
from .errors import fit_wk
from .hamiltonians import spectral_norm
from .pauli import PauliSum, commutator_bound

SQRT27 = 3.0**1.5


def _positive(**kw: float) -> None:
    for name, v in kw.items():
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")


def _even_order(p: int) -> None:
    if p < 2 or p % 2:
        raise ValueError(f"order must be an even integer >= 2, got {p}")


@dataclass(frozen=True)
class ResourceEstimate:
    error_budget: float
    w: float
    order: int
    t_star: float
    t_max: float | None
    b_star_real: float
    b_star: int
    q_star: float
    o_star: float
    n_terms: int

    @property
    def feasible(self) -> bool:
        return self.t_max is None or self.t_star <= self.t_max

    @property
    def positive(self) -> bool:
        """False when the budget is so loose that no phase bits are needed."""
        return self.b_star_real > 0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["feasible"] = self.feasible
        return d


def optimal_time(w: float, eps: float, p: int = 2) -> float:
    """(eps / ((p+1) w))^{1/p}."""
    _positive(w=w, eps=eps)
    _even_order(p)
    return (eps / ((p + 1) * w)) ** (1.0 / p)


def t_max(norm_h: float) -> float:
    """pi / ||H||, with ||H|| standing in for the effective Hamiltonian's norm."""
    if not norm_h > 0:
        raise ValueError("norm must be positive")
    return math.pi / norm_h


def query_objective(t, w: float, eps: float, p: int = 2, n_steps: int = 1):
    """Calls to the second-order formula as a function of step time t.

    5^{p/2-1} * n_steps * (pi / (n_steps t (eps - w t^p / n_steps)) - 1); only
    meaningful on the branch where the Trotter part stays below eps.
    """
    t = np.asarray(t, dtype=float)
    slack = eps - w * t**p / n_steps
    with np.errstate(divide="ignore", invalid="ignore"):
        q = 5 ** (p // 2 - 1) * n_steps * (math.pi / (n_steps * t * slack) - 1)
    return np.where(slack > 0, q, np.inf)


def qpe_resources(w: float, eps: float, n_terms: int, norm_h: float | None = None) -> ResourceEstimate:
    """Second-order optimum. B, Q and O are lower bounds evaluated at the real-valued B."""
    _positive(w=w, eps=eps)
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    a = math.pi * SQRT27 * math.sqrt(w) / (2 * eps**1.5)
    b_real = math.log2(a)
    q = a - 1
    o = math.pi * SQRT27 * math.sqrt(w) * n_terms / eps**1.5 - 2 * n_terms
    return ResourceEstimate(
        error_budget=eps,
        w=w,
        order=2,
        t_star=optimal_time(w, eps, 2),
        t_max=t_max(norm_h) if norm_h else None,
        b_star_real=b_real,
        b_star=math.ceil(b_real),
        q_star=q,
        o_star=o,
        n_terms=n_terms,
    )


def error_split(w: float, eps: float, p: int = 2) -> tuple[float, float]:
    """(discretization, Trotter) error at the optimal time, using the closed-form 2^B.

    Expected split is (p eps / (p+1), eps / (p+1)), i.e. (2 eps/3, eps/3) at p=2.
    """
    t = optimal_time(w, eps, p)
    two_b = higher_order_query(w, eps, p) / 5 ** (p // 2 - 1) + 1
    return math.pi / (t * two_b), w * t**p


def higher_order_query(w_p: float, eps: float, p: int) -> float:
    """Q_p = 5^{p/2-1} (pi w^{1/p} (p+1)^{1/p+1} / (p eps^{1/p+1}) - 1)."""
    _positive(w_p=w_p, eps=eps)
    _even_order(p)
    inner = math.pi * w_p ** (1 / p) * (p + 1) ** (1 / p + 1) / (p * eps ** (1 / p + 1))
    return 5 ** (p // 2 - 1) * (inner - 1)


@dataclass(frozen=True)
class MultiStepEstimate:
    q_s: float
    t_star: float
    n_steps: int
    t_max: float | None

    @property
    def feasible(self) -> bool:
        return self.t_max is None or self.t_star <= self.t_max


def multi_step_query(w: float, eps: float, n_steps: int, norm_h: float | None = None) -> MultiStepEstimate:
    """Q_S = pi 3^{3/2} w^{1/2} / (2 eps^{3/2} S^{1/2}) - S at t* = sqrt(eps S / (3 w))."""
    _positive(w=w, eps=eps)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    q = math.pi * SQRT27 * math.sqrt(w) / (2 * eps**1.5 * math.sqrt(n_steps)) - n_steps
    return MultiStepEstimate(q, math.sqrt(eps * n_steps / (3 * w)), n_steps, t_max(norm_h) if norm_h else None)


@dataclass
class Comparison:
    classical: ResourceEstimate
    quantum: ResourceEstimate
    exact: ResourceEstimate
    w_commutator: float
    w_quantum: float
    w_exact: float
    measurement_queries: int
    measurement_operations: int

    @property
    def reduction(self) -> float:
        """Classical over quantum operations, offsets excluded: sqrt(W_C / W_quantum)."""
        return (self.classical.o_star + 2 * self.classical.n_terms) / (self.quantum.o_star + 2 * self.quantum.n_terms)

    def rows(self) -> list[dict]:
        out = []
        for label, est in (("classical", self.classical), ("quantum", self.quantum), ("exact", self.exact)):
            out.append({"estimator": label, **est.as_dict()})
        return out


def compare_estimates(h: PauliSum, k: int = 0, eps: float = 0.01, p: int = 2, p_ref: int = 4,
                      grid=None) -> Comparison:
    """Resource estimates from the commutator bound, the measurable phase error and the exact Trotter error."""
    if p != 2:
        raise ValueError("resource comparison is defined for the second-order formula")
    norm = spectral_norm(h)
    L = len(h)
    w_c = commutator_bound(h)
    w_q = fit_wk(h, p, k, grid, source="approx_phase", p_ref=p_ref).w
    w_e = fit_wk(h, p, k, grid, source="exact").w
    q_target, _ = query_count(p, 1, L)
    q_ref, _ = query_count(p_ref, 1, L)
    queries = q_target + q_ref
    return Comparison(
        classical=qpe_resources(w_c, eps, L, norm),
        quantum=qpe_resources(w_q, eps, L, norm),
        exact=qpe_resources(w_e, eps, L, norm),
        w_commutator=w_c,
        w_quantum=w_q,
        w_exact=w_e,
        measurement_queries=queries,
        measurement_operations=queries * 2 * L,
    )
