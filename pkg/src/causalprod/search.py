"""Numerical search for small gaps in the Jury-product determinant bound.

Candidates are parametrized through lower-triangular factors ``L`` with
``exp``-parametrized diagonals, so every candidate ``L L^*`` is positive
definite.  Each restart runs Nelder--Mead from a uniform random start; the
objective is the relative gap ``(lhs - rhs) / lhs`` after normalization.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from . import bounds as bd
from .linalg import derive_seed, leading_minors, rng
from .products import jury_shifted

PENALTY = 1e6
BOUNDARY_MINOR = 1e-10

Normalization = Literal["trace_one", "det_one"]

SEARCHABLE_BOUNDS = ("jury_main_bound", "jury_special_bound")


@dataclass(frozen=True)
class SearchProblem:
    n: int
    bound: str = "jury_main_bound"
    restarts: int = 10
    budget: int = 2000
    seed: int = 0
    normalization: Normalization = "trace_one"
    diagonal_only: bool = False

    def validate(self) -> None:
        if self.n < 2:
            raise ValueError("search needs n >= 2")
        if self.restarts < 1 or self.budget < 1:
            raise ValueError("restarts and budget must be >= 1")
        if self.bound not in SEARCHABLE_BOUNDS:
            raise ValueError(f"bound {self.bound!r} is not searchable")
        if self.normalization not in ("trace_one", "det_one"):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @property
    def params_per_matrix(self) -> int:
        return self.n if self.diagonal_only else self.n * self.n


@dataclass
class SearchResult:
    best_gap: float
    best_objective: float
    params_a: NDArray[np.float64]
    params_b: NDArray[np.float64]
    a: NDArray[np.complex128]
    b: NDArray[np.complex128]
    trajectory: list[dict] = field(default_factory=list)
    evaluations: int = 0

    def to_dict(self) -> dict:
        from .serialize import matrix_to_dict

        return {
            "best_gap": self.best_gap,
            "best_objective": self.best_objective,
            "params_a": self.params_a.tolist(),
            "params_b": self.params_b.tolist(),
            "A": matrix_to_dict(self.a),
            "B": matrix_to_dict(self.b),
            "trajectory": self.trajectory,
            "evaluations": self.evaluations,
        }


def factor_from_params(theta: NDArray, n: int, diagonal_only: bool = False) -> NDArray:
    """Lower-triangular factor: ``exp`` diagonal, then (re, im) pairs below it."""
    L = np.zeros((n, n), dtype=np.complex128)
    L[np.diag_indices(n)] = np.exp(theta[:n])
    if not diagonal_only:
        rows, cols = np.tril_indices(n, -1)
        off = theta[n:]
        L[rows, cols] = off[0::2] + 1j * off[1::2]
    return L


def normalize(m: NDArray, how: Normalization) -> NDArray:
    n = m.shape[0]
    if how == "trace_one":
        return m * (n / np.trace(m).real)
    d = np.linalg.det(m).real
    return m / d ** (1.0 / n)


def pair_from_params(p: SearchProblem, theta: NDArray) -> tuple[NDArray, NDArray]:
    k = p.params_per_matrix
    mats = []
    for part in (theta[:k], theta[k:]):
        L = factor_from_params(part, p.n, p.diagonal_only)
        m = L @ L.conj().T
        m = 0.5 * (m + m.conj().T)
        mats.append(normalize(m, p.normalization))
    return mats[0], mats[1]


def _fast_parts(bound: str, a: NDArray, b: NDArray) -> tuple[float, float]:
    n = a.shape[0]
    lhs = np.linalg.det(jury_shifted(a, b)).real
    det_a = np.linalg.det(a).real
    b00 = b[0, 0].real
    if bound == "jury_special_bound":
        return lhs, b00**n * det_a
    det_b = np.linalg.det(b).real
    return lhs, b00**n * det_a + a[0, 0].real ** n * det_b


def objective(p: SearchProblem, theta: NDArray) -> float:
    a, b = pair_from_params(p, theta)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        return PENALTY * 2
    if min(leading_minors(a).min(), leading_minors(b).min()) < BOUNDARY_MINOR:
        return PENALTY
    lhs, rhs = _fast_parts(p.bound, a, b)
    return (lhs - rhs) / lhs


def evaluate_pair(p: SearchProblem, a: NDArray, b: NDArray) -> bd.BoundReport:
    """Authoritative gap through the certified bound evaluator."""
    if p.bound == "jury_special_bound":
        return bd.jury_special_bound(a, b)
    return bd.jury_main_bound(a, b)


def replay_gap(p: SearchProblem, params_a: NDArray, params_b: NDArray) -> float:
    a, b = pair_from_params(p, np.concatenate([params_a, params_b]))
    return evaluate_pair(p, a, b).gap


def _restart(p: SearchProblem, index: int) -> dict:
    gen = rng(derive_seed(p.seed, index))
    x0 = gen.uniform(-1.0, 1.0, 2 * p.params_per_matrix)
    res = minimize(
        lambda t: objective(p, t),
        x0,
        method="Nelder-Mead",
        options={
            "maxfev": p.budget,
            "maxiter": p.budget,
            "xatol": 1e-14,
            "fatol": 1e-16,
            "adaptive": x0.size > 10,
        },
    )
    return {"restart": index, "x": np.asarray(res.x), "objective": float(res.fun), "nfev": int(res.nfev)}


def minimize_gap(p: SearchProblem, workers: int = 1) -> SearchResult:
    """Multi-start Nelder--Mead minimization of the relative bound gap."""
    p.validate()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda i: _restart(p, i), range(p.restarts)))
    else:
        runs = [_restart(p, i) for i in range(p.restarts)]
    trajectory = []
    for run in runs:
        a, b = pair_from_params(p, run["x"])
        gap = evaluate_pair(p, a, b).gap if run["objective"] < PENALTY else math.inf
        run["gap"] = gap
        trajectory.append(
            {"restart": run["restart"], "objective": run["objective"], "gap": gap,
             "evaluations": run["nfev"]}
        )
    # ties go to the lowest restart index
    best = min(runs, key=lambda r: (r["objective"], r["restart"]))
    k = p.params_per_matrix
    a, b = pair_from_params(p, best["x"])
    return SearchResult(
        best_gap=best["gap"],
        best_objective=best["objective"],
        params_a=best["x"][:k].copy(),
        params_b=best["x"][k:].copy(),
        a=a,
        b=b,
        trajectory=trajectory,
        evaluations=sum(r["nfev"] for r in runs),
    )


def diagonal_gap(n: int, a_diag, b_diag) -> float:
    """Gap of the Jury main bound for diagonal inputs in closed form.

    The Jury product of diagonal matrices is diagonal with entries
    ``sum_{m<=k} a_m b_{k-m}``.
    """
    a = np.asarray(a_diag, dtype=np.float64)
    b = np.asarray(b_diag, dtype=np.float64)
    if a.shape != (n,) or b.shape != (n,):
        raise ValueError(f"expected two length-{n} diagonals")
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("diagonal entries must be positive")
    conv = np.convolve(a, b)[:n]
    return float(np.prod(conv) - (b[0] ** n * np.prod(a) + a[0] ** n * np.prod(b)))
