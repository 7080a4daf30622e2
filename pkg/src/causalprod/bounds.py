"""Determinant inequalities for Hadamard, Jury and causal products.

Every evaluator returns a :class:`BoundReport` comparing a left side that
should dominate a right side.  The comparison tolerance is
``1e-9 * max(1, |lhs|, |rhs|)``; the gap inside that band counts as
equality.

Bounds stated for positive definite inputs go through a leading-minor gate.
If the gate fails they either raise :class:`MinorGateError` or, when an
``eps > 0`` is supplied, evaluate on ``(A + eps I, B + eps I)`` and record
``eps`` in the report context.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray

from .linalg import (
    TOL_PSD,
    HermitianPsd,
    certify_psd,
    det,
    leading_minors,
)
from .products import CausalSpec, causal, hadamard, jury

BOUND_RTOL = 1e-9
MINOR_GATE = 1e-12

Verdict = Literal["holds", "equality", "violated"]


class MinorGateError(ValueError):
    """A leading principal minor is too small for a positive definite bound."""


class NotApplicableError(ValueError):
    """The bound's hypotheses exclude this input (dimension, spec class)."""


def verdict_for(gap: float, tolerance: float) -> Verdict:
    if gap < -tolerance:
        return "violated"
    if abs(gap) <= tolerance:
        return "equality"
    return "holds"


@dataclass
class BoundReport:
    name: str
    lhs: float
    rhs: float
    gap: float
    verdict: Verdict
    tolerance: float
    context: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def compare(
        cls, name: str, lhs: float, rhs: float, context: dict | None = None
    ) -> "BoundReport":
        lhs, rhs = float(lhs), float(rhs)
        tol = BOUND_RTOL * max(1.0, abs(lhs), abs(rhs))
        gap = lhs - rhs
        return cls(name, lhs, rhs, gap, verdict_for(gap, tol), tol, context or {})

    @property
    def violated(self) -> bool:
        return self.verdict == "violated"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "context": self.context,
        }


@dataclass
class ChainReport:
    reports: list[BoundReport]

    def __iter__(self):
        return iter(self.reports)

    def __getitem__(self, i: int) -> BoundReport:
        return self.reports[i]

    def __len__(self) -> int:
        return len(self.reports)


def _psd(a) -> HermitianPsd:
    return certify_psd(a)


def _pair(a, b) -> tuple[HermitianPsd, HermitianPsd]:
    a, b = _psd(a), _psd(b)
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    return a, b


def _rdet(m) -> float:
    return det(m).real


def _diag(a: HermitianPsd) -> NDArray[np.float64]:
    return np.diag(a.matrix).real


def passes_minor_gate(a: HermitianPsd) -> bool:
    """Every leading minor ``det(A_n)`` exceeds ``1e-12 * max(1, ||A||)^(n+1)``."""
    minors = leading_minors(a)
    gate = MINOR_GATE * a.scale ** np.arange(1, a.n + 1)
    return bool(a.min_eigenvalue > TOL_PSD * a.scale and np.all(minors > gate))


def regularize(a: HermitianPsd, eps: float) -> HermitianPsd:
    return certify_psd(a.matrix + eps * np.eye(a.n))


def gated(
    *mats: HermitianPsd, eps: float | None = None
) -> tuple[list[HermitianPsd], float]:
    """Apply the positive definite gate to every input.

    Returns the (possibly regularized) inputs and the ``eps`` actually used
    (0.0 when no regularization was needed).
    """
    if all(passes_minor_gate(m) for m in mats):
        return list(mats), 0.0
    if not eps:
        raise MinorGateError("minor below tolerance: input is not safely positive definite")
    out = [regularize(m, eps) for m in mats]
    if not all(passes_minor_gate(m) for m in out):
        raise MinorGateError(f"minor below tolerance even after eps = {eps:g}")
    return out, float(eps)


def minor_ratios(a: HermitianPsd) -> NDArray[np.float64]:
    """``det(A_n) / det(A_{n-1})`` for n = 1..N-1 (index 0 holds ``a_00``)."""
    m = leading_minors(a)
    out = np.empty_like(m)
    out[0] = m[0]
    out[1:] = m[1:] / m[:-1]
    return out


# -- Hadamard / Oppenheim--Schur ------------------------------------------


def hadamard_det_bound(a) -> BoundReport:
    """Hadamard's inequality ``prod a_kk >= det A``."""
    a = _psd(a)
    return BoundReport.compare("hadamard_det_bound", np.prod(_diag(a)), _rdet(a))


def oppenheim_chain(a, b) -> ChainReport:
    """The three Oppenheim--Schur inequalities for the Hadamard product."""
    a, b = _pair(a, b)
    det_had = _rdet(hadamard(a, b))
    det_ab = _rdet(a.matrix @ b.matrix)
    det_a, det_b = _rdet(a), _rdet(b)
    prod_a, prod_b = np.prod(_diag(a)), np.prod(_diag(b))
    return ChainReport(
        [
            BoundReport.compare("oppenheim_product", det_had, det_ab),
            BoundReport.compare("oppenheim_diagonal", det_had, det_a * prod_b),
            BoundReport.compare(
                "oppenheim_sum", det_had + det_ab, det_a * prod_b + det_b * prod_a
            ),
        ]
    )


# -- Jury product ----------------------------------------------------------


def jury_main_gap_parts(a: NDArray, b: NDArray, det_fn=None) -> tuple[float, float]:
    """``(det(A * B), b00^N det A + a00^N det B)`` for raw arrays."""
    det_fn = det_fn or _rdet
    N = a.shape[0]
    a00, b00 = a[0, 0].real, b[0, 0].real
    lhs = det_fn(jury(a, b))
    rhs = b00**N * det_fn(a) + a00**N * det_fn(b)
    return lhs, rhs


def jury_main_bound(a, b) -> BoundReport:
    """``det(A * B) >= b00^N det A + a00^N det B`` for PSD inputs, N >= 2."""
    a, b = _pair(a, b)
    if a.n < 2:
        raise NotApplicableError("bound requires N >= 2")
    lhs, rhs = jury_main_gap_parts(a.matrix, b.matrix)
    return BoundReport.compare("jury_main_bound", lhs, rhs)


def jury_special_bound(a, b) -> BoundReport:
    """``det(A * B) >= b00^N det A``, with equality when ``B`` has rank one."""
    a, b = _pair(a, b)
    lhs = _rdet(jury(a, b))
    rhs = b.matrix[0, 0].real ** a.n * _rdet(a)
    return BoundReport.compare(
        "jury_special_bound", lhs, rhs, {"rank_b": b.rank_estimate}
    )


# -- deflation of the last diagonal entry ----------------------------------


def _deflation_inputs(a) -> HermitianPsd:
    a = _psd(a)
    if a.n < 2:
        raise NotApplicableError("deflation requires N >= 2")
    if not a.is_definite:
        raise MinorGateError("input is not positive definite")
    minors = leading_minors(a)
    if minors[-2] <= MINOR_GATE * a.scale ** (a.n - 1):
        raise MinorGateError("minor below tolerance")
    return a


def tilde(a) -> NDArray[np.complex128]:
    """Subtract ``det(A) / det(A_{N-2})`` from the last diagonal entry.

    The result is PSD with zero determinant whenever ``A`` is positive
    definite.
    """
    a = _deflation_inputs(a)
    minors = leading_minors(a)
    out = np.array(a.matrix)
    out[-1, -1] -= minors[-1] / minors[-2]
    return out


def minor_ratio_bound(a) -> BoundReport:
    """``a_{N-1,N-1} >= det(A_{N-1}) / det(A_{N-2})``."""
    a = _deflation_inputs(a)
    minors = leading_minors(a)
    return BoundReport.compare(
        "minor_ratio_bound", a.matrix[-1, -1].real, minors[-1] / minors[-2]
    )


def jury_product_bound(a, b, eps: float | None = None) -> BoundReport:
    """Product lower bound for ``det(A * B)`` built from leading-minor ratios.

    ``rhs = a00 b00 prod_{n>=1} (a00 rB_n + b00 rA_n)`` where ``rA_n`` is
    ``det(A_n) / det(A_{n-1})``.  The context also records the floor
    ``b00^N det A + a00^N det B`` that the product must dominate.
    """
    a, b = _pair(a, b)
    (a, b), used = gated(a, b, eps=eps)
    ra, rb = minor_ratios(a), minor_ratios(b)
    a00, b00 = ra[0], rb[0]
    factors = [a00 * rb[n] + b00 * ra[n] for n in range(1, a.n)]
    rhs = a00 * b00
    for f in factors:
        rhs *= f
    lhs = _rdet(jury(a, b))
    floor = b00**a.n * _rdet(a) + a00**a.n * _rdet(b)
    ctx = {
        "factors": factors,
        "ratios_a": ra[1:].tolist(),
        "ratios_b": rb[1:].tolist(),
        "floor": floor,
        "floor_gap": rhs - floor,
        "floor_ok": bool(rhs - floor >= -BOUND_RTOL * max(1.0, abs(rhs), abs(floor))),
        "eps": used,
    }
    return BoundReport.compare("jury_product_bound", lhs, rhs, ctx)


# -- causal products -------------------------------------------------------


def causal_bound(a, b, spec: CausalSpec, eps: float | None = None) -> BoundReport:
    """Leading-minor product bound for ``det(A * B)`` under any causal spec.

    Factor ``n`` is ``rA_n b[s,s] + rB_n a[t,t] - rA_n rB_n [s == n]`` with
    ``s = sigma_n(n)`` and ``t = sigma_n^{-1}(n)``.
    """
    a, b = _pair(a, b)
    (a, b), used = gated(a, b, eps=eps)
    ra, rb = minor_ratios(a), minor_ratios(b)
    da, db = _diag(a), _diag(b)
    factors, indicators = [], []
    for n in range(1, a.n):
        s, t = spec.sigma(n, n), spec.sigma_inv(n, n)
        fixed = s == n
        f = ra[n] * db[s] + rb[n] * da[t]
        if fixed:
            f -= ra[n] * rb[n]
        factors.append(f)
        indicators.append(int(fixed))
    rhs = ra[0] * rb[0]
    for f in factors:
        rhs *= f
    lhs = _rdet(causal(a, b, spec))
    ctx = {"factors": factors, "indicators": indicators, "eps": used}
    return BoundReport.compare("causal_bound", lhs, rhs, ctx)


def causal_dichotomy_bound(a, b, spec: CausalSpec) -> BoundReport:
    """Oppenheim-type bound for specs that fix every diagonal index or none.

    If ``sigma_n(n) == n`` for every ``n >= 1``::

        det(A * B) + det(AB) >= det A prod b_nn + det B prod a_nn

    If ``sigma_n(n) != n`` for every ``n >= 1``::

        det(A * B) >= det A prod b[s_n, s_n] + det B prod a[t_n, t_n]

    with ``s_n = sigma_n(n)``, ``t_n = sigma_n^{-1}(n)``.  A one-dimensional
    spec is treated as diagonal-fixing.
    """
    a, b = _pair(a, b)
    kind = spec.classification
    if kind == "mixed":
        raise NotApplicableError("dichotomy does not apply to mixed specs")
    det_a, det_b = _rdet(a), _rdet(b)
    da, db = _diag(a), _diag(b)
    det_prod = _rdet(causal(a, b, spec))
    if kind in ("all_fixed", "degenerate"):
        det_ab = _rdet(a.matrix @ b.matrix)
        return BoundReport.compare(
            "causal_dichotomy_bound",
            det_prod + det_ab,
            det_a * np.prod(db) + det_b * np.prod(da),
            {"case": "all_fixed"},
        )
    s = [spec.sigma(n, n) for n in range(a.n)]
    t = [spec.sigma_inv(n, n) for n in range(a.n)]
    return BoundReport.compare(
        "causal_dichotomy_bound",
        det_prod,
        det_a * np.prod(db[s]) + det_b * np.prod(da[t]),
        {"case": "none_fixed"},
    )


@dataclass
class EllLDiagnostics:
    """Per-index quantities from the induction behind the diagonal-fixing case.

    ``ell[n]`` is the running slack of the inequality on leading blocks and
    ``L[n - 1]`` the factor linking step ``n`` to step ``n - 1``.
    ``step_lhs[n-1] >= step_rhs[n-1]`` is the one-step inequality.
    """

    ell: list[float]
    L: list[float]
    step_lhs: list[float]
    step_rhs: list[float]
    scales: list[float]
    failures: list[str]
    eps: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_report(self) -> BoundReport:
        last = self.ell[-1]
        report = BoundReport.compare(
            "ell_L_diagnostics", last, 0.0,
            {"ell": self.ell, "L": self.L, "failures": self.failures, "eps": self.eps},
        )
        if self.failures and report.verdict != "violated":
            report.verdict = "violated"
        return report


def ell_L_diagnostics(a, b, spec: CausalSpec, eps: float | None = None) -> EllLDiagnostics:
    a, b = _pair(a, b)
    if spec.classification not in ("all_fixed", "degenerate"):
        raise NotApplicableError("ell/L diagnostics need a diagonal-fixing spec")
    (a, b), used = gated(a, b, eps=eps)
    N = a.n
    ma, mb = leading_minors(a), leading_minors(b)
    da, db = _diag(a), _diag(b)
    pa, pb = np.cumprod(da), np.cumprod(db)
    prod = causal(a, b, spec)
    mc = leading_minors(prod)

    ell, scales = [], []
    for n in range(N):
        terms = (mc[n], ma[n] * mb[n], mb[n] * pa[n], ma[n] * pb[n])
        ell.append(terms[0] + terms[1] - terms[2] - terms[3])
        scales.append(max(1.0, *(abs(x) for x in terms)))

    L, step_lhs, step_rhs = [], [], []
    failures = []
    if ell[0] != 0.0:
        failures.append(f"ell_0 = {ell[0]!r} is not exactly zero")
    for n in range(1, N):
        ra, rb = ma[n] / ma[n - 1], mb[n] / mb[n - 1]
        Ln = ra * db[n] + rb * da[n] - ra * rb
        L.append(Ln)
        lhs = ell[n] - Ln * ell[n - 1]
        rhs = mb[n] * (pb[n - 1] / mb[n - 1] - 1.0) * (da[n] * ma[n - 1] - ma[n]) + ma[
            n
        ] * (pa[n - 1] / ma[n - 1] - 1.0) * (db[n] * mb[n - 1] - mb[n])
        step_lhs.append(lhs)
        step_rhs.append(rhs)
        if Ln < -BOUND_RTOL:
            failures.append(f"L_{n} = {Ln!r} < 0")
        step_tol = BOUND_RTOL * max(scales[n], abs(Ln) * scales[n - 1], abs(rhs))
        if lhs < rhs - step_tol:
            failures.append(f"step {n}: {lhs!r} < {rhs!r}")
    for n in range(N):
        if ell[n] < -BOUND_RTOL * scales[n]:
            failures.append(f"ell_{n} = {ell[n]!r} < 0")
    return EllLDiagnostics(ell, L, step_lhs, step_rhs, scales, failures, used)


def positivity_report(a, b, spec: CausalSpec) -> BoundReport:
    """Smallest eigenvalue of the causal product against zero."""
    prod = causal(a, b, spec)
    herm = 0.5 * (prod + prod.conj().T)
    eig = np.linalg.eigvalsh(herm)
    scale = max(1.0, float(np.max(np.abs(eig))))
    min_eig = float(eig[0])
    tol = TOL_PSD * scale
    asym = float(np.max(np.abs(prod - prod.conj().T)))
    gap = min_eig
    return BoundReport(
        "positivity",
        min_eig,
        0.0,
        gap,
        verdict_for(gap, tol),
        tol,
        {"spectral_norm": scale, "hermitian_deviation": asym},
    )


__all__ = [
    "BoundReport",
    "ChainReport",
    "EllLDiagnostics",
    "MinorGateError",
    "NotApplicableError",
    "causal_bound",
    "causal_dichotomy_bound",
    "ell_L_diagnostics",
    "gated",
    "hadamard_det_bound",
    "jury_main_bound",
    "jury_product_bound",
    "jury_special_bound",
    "minor_ratio_bound",
    "oppenheim_chain",
    "passes_minor_gate",
    "positivity_report",
    "tilde",
]
