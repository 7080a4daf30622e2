"""Seeded randomized trials over the bound evaluators and oracle checks."""

from __future__ import annotations

import json
import logging
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import bounds as bd
from .linalg import (
    CertificationError,
    HermitianPsd,
    certify_psd,
    complex_gaussian,
    derive_seed,
    det,
    det_bruteforce,
    random_psd,
    rng,
    BRUTEFORCE_MAX_N,
)
from .products import (
    CausalSpec,
    builtin_spec,
    causal,
    causal_gram_oracle,
    jury,
    jury_congruence,
    random_spec,
    validate_spec,
)

log = logging.getLogger(__name__)

ORACLE_RTOL = {"causal_gram": 1e-9, "det_bruteforce": 1e-10, "jury_congruence": 1e-10}

SPEC_POLICIES = ("hadamard", "jury", "random_custom", "random_all_fixed", "random_none_fixed")

# stream ids for per-trial sub-seeds
_STREAM_A, _STREAM_B, _STREAM_SPEC, _STREAM_V, _STREAM_RANK = range(5)


def _chain(a, b, spec, eps):
    return list(bd.oppenheim_chain(a, b))


def _tilde_report(a, b, spec, eps):
    out = []
    for label, m in (("a", a), ("b", b)):
        deflated = bd.tilde(m)
        minors = bd.leading_minors(m)
        # det of the deflated matrix vanishes; measured against det(A_{N-2})
        tol = 1e-8 * minors[-2] * m.scale
        d = abs(det(deflated))
        try:
            min_eig = certify_psd(deflated).min_eigenvalue
            verdict = bd.verdict_for(-d, tol)
        except CertificationError as exc:
            min_eig = float(getattr(exc, "min_eigenvalue", float("nan")))
            verdict = "violated"
        out.append(
            bd.BoundReport(
                f"tilde_{label}", d, 0.0, -d, verdict, tol, {"min_eigenvalue": min_eig}
            )
        )
    return out


def _ell_report(a, b, spec, eps):
    return [bd.ell_L_diagnostics(a, b, spec, eps=eps).to_report()]


# name -> evaluator(a, b, spec, eps) returning a list of BoundReport
EVALUATORS: dict[str, Callable[..., list[bd.BoundReport]]] = {
    "positivity": lambda a, b, s, e: [bd.positivity_report(a, b, s)],
    "hadamard_det_bound": lambda a, b, s, e: [bd.hadamard_det_bound(a)],
    "oppenheim_chain": _chain,
    "jury_main_bound": lambda a, b, s, e: [bd.jury_main_bound(a, b)],
    "jury_special_bound": lambda a, b, s, e: [bd.jury_special_bound(a, b)],
    "tilde": _tilde_report,
    "minor_ratio_bound": lambda a, b, s, e: [
        bd.minor_ratio_bound(a),
        bd.minor_ratio_bound(b),
    ],
    "jury_product_bound": lambda a, b, s, e: [bd.jury_product_bound(a, b, eps=e)],
    "causal_bound": lambda a, b, s, e: [bd.causal_bound(a, b, s, eps=e)],
    "causal_dichotomy_bound": lambda a, b, s, e: [bd.causal_dichotomy_bound(a, b, s)],
    "ell_L_diagnostics": _ell_report,
}

ALL_BOUNDS = tuple(EVALUATORS) + ("oracle",)

_ALIASES = {"ell_L": "ell_L_diagnostics", "oppenheim": "oppenheim_chain", "oracles": "oracle"}


def resolve_bound_name(name: str) -> str:
    name = name.strip()
    name = _ALIASES.get(name, name)
    if name in ALL_BOUNDS:
        return name
    if name + "_bound" in ALL_BOUNDS:
        return name + "_bound"
    raise ValueError(f"unknown bound name {name!r}")


def parse_bound_set(text: str | Iterable[str]) -> tuple[str, ...]:
    items = text.split(",") if isinstance(text, str) else list(text)
    if len(items) == 1 and items[0].strip() == "all":
        return ALL_BOUNDS
    out = []
    for item in items:
        if item.strip():
            name = resolve_bound_name(item)
            if name not in out:
                out.append(name)
    if not out:
        raise ValueError("empty bound set")
    return tuple(out)


@dataclass(frozen=True)
class TrialConfig:
    """Configuration for :func:`run_trials`.

    ``rank_policy`` is ``"full"``, ``"random"`` or an integer rank.
    ``spec_policy`` is one of :data:`SPEC_POLICIES` or an explicit
    :class:`CausalSpec`.
    """

    n: int
    trials: int
    master_seed: int
    rank_policy: str | int = "full"
    spec_policy: str | CausalSpec = "jury"
    regularization_eps: float = 0.0
    bound_set: tuple[str, ...] = ALL_BOUNDS

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.regularization_eps < 0:
            raise ValueError("regularization eps must be >= 0")
        if isinstance(self.rank_policy, int):
            if not 1 <= self.rank_policy <= self.n:
                raise ValueError(f"fixed rank must lie in [1, {self.n}]")
        elif self.rank_policy not in ("full", "random"):
            raise ValueError(f"unknown rank policy {self.rank_policy!r}")
        if isinstance(self.spec_policy, CausalSpec):
            problems = validate_spec(self.spec_policy)
            if problems:
                raise ValueError("invalid spec: " + "; ".join(problems))
            if self.spec_policy.n != self.n:
                raise ValueError("spec dimension does not match n")
        elif self.spec_policy not in SPEC_POLICIES:
            raise ValueError(f"unknown spec policy {self.spec_policy!r}")
        for name in self.bound_set:
            resolve_bound_name(name)
        if "jury_main_bound" in self.bound_set and self.n < 2:
            raise ValueError("jury_main_bound requires n >= 2")

    def describe(self) -> dict:
        spec = self.spec_policy
        return {
            "n": self.n,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "rank_policy": self.rank_policy,
            "spec_policy": spec.to_dict() if isinstance(spec, CausalSpec) else spec,
            "regularization_eps": self.regularization_eps,
            "bound_set": list(self.bound_set),
        }


@dataclass
class TrialRecord:
    trial_index: int
    seed: int
    inputs: dict[str, Any]
    reports: list[bd.BoundReport]
    notes: dict[str, str]
    oracles: dict[str, bool]
    oracle_errors: dict[str, float] = field(default_factory=dict)
    evaluated: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def violated(self) -> bool:
        return any(r.violated for r in self.reports)

    @property
    def oracle_failed(self) -> bool:
        return not all(self.oracles.values())

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "trial_index": self.trial_index,
            "seed": self.seed,
            "inputs": self.inputs,
            "reports": [r.to_dict() for r in self.reports],
            "notes": self.notes,
            "oracles": self.oracles,
            "oracle_errors": self.oracle_errors,
            "evaluated": self.evaluated,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


def _rank(policy, n: int, seed: int) -> int:
    if policy == "full":
        return n
    if policy == "random":
        return int(rng(seed).integers(1, n + 1))
    return int(policy)


def trial_spec(cfg: TrialConfig, seed: int) -> CausalSpec:
    policy = cfg.spec_policy
    if isinstance(policy, CausalSpec):
        return policy
    if policy in ("hadamard", "jury"):
        return builtin_spec(policy, cfg.n)
    diagonal = {"random_custom": "any", "random_all_fixed": "all_fixed",
                "random_none_fixed": "none_fixed"}[policy]
    return random_spec(cfg.n, derive_seed(seed, _STREAM_SPEC), diagonal)


def trial_inputs(cfg: TrialConfig, trial_index: int):
    """Regenerate ``(seed, A, B, spec, v)`` for one trial."""
    seed = derive_seed(cfg.master_seed, trial_index)
    rank_a = _rank(cfg.rank_policy, cfg.n, derive_seed(seed, _STREAM_RANK, 0))
    rank_b = _rank(cfg.rank_policy, cfg.n, derive_seed(seed, _STREAM_RANK, 1))
    a = random_psd(cfg.n, rank_a, derive_seed(seed, _STREAM_A))
    b = random_psd(cfg.n, rank_b, derive_seed(seed, _STREAM_B))
    spec = trial_spec(cfg, seed)
    v = complex_gaussian(rng(derive_seed(seed, _STREAM_V)), cfg.n)
    return seed, a, b, spec, v


def _rel_err(x: np.ndarray | complex, y: np.ndarray | complex) -> float:
    x, y = np.asarray(x), np.asarray(y)
    return float(np.max(np.abs(x - y)) / max(1.0, float(np.max(np.abs(y)))))


def oracle_checks(
    a: HermitianPsd, b: HermitianPsd, spec: CausalSpec, v: np.ndarray
) -> tuple[dict[str, bool], dict[str, float]]:
    """Definition-versus-oracle comparisons for one input tuple."""
    flags, errors = {}, {}
    prod = causal(a, b, spec)
    gram = causal_gram_oracle(a, b, spec)
    errors["causal_gram"] = _rel_err(gram, prod)
    flags["causal_gram"] = errors["causal_gram"] <= ORACLE_RTOL["causal_gram"]
    try:
        certify_psd(gram)
        flags["gram_psd"] = True
    except CertificationError:
        flags["gram_psd"] = False
    if a.n <= BRUTEFORCE_MAX_N:
        # near-singular products carry absolute det error ~ eps * ||M||^N, so
        # compare against the natural size of the determinant, not |det| alone
        ref = det_bruteforce(prod)
        size = max(1.0, abs(ref), float(np.linalg.norm(prod, 2)) ** a.n)
        errors["det_bruteforce"] = abs(det(prod) - ref) / size
        flags["det_bruteforce"] = errors["det_bruteforce"] <= ORACLE_RTOL["det_bruteforce"]
    vv = np.outer(v, v.conj())
    errors["jury_congruence"] = _rel_err(jury_congruence(a, v), jury(a, vv))
    flags["jury_congruence"] = errors["jury_congruence"] <= ORACLE_RTOL["jury_congruence"]
    return flags, errors


def run_trial(cfg: TrialConfig, trial_index: int) -> TrialRecord:
    start = time.perf_counter()
    seed, a, b, spec, v = trial_inputs(cfg, trial_index)
    reports: list[bd.BoundReport] = []
    notes: dict[str, str] = {}
    evaluated: list[str] = []
    regularized = False
    for name in cfg.bound_set:
        if name == "oracle":
            continue
        try:
            out = EVALUATORS[name](a, b, spec, cfg.regularization_eps)
        except (bd.NotApplicableError, bd.MinorGateError) as exc:
            notes[name] = f"not applicable: {exc}"
            continue
        evaluated.append(name)
        for r in out:
            if r.context.get("eps"):
                regularized = True
        reports.extend(out)
    oracles, errors = {}, {}
    if "oracle" in cfg.bound_set or (
        isinstance(cfg.spec_policy, str) and cfg.spec_policy.startswith("random")
    ):
        oracles, errors = oracle_checks(a, b, spec, v)
        evaluated.append("oracle")
    inputs = {
        "n": cfg.n,
        "rank_a": a.rank_estimate,
        "rank_b": b.rank_estimate,
        "spec": spec.to_dict(),
        "spec_class": spec.classification,
        "spec_tag": spec.tag,
        "regularized": regularized,
    }
    return TrialRecord(
        trial_index, seed, inputs, reports, notes, oracles, errors, evaluated,
        time.perf_counter() - start,
    )


def worker_count() -> int:
    raw = os.environ.get("CAUSAL_GRAM_THREADS", "").strip()
    if not raw:
        return 1
    count = int(raw)
    return count if count > 0 else (os.cpu_count() or 1)


def run_trials(
    cfg: TrialConfig,
    workers: int | None = None,
    persist_dir: str | Path | None = None,
) -> tuple[list[TrialRecord], dict]:
    """Run every trial of ``cfg`` and return records in trial order plus a summary.

    Trials are independent; with ``workers > 1`` they run on a thread pool and
    results are re-ordered by trial index.  Records with a violated bound or a
    failed oracle are written to ``persist_dir`` when given.
    """
    cfg.validate()
    workers = worker_count() if workers is None else workers
    indices = range(cfg.trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda i: run_trial(cfg, i), indices))
    else:
        records = [run_trial(cfg, i) for i in indices]
    summary = summarize(records)
    summary["config"] = cfg.describe()
    if persist_dir is not None:
        for rec in records:
            if rec.violated or rec.oracle_failed:
                persist_counterexample(cfg, rec, persist_dir)
    return records, summary


def persist_counterexample(cfg: TrialConfig, rec: TrialRecord, directory) -> Path:
    from .serialize import matrix_to_dict

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _, a, b, spec, _ = trial_inputs(cfg, rec.trial_index)
    payload = {
        "config": cfg.describe(),
        "record": rec.to_dict(),
        "A": matrix_to_dict(a.matrix),
        "B": matrix_to_dict(b.matrix),
    }
    path = directory / f"counterexample_{cfg.master_seed}_{rec.trial_index}.json"
    path.write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
    log.warning("violation in trial %d persisted to %s", rec.trial_index, path)
    return path


def summarize(records: Sequence[TrialRecord]) -> dict:
    """Per-bound verdict counts, min/median gap and replayable extremal trials."""
    if not records:
        raise ValueError("cannot summarize an empty record set")
    per_bound: dict[str, dict] = {}
    gaps: dict[str, list[tuple[float, int, int]]] = {}
    for rec in records:
        for r in rec.reports:
            entry = per_bound.setdefault(
                r.name, {"holds": 0, "equality": 0, "violated": 0, "not_applicable": 0}
            )
            entry[r.verdict] += 1
            gaps.setdefault(r.name, []).append((r.gap, rec.trial_index, rec.seed))
        for name in rec.notes:
            entry = per_bound.setdefault(
                name, {"holds": 0, "equality": 0, "violated": 0, "not_applicable": 0}
            )
            entry["not_applicable"] += 1
    for name, values in gaps.items():
        gap_min = min(values)
        gap_max = max(values)
        per_bound[name].update(
            min_gap=gap_min[0],
            median_gap=statistics.median(g for g, _, _ in values),
            argmin_trial=gap_min[1],
            argmin_seed=gap_min[2],
            argmax_trial=gap_max[1],
            argmax_seed=gap_max[2],
        )
    oracle_totals: dict[str, dict] = {}
    for rec in records:
        for name, ok in rec.oracles.items():
            entry = oracle_totals.setdefault(name, {"pass": 0, "fail": 0, "max_error": 0.0})
            entry["pass" if ok else "fail"] += 1
            if name in rec.oracle_errors:
                entry["max_error"] = max(entry["max_error"], rec.oracle_errors[name])
    violations = sum(v["violated"] for v in per_bound.values())
    oracle_failures = sum(v["fail"] for v in oracle_totals.values())
    return {
        "trials": len(records),
        "bounds": dict(sorted(per_bound.items())),
        "oracles": dict(sorted(oracle_totals.items())),
        "violations": violations,
        "oracle_failures": oracle_failures,
        "regularized_trials": sum(1 for r in records if r.inputs.get("regularized")),
        "failed": bool(violations or oracle_failures),
    }
