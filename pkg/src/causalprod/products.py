"""Hadamard, Jury and general causal products of square matrices.

A causal product is fixed by, for each row index ``m``, an index set
``T_m`` inside ``{0..m}`` that contains ``m``, and a permutation ``sigma_m``
of ``T_m``.  Entry ``(j, k)`` of ``A * B`` is

    sum over (p, q) in T_j x T_k of  a[p, q] * b[sigma_j(p), sigma_k(q)].

``T_m = {m}`` with identity permutations gives the Hadamard product;
``T_m = {0..m}`` with ``p -> m - p`` gives the Jury product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import toeplitz

from .linalg import (
    HermitianPsd,
    as_matrix,
    as_vector,
    certify_psd,
    cholesky,
    rng,
)

Classification = Literal["all_fixed", "none_fixed", "mixed", "degenerate"]
Tag = Literal["hadamard", "jury", "custom"]


class InvalidSpecError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid causal spec: " + "; ".join(violations))


def _check_same_shape(a: NDArray, b: NDArray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class CausalSpec:
    """Index sets ``sets[m]`` and aligned permutation images ``perms[m]``.

    ``sets[m]`` lists ``T_m`` in increasing order and ``perms[m][i]`` is the
    image of ``sets[m][i]`` under ``sigma_m``.  The constructor normalizes to
    tuples but does not validate; see :func:`validate_spec`.
    """

    n: int
    sets: tuple[tuple[int, ...], ...]
    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(tuple(int(x) for x in s) for s in self.sets))
        object.__setattr__(self, "perms", tuple(tuple(int(x) for x in s) for s in self.perms))

    def sigma(self, m: int, p: int) -> int:
        return self.perms[m][self.sets[m].index(p)]

    def sigma_inv(self, m: int, p: int) -> int:
        return self.sets[m][self.perms[m].index(p)]

    @cached_property
    def fixes_diagonal(self) -> tuple[bool, ...]:
        """Indicator ``sigma_m(m) == m`` for each ``m``."""
        return tuple(self.sigma(m, m) == m for m in range(self.n))

    @property
    def classification(self) -> Classification:
        tail = self.fixes_diagonal[1:]
        if not tail:
            return "degenerate"
        if all(tail):
            return "all_fixed"
        if not any(tail):
            return "none_fixed"
        return "mixed"

    @property
    def tag(self) -> Tag:
        if self == builtin_spec("hadamard", self.n):
            return "hadamard"
        if self == builtin_spec("jury", self.n):
            return "jury"
        return "custom"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "T": [list(s) for s in self.sets],
            "sigma": [list(p) for p in self.perms],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "CausalSpec":
        try:
            n = int(payload["n"])
            sets = payload["T"]
            perms = payload["sigma"]
        except (KeyError, TypeError) as exc:
            raise InvalidSpecError([f"malformed spec object: {exc!r}"]) from None
        spec = cls(n, sets, perms)
        problems = validate_spec(spec)
        if problems:
            raise InvalidSpecError(problems)
        return spec


def validate_spec(spec: CausalSpec) -> list[str]:
    """Return every violated invariant of ``spec``; empty means valid."""
    problems = []
    if spec.n < 1:
        return [f"n must be >= 1, got {spec.n}"]
    if len(spec.sets) != spec.n or len(spec.perms) != spec.n:
        return [
            f"expected {spec.n} sets and permutations, got "
            f"{len(spec.sets)} and {len(spec.perms)}"
        ]
    for m, (t, s) in enumerate(zip(spec.sets, spec.perms)):
        if any(x < 0 or x > m for x in t):
            problems.append(f"T_{m} not a subset of {{0..{m}}}")
        if list(t) != sorted(set(t)):
            problems.append(f"T_{m} not strictly increasing")
        if m not in t:
            problems.append(f"{m} not in T_{m}")
        if len(s) != len(t):
            problems.append(f"sigma_{m} has {len(s)} images for {len(t)} domain points")
        elif sorted(s) != sorted(t) or len(set(s)) != len(s):
            problems.append(f"sigma_{m} is not a bijection of T_{m}")
    return problems


def builtin_spec(kind: Literal["hadamard", "jury"], n: int) -> CausalSpec:
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind == "hadamard":
        return CausalSpec(n, [(m,) for m in range(n)], [(m,) for m in range(n)])
    if kind == "jury":
        sets = [tuple(range(m + 1)) for m in range(n)]
        perms = [tuple(m - p for p in range(m + 1)) for m in range(n)]
        return CausalSpec(n, sets, perms)
    raise ValueError(f"unknown builtin spec {kind!r}")


def random_spec(
    n: int,
    seed: int,
    diagonal: Literal["any", "all_fixed", "none_fixed"] = "any",
) -> CausalSpec:
    """Seeded random valid spec.

    ``T_m`` is uniform over subsets of ``{0..m}`` containing ``m`` and
    ``sigma_m`` uniform over permutations of ``T_m``, conditioned on the
    requested diagonal behaviour for ``m >= 1``.
    """
    gen = rng(seed)
    sets, perms = [(0,)], [(0,)]
    for m in range(1, n):
        while True:
            keep = gen.random(m) < 0.5
            t = tuple(int(i) for i in np.flatnonzero(keep)) + (m,)
            if diagonal == "none_fixed" and len(t) < 2:
                continue
            break
        if diagonal == "all_fixed":
            rest = list(gen.permutation(t[:-1])) if len(t) > 1 else []
            images = tuple(int(x) for x in rest) + (m,)
        else:
            while True:
                images = tuple(int(x) for x in gen.permutation(t))
                if diagonal != "none_fixed" or images[-1] != m:
                    break
        sets.append(t)
        perms.append(images)
    return CausalSpec(n, sets, perms)


def convolve(u: ArrayLike, v: ArrayLike) -> NDArray[np.complex128]:
    """Truncated convolution ``(u * v)_j = sum_{m<=j} u_m v_{j-m}``."""
    u, v = as_vector(u), as_vector(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return np.convolve(u, v)[: u.shape[0]]


def toeplitz_lower(v: ArrayLike) -> NDArray[np.complex128]:
    """Lower-triangular Toeplitz matrix with first column ``v``."""
    v = as_vector(v)
    return toeplitz(v, np.zeros_like(v))


def hadamard(a: ArrayLike, b: ArrayLike) -> NDArray[np.complex128]:
    a, b = as_matrix(a), as_matrix(b)
    _check_same_shape(a, b)
    # scalar complex multiply (not vectorized) so causal() reproduces it bit for bit
    rows = [[x * y for x, y in zip(ra, rb)] for ra, rb in zip(a.tolist(), b.tolist())]
    return np.array(rows, dtype=np.complex128)


def jury(a: ArrayLike, b: ArrayLike) -> NDArray[np.complex128]:
    """Jury product by its double sum, accumulated in ascending ``(m, n)``."""
    a, b = as_matrix(a), as_matrix(b)
    _check_same_shape(a, b)
    N = a.shape[0]
    al, bl = a.tolist(), b.tolist()
    out = np.empty((N, N), dtype=np.complex128)
    for j in range(N):
        for k in range(N):
            acc = 0j
            for m in range(j + 1):
                arow, brow = al[m], bl[j - m]
                for n in range(k + 1):
                    acc += arow[n] * brow[k - n]
            out[j, k] = acc
    return out


def jury_shifted(a: ArrayLike, b: ArrayLike) -> NDArray[np.complex128]:
    """Jury product as ``sum_{m,n} a[m,n] * S^m B (S^n)^T`` with ``S`` the down-shift.

    Independent vectorized route used to cross-check :func:`jury` and to keep
    the gap search fast.
    """
    a, b = as_matrix(a), as_matrix(b)
    _check_same_shape(a, b)
    N = a.shape[0]
    out = np.zeros((N, N), dtype=np.complex128)
    for m in range(N):
        for n in range(N):
            out[m:, n:] += a[m, n] * b[: N - m, : N - n]
    return out


def jury_congruence(a: ArrayLike, v: ArrayLike) -> NDArray[np.complex128]:
    """``C_v A C_v^*``, which equals ``jury(A, v v^*)``."""
    a, v = as_matrix(a), as_vector(v)
    if a.shape[0] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {v.shape}")
    c = toeplitz_lower(v)
    return c @ a @ c.conj().T


def _require_valid(spec: CausalSpec, n: int) -> None:
    problems = validate_spec(spec)
    if problems:
        raise InvalidSpecError(problems)
    if spec.n != n:
        raise ValueError(f"dimension mismatch: spec has n = {spec.n}, matrices {n}")


def causal(a: ArrayLike, b: ArrayLike, spec: CausalSpec) -> NDArray[np.complex128]:
    """Causal product by its defining sum, accumulated in ascending ``(p, q)``.

    With the builtin specs the summation order matches :func:`hadamard` and
    :func:`jury`, so results agree bit for bit.
    """
    a, b = as_matrix(a), as_matrix(b)
    _check_same_shape(a, b)
    N = a.shape[0]
    _require_valid(spec, N)
    al, bl = a.tolist(), b.tolist()
    out = np.empty((N, N), dtype=np.complex128)
    for j in range(N):
        tj, sj = spec.sets[j], spec.perms[j]
        for k in range(N):
            tk, sk = spec.sets[k], spec.perms[k]
            acc = 0j
            for p, sp in zip(tj, sj):
                arow, brow = al[p], bl[sp]
                for q, sq in zip(tk, sk):
                    acc += arow[q] * brow[sq]
            out[j, k] = acc
    return out


def causal_gram_oracle(
    a: ArrayLike | HermitianPsd, b: ArrayLike | HermitianPsd, spec: CausalSpec
) -> NDArray[np.complex128]:
    """Causal product rebuilt as a Gram matrix of tensor-product vectors.

    With ``a[p, q] = <v_q, v_p>`` and ``b[p, q] = <u_q, u_p>`` the product
    entry ``(j, k)`` is ``<w_k, w_j>`` for
    ``w_k = sum_{q in T_k} v_q (x) u_{sigma_k(q)}``.
    """
    ah, bh = certify_psd(a), certify_psd(b)
    if ah.n != bh.n:
        raise ValueError(f"dimension mismatch: {ah.n} vs {bh.n}")
    N = ah.n
    _require_valid(spec, N)
    # A = L L^*  =>  a[p, q] = <v_q, v_p> with v_p = conj(L[p, :])
    v = cholesky(ah).conj()
    u = cholesky(bh).conj()
    w = np.zeros((N * N, N), dtype=np.complex128)
    for k in range(N):
        for q, sq in zip(spec.sets[k], spec.perms[k]):
            w[:, k] += np.kron(v[q], u[sq])
    # <w_k, w_j> = sum_i w_k[i] conj(w_j[i])
    return w.conj().T @ w


def rank1_jury(u: ArrayLike, v: ArrayLike) -> NDArray[np.complex128]:
    """``(u * v)(u * v)^*``, the Jury product of two rank-one matrices."""
    w = convolve(u, v)
    return np.outer(w, w.conj())

