import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalprod.linalg import certify_psd, derive_seed, det, random_psd
from causalprod.products import (
    CausalSpec,
    InvalidSpecError,
    builtin_spec,
    causal,
    causal_gram_oracle,
    convolve,
    hadamard,
    jury,
    jury_congruence,
    jury_shifted,
    rank1_jury,
    random_spec,
    toeplitz_lower,
    validate_spec,
)

from conftest import gaussian_vector, rel_close


def naive_jury(a, b):
    """Straight transcription of the double sum, independent of the library."""
    n = len(a)
    out = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            out[j, k] = sum(
                a[m][l] * b[j - m][k - l] for m in range(j + 1) for l in range(k + 1)
            )
    return out


def test_convolve_examples():
    np.testing.assert_allclose(convolve([1, 0], [0, 1]), [0, 1])
    np.testing.assert_allclose(convolve([1, 2], [3, 4]), [3, 10])
    v = gaussian_vector(5, 1)
    np.testing.assert_allclose(convolve(np.eye(5)[0], v), v)
    with pytest.raises(ValueError):
        convolve([1, 2], [1, 2, 3])


def test_toeplitz_examples():
    c = toeplitz_lower([2, 5])
    np.testing.assert_array_equal(c, [[2, 0], [5, 2]])
    assert det(c) == pytest.approx(4)
    np.testing.assert_array_equal(toeplitz_lower(np.eye(3)[0]), np.eye(3))
    np.testing.assert_array_equal(
        toeplitz_lower([1, 2, 3]), [[1, 0, 0], [2, 1, 0], [3, 2, 1]]
    )


complex_entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(
    st.lists(complex_entries, min_size=n, max_size=n),
    st.lists(complex_entries, min_size=n, max_size=n),
)))
def test_toeplitz_identities(uv):
    u, v = map(np.array, uv)
    c = toeplitz_lower(v)
    assert rel_close(convolve(u, v), c @ u, 1e-12)
    assert det(c) == pytest.approx(v[0] ** len(v), rel=1e-12, abs=1e-12)


def test_hadamard_examples(a2):
    np.testing.assert_array_equal(hadamard(np.eye(3), np.eye(3)), np.eye(3))
    np.testing.assert_array_equal(hadamard(a2, np.eye(2)), np.diag([2, 1]))
    a = random_psd(4, 4, 3).matrix
    np.testing.assert_array_equal(hadamard(a, np.ones((4, 4))), a)
    with pytest.raises(ValueError):
        hadamard(np.eye(2), np.eye(3))


def test_jury_examples(a2):
    j = jury(np.eye(2), np.eye(2))
    np.testing.assert_array_equal(j, np.diag([1, 2]))
    assert det(j) == pytest.approx(2)
    j = jury(a2, np.eye(2))
    np.testing.assert_array_equal(j, [[2, 1], [1, 3]])
    assert det(j) == pytest.approx(5)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_jury_matches_naive_and_shifted(n):
    a = random_psd(n, n, 1).matrix
    b = random_psd(n, max(1, n - 1), 2).matrix
    ref = naive_jury(a.tolist(), b.tolist())
    assert rel_close(jury(a, b), ref, 1e-12)
    assert rel_close(jury_shifted(a, b), ref, 1e-12)


def test_jury_of_hermitian_is_hermitian():
    a, b = random_psd(5, 5, 4), random_psd(5, 3, 5)
    j = jury(a, b)
    assert rel_close(j, j.conj().T, 1e-13)


@pytest.mark.parametrize("n", range(1, 7))
def test_rank1_factorization(n):
    for trial in range(20):
        u = gaussian_vector(n, derive_seed(n, trial, 0))
        v = gaussian_vector(n, derive_seed(n, trial, 1))
        lhs = jury(np.outer(u, u.conj()), np.outer(v, v.conj()))
        assert rel_close(lhs, rank1_jury(u, v), 1e-12)


def test_jury_congruence_examples():
    a = random_psd(4, 4, 9).matrix
    np.testing.assert_allclose(jury_congruence(np.eye(4), np.eye(4)[0]), np.eye(4))
    v = gaussian_vector(4, 3)
    assert rel_close(jury_congruence(a, v), jury(a, np.outer(v, v.conj())), 1e-10)
    d = det(jury_congruence(a, v))
    assert d == pytest.approx(abs(v[0]) ** 8 * det(a), rel=1e-9)


def test_jury_congruence_matches_definition():
    for trial in range(200):
        n = 1 + trial % 8
        a = random_psd(n, 1 + trial % n, trial).matrix
        v = gaussian_vector(n, derive_seed(trial, 7))
        assert rel_close(jury_congruence(a, v), jury(a, np.outer(v, v.conj())), 1e-10)


# -- specs -----------------------------------------------------------------


def test_builtin_specs():
    h = builtin_spec("hadamard", 3)
    assert h.sets == ((0,), (1,), (2,)) and h.perms == h.sets
    assert h.classification == "all_fixed" and h.tag == "hadamard"
    j = builtin_spec("jury", 2)
    assert j.sets == ((0,), (0, 1)) and j.perms == ((0,), (1, 0))
    assert j.classification == "none_fixed" and j.tag == "jury"
    assert builtin_spec("jury", 1).classification == "degenerate"
    assert validate_spec(builtin_spec("jury", 4)) == []


def test_validate_spec_reports_violations():
    bad = CausalSpec(3, [(0,), (0, 1), (0, 1)], [(0,), (1, 0), (1, 0)])
    assert any("2 not in T_2" in p for p in validate_spec(bad))
    bad = CausalSpec(2, [(0,), (0, 1)], [(0,), (0, 0)])
    assert any("not a bijection" in p for p in validate_spec(bad))
    bad = CausalSpec(2, [(0,), (1, 2)], [(0,), (1, 2)])
    assert any("not a subset" in p for p in validate_spec(bad))
    with pytest.raises(InvalidSpecError):
        causal(np.eye(2), np.eye(2), CausalSpec(2, [(0,), (0, 1)], [(0,), (0, 0)]))


@pytest.mark.parametrize("diagonal", ["any", "all_fixed", "none_fixed"])
def test_random_specs_are_valid(diagonal):
    for seed in range(200):
        spec = random_spec(6, seed, diagonal)
        assert validate_spec(spec) == []
        if diagonal != "any":
            assert spec.classification == diagonal


def test_random_spec_reproducible():
    assert random_spec(5, 3) == random_spec(5, 3)


def test_spec_dict_roundtrip():
    spec = random_spec(5, 8)
    assert CausalSpec.from_dict(spec.to_dict()) == spec


# -- causal product ----------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 7))
def test_builtin_causal_is_bitwise_hadamard_and_jury(n):
    a, b = random_psd(n, n, 1).matrix, random_psd(n, n, 2).matrix
    assert causal(a, b, builtin_spec("hadamard", n)).tobytes() == hadamard(a, b).tobytes()
    assert causal(a, b, builtin_spec("jury", n)).tobytes() == jury(a, b).tobytes()


def test_causal_custom_example(a2):
    spec = CausalSpec(2, [(0,), (0, 1)], [(0,), (0, 1)])
    c = causal(a2, np.eye(2), spec)
    np.testing.assert_array_equal(c, [[2, 2], [2, 3]])
    assert det(c) == pytest.approx(2)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32), st.complex_numbers(max_magnitude=5))
def test_causal_bilinear(n, seed, alpha):
    spec = random_spec(n, seed)
    a1, a2_, b = (random_psd(n, n, derive_seed(seed, i)).matrix for i in range(3))
    lhs = causal(alpha * a1 + a2_, b, spec)
    rhs = alpha * causal(a1, b, spec) + causal(a2_, b, spec)
    assert rel_close(lhs, rhs, 1e-12)


def test_gram_oracle_examples():
    spec = builtin_spec("hadamard", 3)
    np.testing.assert_allclose(causal_gram_oracle(np.eye(3), np.eye(3), spec), np.eye(3))
    a, b = random_psd(4, 4, 1), random_psd(4, 2, 2)
    spec = builtin_spec("jury", 4)
    g = causal_gram_oracle(a, b, spec)
    assert rel_close(g, causal(a, b, spec), 1e-9)
    certify_psd(g)


@pytest.mark.parametrize("n", range(1, 6))
def test_gram_oracle_random_specs(n):
    for trial in range(40):
        spec = random_spec(n, derive_seed(n, trial))
        a = random_psd(n, 1 + trial % n, derive_seed(n, trial, 1))
        b = random_psd(n, n, derive_seed(n, trial, 2))
        assert rel_close(causal_gram_oracle(a, b, spec), causal(a, b, spec), 1e-9)


def test_positivity_preserved():
    for trial in range(500):
        n = 2 + trial % 5
        spec = random_spec(n, trial)
        a = random_psd(n, 1 + trial % n, derive_seed(trial, 1))
        b = random_psd(n, n, derive_seed(trial, 2))
        certify_psd(causal(a, b, spec))
