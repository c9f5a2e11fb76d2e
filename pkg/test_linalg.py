"""
행렬 연산 모듈 테스트
연산자 노름, 직합, 유니터리, Haar 샘플링
"""
import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from linalg import (
    ComplexMatrix,
    IndexOutOfRangeError,
    NonFiniteError,
    NotUnitaryError,
    Unitary,
    direct_sum,
    haar_unitary,
    multiplicity_sum,
    op_norm,
    permutation_unitary,
    power_norm_estimate,
    spectral_radius,
    split_seed,
    swap_unitary,
)

ENTRY = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
REL = 1e-9
NILPOTENT = [[0, 1], [0, 0]]


def _complex(n: int, count: int):
    return st.tuples(*[arrays(np.float64, (n, n), elements=ENTRY) for _ in range(2 * count)]).map(
        lambda parts: [parts[2 * k] + 1j * parts[2 * k + 1] for k in range(count)]
    )


def square_pairs(max_dim: int = 8):
    return st.integers(1, max_dim).flatmap(lambda n: _complex(n, 2))


def test_op_norm_examples():
    assert op_norm(ComplexMatrix.identity(2)) == pytest.approx(1.0, abs=1e-12)
    assert op_norm(ComplexMatrix.diag([-2.0, 2.0])) == pytest.approx(2.0, abs=1e-12)
    assert op_norm(ComplexMatrix(NILPOTENT)) == pytest.approx(1.0, abs=1e-12)


def test_nonfinite_entries_rejected():
    with pytest.raises(NonFiniteError):
        ComplexMatrix([[np.nan, 0], [0, 1]])
    with pytest.raises(NonFiniteError):
        op_norm(np.array([[np.inf]]))


def test_spectral_radius_examples():
    assert spectral_radius(ComplexMatrix.identity(2)) == pytest.approx(1.0)
    assert spectral_radius(ComplexMatrix(NILPOTENT)) == pytest.approx(0.0, abs=1e-12)
    assert spectral_radius(ComplexMatrix.diag([-2.0, 2.0])) == pytest.approx(2.0)


def test_direct_sum_examples():
    assert direct_sum(ComplexMatrix.identity(1), ComplexMatrix.identity(1)) == ComplexMatrix.identity(2)
    total = direct_sum(ComplexMatrix.diag([1.0]), ComplexMatrix.diag([-2.0, 2.0]))
    assert total == ComplexMatrix.diag([1.0, -2.0, 2.0])
    assert op_norm(total) == pytest.approx(2.0)
    a = ComplexMatrix([[1, 2j], [0, 3]])
    assert op_norm(direct_sum(ComplexMatrix.zeros(1), a)) == pytest.approx(op_norm(a), abs=1e-12)


def test_multiplicity_sum_examples():
    a = ComplexMatrix([[1, 2j], [0, 3]])
    assert multiplicity_sum(a, 1) == a
    assert multiplicity_sum(ComplexMatrix.identity(2), 3) == ComplexMatrix.identity(6)
    assert op_norm(multiplicity_sum(ComplexMatrix.diag([-2.0, 2.0]), 2)) == pytest.approx(2.0)


@seed(20240501)
@settings(max_examples=60, deadline=None)
@given(square_pairs())
def test_norm_laws(pair):
    a, b = pair
    na, nb = op_norm(a), op_norm(b)
    assert op_norm(a @ b) <= na * nb * (1 + REL) + 1e-9
    assert op_norm(a + b) <= (na + nb) * (1 + REL) + 1e-9
    assert op_norm(a.conj().T) == pytest.approx(na, rel=1e-10, abs=1e-10)
    assert op_norm(a.conj().T @ a) == pytest.approx(na ** 2, rel=REL, abs=1e-9)
    assert op_norm(direct_sum(a, b)) == pytest.approx(max(na, nb), rel=1e-10, abs=1e-10)
    assert spectral_radius(a) <= na * (1 + REL) + 1e-9


@seed(7)
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: _complex(n, 1)), st.integers(0, 2 ** 32))
def test_unitary_invariance(mats, s):
    a = mats[0]
    n = a.shape[0]
    u, v = haar_unitary(n, s), haar_unitary(n, s + 1)
    assert op_norm(u.entries @ a @ v.entries) == pytest.approx(op_norm(a), rel=REL, abs=1e-9)


def test_haar_unitary_contract():
    scalar = haar_unitary(1, 42)
    assert abs(abs(scalar.entries[0, 0]) - 1.0) <= 1e-12
    u = haar_unitary(4, 42)
    assert op_norm(u.entries.conj().T @ u.entries - np.eye(4)) <= 1e-10
    assert np.array_equal(haar_unitary(4, 42).entries, u.entries)
    assert not np.array_equal(haar_unitary(4, 43).entries, u.entries)


def test_swap_unitary():
    assert np.array_equal(swap_unitary(2, 1, 2).entries, np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.array_equal(swap_unitary(5, 3, 3).entries, np.eye(5, dtype=complex))
    for n, i, j in [(3, 1, 3), (6, 2, 5), (4, 4, 1)]:
        u = swap_unitary(n, i, j)
        assert np.array_equal(u.entries @ u.entries, np.eye(n, dtype=complex))
        assert np.array_equal(u.entries, u.entries.conj().T)
    with pytest.raises(IndexOutOfRangeError):
        swap_unitary(3, 0, 2)
    with pytest.raises(IndexOutOfRangeError):
        swap_unitary(3, 1, 4)


def test_permutation_unitary_columns():
    u = permutation_unitary([2, 0, 1])
    eye = np.eye(3)
    for k, target in enumerate([2, 0, 1]):
        assert np.array_equal(u.entries[:, k], eye[:, target])


def test_unitary_rejects_non_unitary():
    with pytest.raises(NotUnitaryError):
        Unitary(ComplexMatrix.diag([1.0, 2.0]))
    with pytest.raises(AttributeError):
        Unitary.identity(2).matrix = ComplexMatrix.identity(2)


def test_power_iteration_cross_check():
    assert power_norm_estimate(ComplexMatrix.diag([3.0, 1.0, 0.5])) == pytest.approx(3.0, abs=1e-9)
    rng = np.random.default_rng(3)
    for n in (2, 5, 9):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        assert power_norm_estimate(a) <= op_norm(a) * (1 + 1e-12)


def test_split_seed_is_deterministic():
    first = split_seed(99, 5)
    assert first == split_seed(99, 5)
    assert len(set(first)) == 5


if __name__ == "__main__":
    print("=" * 50)
    print("행렬 연산 모듈 테스트")
    print("=" * 50)
    for name, func in list(globals().items()):
        if name.startswith("test_") and callable(func):
            func()
            print(f"✅ {name}")
    print("\n🎉 모든 테스트 완료!")
