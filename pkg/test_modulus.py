"""
연속률 모듈 테스트
경험적 연속률, 오목 majorant, 합성, 계산 규칙 보고서, 체인 부등식
"""
import numpy as np
import pytest

from algebra import FdAlgebra, GeneratingSet, random_generating_set
from linalg import exp_i_hermitian, haar_unitary, random_hermitian
from modulus import (
    ConcaveFn,
    EmpiricalModulus,
    EmptySampleSetError,
    NoModulusError,
    NotConcaveError,
    cauchy_consistency_check,
    chain_inequality_check,
    compose_modulus,
    concave_majorant,
    empirical_modulus,
    modulus_calculus_report,
    modulus_table,
    morphism_modulus_check,
    sample_set_id,
    uniform_equivalence_check,
)
from reps import Representation, conjugate_rep, hom_apply, random_homomorphism, sample_rep_pairs

EQ = 1e-10
INEQ = 1e-9


def _setup(block_dims=(3, 4), count=200, seed=2024):
    algebra = FdAlgebra(list(block_dims))
    rng = np.random.default_rng(seed)
    K = random_generating_set(algebra, 2, rng)
    pairs = sample_rep_pairs(algebra, [1] * algebra.block_count, count, seed)
    return algebra, K, pairs, rng


def test_concave_majorant_examples():
    line = concave_majorant(EmpiricalModulus([(1.0, 1.0), (2.0, 2.0)]))
    assert line(0.5) == pytest.approx(0.5)
    assert line(1.0) == pytest.approx(1.0)
    assert line(3.0) == pytest.approx(2.0)

    flat = concave_majorant(EmpiricalModulus([(1.0, 2.0), (2.0, 2.0)]))
    assert flat.breakpoints.tolist() == [[0.0, 0.0], [1.0, 2.0]]
    assert flat(0.5) == pytest.approx(1.0)
    assert flat(2.0) == pytest.approx(2.0)

    zero = concave_majorant(EmpiricalModulus([(1.0, 0.0), (3.0, 0.0)]))
    assert zero(5.0) == 0.0


def test_concave_majorant_rejects_positive_deviation_at_zero_distance():
    # f(0⁺) = 1 이면 ω(0) = 0 인 오목 majorant 가 step_eval 을 지배할 수 없음
    with pytest.raises(NoModulusError):
        concave_majorant(EmpiricalModulus([(0.0, 1.0), (1.0, 0.5)]))

    # 거리 0 에서 편차 0 인 쌍(같은 표현)은 허용
    f = EmpiricalModulus([(0.0, 0.0), (0.5, 1.0), (1.0, 0.5)])
    hull = concave_majorant(f)
    grid = np.linspace(0.0, 2.0, 41)
    assert np.all(np.asarray(hull(grid)) >= np.asarray(f.step_eval(grid)) - 1e-12)


def test_concave_fn_invariants():
    with pytest.raises(NotConcaveError):
        ConcaveFn([(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)])
    with pytest.raises(NotConcaveError):
        ConcaveFn([(0.5, 0.0), (1.0, 1.0)])
    with pytest.raises(NotConcaveError):
        ConcaveFn([(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)])
    with pytest.raises(EmptySampleSetError):
        EmpiricalModulus([])


def test_step_eval_convention():
    f = EmpiricalModulus([(0.5, 0.2), (1.0, 0.1), (2.0, 0.7)])
    assert f.step_eval(0.0) == 0.0
    assert f.step_eval(0.75) == pytest.approx(0.2)
    assert f.step_eval(1.5) == pytest.approx(0.2)
    assert f.step_eval(9.0) == pytest.approx(0.7)


def test_hull_dominates_samples_and_uses_sample_breakpoints():
    rng = np.random.default_rng(0)
    samples = np.column_stack([rng.uniform(0.01, 3.0, 80), rng.uniform(0.0, 2.0, 80)])
    f = EmpiricalModulus(samples)
    hull = concave_majorant(f)
    assert np.all(np.asarray(hull(f.t)) >= f.v - 1e-12)
    sample_points = {tuple(p) for p in samples.tolist()} | {(0.0, 0.0)}
    assert all(tuple(p) in sample_points for p in hull.breakpoints.tolist())
    for t, step, value in modulus_table(f, hull):
        assert value >= step - 1e-12


def test_compose_modulus_examples():
    inner = ConcaveFn([(0.0, 0.0), (1.0, 0.5), (3.0, 1.0)])
    identity_like = ConcaveFn([(0.0, 0.0), (10.0, 10.0)])
    composed = compose_modulus(identity_like, inner)
    grid = np.linspace(0.0, 4.0, 41)
    assert np.allclose(composed(grid), inner(grid), atol=1e-12)

    assert compose_modulus(identity_like, ConcaveFn.zero())(2.0) == 0.0

    capped = compose_modulus(ConcaveFn([(0.0, 0.0), (2.0, 2.0)]), ConcaveFn([(0.0, 0.0), (5.0, 10.0)]))
    assert capped(0.5) == pytest.approx(1.0)
    assert capped(1.0) == pytest.approx(2.0)
    assert capped(4.0) == pytest.approx(2.0)
    assert np.all(np.diff(capped.slopes) <= 1e-12)


def test_empirical_modulus_examples():
    algebra, K, _, _ = _setup((2, 2), count=10)
    frozen = sample_rep_pairs(algebra, [1, 1], 10, 5, perturbation_scale=0.0)[5:]
    f = empirical_modulus(frozen, K, [algebra.random_element(np.random.default_rng(1))])
    assert np.all(f.t == 0.0) and np.all(f.v == 0.0)

    pairs = sample_rep_pairs(algebra, [1, 1], 20, 6)
    assert np.all(empirical_modulus(pairs, K, [algebra.unit()]).v <= 1e-12)

    own = empirical_modulus(pairs, K, list(K.elements))
    assert np.all(own.v <= own.t + 1e-12)
    grid = np.linspace(0.0, own.max_t, 30)
    assert np.all(np.asarray(own.step_eval(grid)) <= grid + 1e-12)

    with pytest.raises(EmptySampleSetError):
        empirical_modulus([], K, [algebra.unit()])
    with pytest.raises(EmptySampleSetError):
        empirical_modulus(pairs, K, [])


def test_enlarging_the_sample_never_lowers_the_step_function():
    algebra, K, pairs, rng = _setup((2, 3), count=40, seed=8)
    a = algebra.random_element(rng)
    extra = sample_rep_pairs(algebra, [1, 1], 40, 9)
    small = empirical_modulus(pairs, K, [a])
    large = empirical_modulus(pairs + extra, K, [a])
    grid = np.linspace(0.0, large.max_t, 50)
    assert np.all(np.asarray(large.step_eval(grid)) >= np.asarray(small.step_eval(grid)))


def test_modulus_calculus_on_shared_samples():
    algebra, K, pairs, rng = _setup((3, 4), count=200)
    a, b = algebra.random_element(rng), algebra.random_element(rng)
    report = modulus_calculus_report(pairs, K, a, b, lam=2.0)
    residuals = report["residuals"]
    for key in ("adjoint", "shift", "unit", "scale"):
        assert residuals[key] <= EQ, key
    for key in ("subadditive", "leibniz"):
        assert residuals[key] <= INEQ, key
    for key, value in report["per_sample_residuals"].items():
        assert value <= EQ, key
    assert report["passed"]
    assert report["provenance"] == sample_set_id(pairs)
    assert report["curves"]["unit"].sup <= 1e-12

    grid = report["grid"]
    assert np.allclose(report["curves"]["lambda_a"](grid), 2.0 * report["curves"]["a"](grid), atol=EQ)

    unit_report = modulus_calculus_report(pairs, K, algebra.unit(), b, lam=1j)
    assert unit_report["curves"]["a"].sup <= 1e-12


def test_chain_inequality():
    algebra, K, pairs, rng = _setup((3, 4), count=200, seed=77)
    a = algebra.random_element(rng)
    assert chain_inequality_check(pairs, K, K, a)["residual"] <= INEQ

    member = chain_inequality_check(pairs, K, K, K.elements[0])
    assert member["residual"] <= INEQ
    assert np.all(member["curves"]["lhs"](np.linspace(0, 3, 20)) <= np.linspace(0, 3, 20) + 1e-12)

    bigger = K.union(GeneratingSet(algebra, [algebra.random_element(rng)]))
    report = chain_inequality_check(pairs, K, bigger, a)
    assert report["residual"] <= INEQ
    assert report["per_sample_residual"] <= INEQ
    assert report["passed"]


def test_uniform_equivalence_witness():
    algebra, K, pairs, rng = _setup((2, 3), count=120, seed=13)
    K_prime = random_generating_set(algebra, 3, rng)
    report = uniform_equivalence_check(pairs, K, K_prime)
    assert report["residual"] <= INEQ
    assert report["passed"]


def test_morphism_modulus():
    source = FdAlgebra([1, 2])
    rng = np.random.default_rng(21)
    K = random_generating_set(source, 2, rng)
    alpha = random_homomorphism(source, [[1, 1], [0, 2]], seed=4)
    image = [hom_apply(alpha, x) for x in K.elements]
    L = GeneratingSet(alpha.target, image + [alpha.target.random_element(rng)])
    pairs = sample_rep_pairs(alpha.target, [1, 1], 60, 17)
    report = morphism_modulus_check(pairs, alpha, K, L)
    assert report["image_contained"]
    assert report["isometry_residual"] <= EQ
    assert report["nonexpansive_residual"] <= EQ
    assert report["passed"]
    assert len(report["element_bound_residuals"]) == len(K)
    assert report["element_bound_residual"] <= INEQ

    # ω^L_{α(a)} ≤ ω^K_a ∘ ω_α 는 L 이 α(K) 를 포함하지 않아도 성립
    elements = [source.random_element(rng) for _ in range(3)]
    other_L = random_generating_set(alpha.target, 2, rng)
    loose = morphism_modulus_check(pairs, alpha, K, other_L, elements)
    assert not loose["image_contained"]
    assert loose["nonexpansive_residual"] is None
    assert len(loose["element_bound_residuals"]) == 3
    assert max(loose["element_bound_sample_residuals"]) <= INEQ
    assert loose["element_bound_residual"] <= INEQ


def test_cauchy_consistency():
    algebra = FdAlgebra([2, 2])
    K = random_generating_set(algebra, 2, np.random.default_rng(3))
    base = Representation(algebra, [1, 1], haar_unitary(4, 1))
    h = random_hermitian(4, np.random.default_rng(2))
    sequence = [conjugate_rep(base, exp_i_hermitian(h, 2.0 ** -k)) for k in range(8)]
    report = cauchy_consistency_check(sequence, K)
    assert report["monotone"]
    assert report["passed"]
    assert report["tail_diameters"][-1] < report["tail_diameters"][0]
    with pytest.raises(EmptySampleSetError):
        cauchy_consistency_check(sequence[:1], K)


if __name__ == "__main__":
    print("=" * 50)
    print("연속률 모듈 테스트")
    print("=" * 50)
    for name, func in list(globals().items()):
        if name.startswith("test_") and callable(func):
            func()
            print(f"✅ {name}")
    print("\n🎉 모든 테스트 완료!")
