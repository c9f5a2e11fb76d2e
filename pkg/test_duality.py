"""
쌍대성 모듈 테스트
Fenchel 켤레, δ(s) 왕복 복원, Lipschitz 정칙화, Rep 연속률 샌드위치
"""
import numpy as np
import pytest

from duality import (
    DualityError,
    EmptyGridError,
    GridFn,
    RealFunctionOnSpace,
    biconjugate,
    delta_curve,
    delta_from_modulus,
    exact_modulus,
    fenchel_conjugate,
    hull_slope_grid,
    lip_regularize,
    lipschitz_constant,
    lipschitz_distance,
    random_concave_modulus,
    reconstruct_modulus,
    sandwich_check,
)
from modulus import ConcaveFn
from reps import sample_rep_pairs
from transport import TransportError, commutative_algebra, lipschitz_generators, random_space

ROUND_TRIP = 1e-9


def _random_function(size: int, seed: int) -> RealFunctionOnSpace:
    space = random_space(size, seed)
    rng = np.random.default_rng(seed + 1000)
    return RealFunctionOnSpace(space, rng.uniform(-2.0, 2.0, size))


def test_fenchel_conjugate_examples():
    h = GridFn([0.0, 1.0], [0.0, 1.0])
    conj = fenchel_conjugate(h, [0.0, 1.0, 2.0])
    assert conj.values.tolist() == [0.0, 0.0, 1.0]


def test_grid_fn_validation():
    with pytest.raises(EmptyGridError):
        GridFn([], [])
    with pytest.raises(DualityError):
        GridFn([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(DualityError):
        GridFn([0.0, 1.0], [1.0])
    with pytest.raises(EmptyGridError):
        fenchel_conjugate(GridFn([0.0], [0.0]), [])


def test_biconjugate_is_lower_convex_envelope():
    grid = np.linspace(-1.0, 1.0, 11)
    convex = GridFn(grid, grid ** 2)
    assert np.allclose(biconjugate(convex).values, convex.values, atol=1e-12)

    bump = GridFn([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
    assert np.allclose(biconjugate(bump).values, [0.0, 0.0, 0.0], atol=1e-12)

    rng = np.random.default_rng(4)
    h = GridFn(np.sort(rng.uniform(-3, 3, 16)), rng.uniform(-1, 1, 16))
    once = biconjugate(h)
    assert np.all(once.values <= h.values + 1e-12)
    assert np.allclose(biconjugate(once).values, once.values, atol=1e-10)


def test_young_inequality_on_grid():
    rng = np.random.default_rng(5)
    h = GridFn(np.linspace(0.0, 2.0, 9), rng.uniform(0.0, 1.0, 9))
    s = np.linspace(-1.0, 3.0, 13)
    conj = fenchel_conjugate(h, s)
    gap = h.values[None, :] + conj.values[:, None] - conj.grid[:, None] * h.grid[None, :]
    assert np.all(gap >= -1e-12)


def test_delta_examples():
    assert delta_from_modulus(ConcaveFn.zero(), 0.0) == 0.0
    omega = ConcaveFn([(0.0, 0.0), (1.0, 1.5), (2.0, 2.0)])
    assert delta_from_modulus(omega, 1.5) == 0.0
    assert delta_from_modulus(omega, 10.0) == 0.0
    assert delta_from_modulus(ConcaveFn.linear(1.0, 2.0), 0.0) == pytest.approx(1.0)
    with pytest.raises(DualityError):
        delta_from_modulus(omega, -0.1)

    curve = delta_curve(omega)
    assert curve.grid.tolist() == hull_slope_grid(omega).tolist()
    assert np.all(np.diff(curve.values) <= 1e-15)


def test_round_trip_reconstruction():
    rng = np.random.default_rng(20240601)
    for _ in range(25):
        omega = random_concave_modulus(rng)
        assert omega.breakpoints.shape[0] <= 10
        t = np.unique(np.concatenate([omega.ts, np.linspace(0.0, 1.5 * omega.ts[-1], 40)]))
        rebuilt = reconstruct_modulus(delta_curve(omega), t)
        assert np.max(np.abs(rebuilt.values - np.asarray(omega(t)))) <= ROUND_TRIP


def test_reconstruction_from_dense_delta_samples():
    omega = ConcaveFn([(0.0, 0.0), (0.5, 1.0), (2.0, 1.6)])
    s = np.concatenate([hull_slope_grid(omega), np.linspace(0.0, 4.0, 81)])
    t = np.linspace(0.0, 3.0, 31)
    rebuilt = reconstruct_modulus(delta_curve(omega, s), t)
    assert np.allclose(rebuilt.values, omega(t), atol=ROUND_TRIP)


def test_lip_regularize_certificates():
    for k in range(20):
        f = _random_function(3 + k % 5, seed=300 + k)
        omega = exact_modulus(f)
        for s in hull_slope_grid(omega):
            fs, report = lip_regularize(f, float(s), omega)
            assert report["lipschitz_ok"], (k, s)
            assert report["deviation_ok"], (k, s)
            if s > 0:
                assert lipschitz_constant(fs) <= s + 1e-10
                assert lipschitz_distance(f, float(s)) <= report["delta"] + 1e-9


def test_lip_regularize_examples():
    f = _random_function(5, seed=11)
    omega = exact_modulus(f)
    lip = lipschitz_constant(f)
    fs, report = lip_regularize(f, lip * 1.01, omega)
    assert report["delta"] == 0.0
    assert f.sup_distance(fs) <= 1e-12
    assert lipschitz_distance(f, lip * 1.01) <= 1e-9

    flat = RealFunctionOnSpace(f.space, np.full(5, 0.7))
    flat_omega = exact_modulus(flat)
    assert flat_omega.sup == 0.0
    same, _ = lip_regularize(flat, 1.0, flat_omega)
    assert flat.sup_distance(same) <= 1e-12

    with pytest.raises(TransportError):
        RealFunctionOnSpace(f.space, [1.0, 2.0])


def test_sandwich_on_commutative_samples():
    for k in range(3):
        space = random_space(4, seed=50 + k)
        rng = np.random.default_rng(k)
        u = RealFunctionOnSpace(space, rng.uniform(-1, 1, 4))
        v = RealFunctionOnSpace(space, rng.uniform(-1, 1, 4))
        pairs = sample_rep_pairs(commutative_algebra(space), [1, 1, 1, 1], 40, seed=900 + k)
        report = sandwich_check(u, v, pairs, lipschitz_generators(space))
        assert report["real_residual"] <= 1e-9
        assert report["complex_residual"] <= 1e-9
        assert report["grid_residual"] <= 1e-9
        assert report["passed"]
        assert report["generating_set_size"] == 4 + report["regularizers_added"]

    real_only = sandwich_check(u, None, pairs, lipschitz_generators(space))
    assert real_only["passed"]


if __name__ == "__main__":
    print("=" * 50)
    print("쌍대성 모듈 테스트")
    print("=" * 50)
    for name, func in list(globals().items()):
        if name.startswith("test_") and callable(func):
            func()
            print(f"✅ {name}")
    print("\n🎉 모든 테스트 완료!")
