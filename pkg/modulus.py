"""
연속률(modulus of continuity) 모듈
공유 표현 쌍 샘플에서 경험적 연속률 f^K_L 과 최소 오목 majorant ω^K_L 계산

핵심 기능:
- EmpiricalModulus: (거리 t, 편차 v) 샘플 + 누적 최대 계단 함수
- ConcaveFn: 구간 선형 오목 비감소 함수 (마지막 이후 상수)
- concave_majorant: (0,0) 포함 상부 볼록 껍질
- compose_modulus: 정확한 구간 선형 합성
- 연속률 계산 규칙 보고서, 체인 부등식, 균등 동치, 준동형 연속률 검사
"""
import hashlib
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from algebra import AlgebraElement, GeneratingSet, element_norm
from reps import (
    Homomorphism,
    RepPair,
    Representation,
    deviation,
    hom_apply,
    pullback,
    rep_distance,
)

logger = logging.getLogger(__name__)

EQUALITY_TOLERANCE = 1e-10
INEQUALITY_TOLERANCE = 1e-9
CONCAVITY_TOLERANCE = 1e-12
UNIFORM_GRID_POINTS = 64
ZERO_DISTANCE_TOLERANCE = 1e-12


class ModulusError(ValueError):
    """연속률 계산 오류 기본 클래스"""


class EmptySampleSetError(ModulusError):
    """샘플이 비어 있음"""


class NotConcaveError(ModulusError):
    """ConcaveFn 불변식 위반"""


class NoModulusError(ModulusError):
    """거리 0 인 쌍에서 편차가 양수: f(0⁺) > 0 이라 ω(0) = 0 인 연속률이 없음"""


class EmpiricalModulus:
    """
    경험적 연속률

    step_eval(t) = max{v_j : t_j ≤ t}, t ≤ 0 에서는 0
    """

    def __init__(self, samples: Union[np.ndarray, Sequence[Tuple[float, float]]], provenance: str = ""):
        arr = np.asarray(samples, dtype=float).reshape(-1, 2) if len(samples) else np.empty((0, 2))
        if arr.shape[0] == 0:
            raise EmptySampleSetError("empirical modulus needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ModulusError("samples must be finite")
        if np.any(arr < 0):
            raise ModulusError("distances and deviations must be nonnegative")
        order = np.lexsort((arr[:, 1], arr[:, 0]))
        arr = arr[order]
        arr.setflags(write=False)
        self.samples = arr
        self.provenance = provenance
        self._running_max = np.maximum.accumulate(arr[:, 1])

    @property
    def t(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def v(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def max_t(self) -> float:
        return float(self.samples[-1, 0])

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    def step_eval(self, t):
        query = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.t, query, side="right") - 1
        values = np.where(idx >= 0, self._running_max[np.clip(idx, 0, None)], 0.0)
        values = np.where(query <= 0.0, 0.0, values)
        return float(values) if values.ndim == 0 else values

    def __repr__(self) -> str:
        return f"EmpiricalModulus(n={len(self)}, max_t={self.max_t:.4g}, provenance={self.provenance!r})"


class ConcaveFn:
    """
    구간 선형 오목 비감소 함수, ω(0) = 0

    breakpoints: 증가하는 (t, value) 목록, 마지막 이후 상수 연장
    """

    def __init__(self, breakpoints: Union[np.ndarray, Sequence[Tuple[float, float]]], tolerance: float = CONCAVITY_TOLERANCE):
        arr = np.asarray(breakpoints, dtype=float).reshape(-1, 2)
        if arr.shape[0] == 0:
            raise NotConcaveError("at least the breakpoint (0, 0) is required")
        if not np.all(np.isfinite(arr)):
            raise NotConcaveError("breakpoints must be finite")
        ts, vs = arr[:, 0], arr[:, 1]
        scale = max(1.0, float(np.max(np.abs(arr))))
        if ts[0] != 0.0 or abs(vs[0]) > tolerance * scale:
            raise NotConcaveError(f"first breakpoint must be (0, 0), got ({ts[0]}, {vs[0]})")
        if np.any(np.diff(ts) <= 0):
            raise NotConcaveError("breakpoint abscissae must be strictly increasing")
        if np.any(np.diff(vs) < -tolerance * scale):
            raise NotConcaveError("values must be nondecreasing")
        if arr.shape[0] >= 3:
            # 연속 세 점의 외적이 양수면 볼록 꺾임
            cross = (ts[1:-1] - ts[:-2]) * (vs[2:] - vs[:-2]) - (vs[1:-1] - vs[:-2]) * (ts[2:] - ts[:-2])
            if np.any(cross > tolerance * scale * scale):
                raise NotConcaveError("slopes must be nonincreasing")
        arr = arr.copy()
        arr[0, 1] = 0.0
        arr.setflags(write=False)
        self.breakpoints = arr

    @classmethod
    def zero(cls) -> "ConcaveFn":
        return cls([(0.0, 0.0)])

    @classmethod
    def linear(cls, slope: float, cap_at: float) -> "ConcaveFn":
        """기울기 slope 로 증가 후 cap_at 에서 평탄"""
        if slope <= 0 or cap_at <= 0:
            return cls.zero()
        return cls([(0.0, 0.0), (cap_at / slope, cap_at)])

    @property
    def ts(self) -> np.ndarray:
        return self.breakpoints[:, 0]

    @property
    def values(self) -> np.ndarray:
        return self.breakpoints[:, 1]

    @property
    def slopes(self) -> np.ndarray:
        if self.breakpoints.shape[0] < 2:
            return np.empty(0)
        return np.diff(self.values) / np.diff(self.ts)

    @property
    def sup(self) -> float:
        return float(self.values[-1])

    def __call__(self, t):
        values = np.interp(np.asarray(t, dtype=float), self.ts, self.values)
        return float(values) if np.ndim(values) == 0 else values

    def scale(self, factor: float) -> "ConcaveFn":
        if factor < 0:
            raise ModulusError(f"scale factor must be nonnegative, got {factor}")
        arr = self.breakpoints.copy()
        arr[:, 1] *= factor
        return ConcaveFn(arr)

    def __repr__(self) -> str:
        return f"ConcaveFn(breakpoints={self.breakpoints.shape[0]}, sup={self.sup:.4g})"


def _cross(o: Tuple[float, float], a: Tuple[float, float], b: Tuple[float, float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def concave_majorant(f: EmpiricalModulus) -> ConcaveFn:
    """
    최소 오목 비감소 majorant

    (0,0) 과 샘플들의 상부 볼록 껍질을 첫 최대값 지점까지 구성하고 이후 상수 연장

    Raises:
        NoModulusError: t = 0 에서 v > 0 인 샘플 (K 가 분리하지 못하는 쌍)
    """
    t, v = f.t, f.v
    zero_distance = t <= 0.0
    offending = zero_distance & (v > ZERO_DISTANCE_TOLERANCE)
    if np.any(offending):
        raise NoModulusError(
            f"no modulus exists: {int(np.sum(offending))} samples at distance 0 "
            f"with positive deviation (max {float(np.max(v[offending])):.3e}); K does not separate these pairs"
        )
    t_pos, v_pos = t[~zero_distance], v[~zero_distance]
    if t_pos.size == 0 or float(np.max(v_pos)) <= 0.0:
        return ConcaveFn.zero()

    # 같은 t 는 최대 v 만 유지
    unique_t, inverse = np.unique(t_pos, return_inverse=True)
    best_v = np.full(unique_t.shape, -np.inf)
    np.maximum.at(best_v, inverse, v_pos)

    points = [(0.0, 0.0)] + list(zip(unique_t.tolist(), best_v.tolist()))
    peak = int(np.argmax([p[1] for p in points]))
    hull: List[Tuple[float, float]] = []
    for p in points[:peak + 1]:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) >= 0:
            hull.pop()
        hull.append(p)
    return ConcaveFn(hull)


def compose_modulus(outer: ConcaveFn, inner: ConcaveFn) -> ConcaveFn:
    """
    outer ∘ inner

    격자 = inner 꺾임점 ∪ inner(t) 가 outer 꺾임점을 지나는 t
    (두 함수 모두 구간 선형이므로 격자 사이에서 합성도 선형)
    """
    grid = set(inner.ts.tolist())
    ts, vs = inner.ts, inner.values
    for k in range(len(ts) - 1):
        lo, hi = vs[k], vs[k + 1]
        if hi <= lo:
            continue
        slope = (hi - lo) / (ts[k + 1] - ts[k])
        for tau in outer.ts:
            if lo < tau < hi:
                grid.add(float(ts[k] + (tau - lo) / slope))
    grid_arr = np.array(sorted(grid))
    values = np.asarray(outer(inner(grid_arr)), dtype=float)
    values[0] = 0.0
    return ConcaveFn(np.column_stack([grid_arr, values]))


def sample_set_id(pairs: Sequence[RepPair]) -> str:
    """공유 샘플 집합 식별자 (켤레 유니터리 sha1 앞 12자)"""
    digest = hashlib.sha1()
    for pi, other in pairs:
        digest.update(pi.conjugator.entries.tobytes())
        digest.update(other.conjugator.entries.tobytes())
    return digest.hexdigest()[:12]


def pair_distances(pairs: Sequence[RepPair], K: GeneratingSet) -> np.ndarray:
    if not pairs:
        raise EmptySampleSetError("no representation pairs")
    return np.array([rep_distance(pi, other, K) for pi, other in pairs])


def pair_deviations(pairs: Sequence[RepPair], x: AlgebraElement) -> np.ndarray:
    if not pairs:
        raise EmptySampleSetError("no representation pairs")
    return np.array([deviation(pi, other, x) for pi, other in pairs])


def _stack_samples(t: np.ndarray, deviations: Iterable[np.ndarray]) -> np.ndarray:
    return np.vstack([np.column_stack([t, v]) for v in deviations])


def empirical_modulus(pairs: Sequence[RepPair], K: GeneratingSet, L: Sequence[AlgebraElement]) -> EmpiricalModulus:
    """
    f^K_L 의 유한 샘플 근사 (참 sup 의 하한)

    (쌍, a∈L) 마다 샘플 하나: t = d_K(π,π'), v = ‖π(a) − π'(a)‖
    """
    if not L:
        raise EmptySampleSetError("element list L is empty")
    t = pair_distances(pairs, K)
    return EmpiricalModulus(_stack_samples(t, [pair_deviations(pairs, a) for a in L]), sample_set_id(pairs))


def comparison_grid(curves: Iterable[ConcaveFn], t_max: float, uniform_points: int = UNIFORM_GRID_POINTS) -> np.ndarray:
    """모든 꺾임점 ∪ [0, t_max] 균등 64점"""
    parts = [np.linspace(0.0, max(t_max, 0.0), uniform_points)]
    for curve in curves:
        parts.append(curve.ts)
    return np.unique(np.concatenate(parts))


def modulus_table(f: EmpiricalModulus, hull: ConcaveFn, grid: Optional[np.ndarray] = None) -> List[Tuple[float, float, float]]:
    """CSV 용 (t, step_value, hull_value) 행"""
    if grid is None:
        grid = np.unique(np.concatenate([[0.0], f.t, hull.ts]))
    steps = np.atleast_1d(f.step_eval(grid))
    hulls = np.atleast_1d(hull(grid))
    return [(float(t), float(s), float(h)) for t, s, h in zip(grid, steps, hulls)]


def modulus_calculus_report(
    pairs: Sequence[RepPair],
    K: GeneratingSet,
    a: AlgebraElement,
    b: AlgebraElement,
    lam: complex = 2.0,
) -> Dict:
    """
    공유 샘플에서 연속률 계산 규칙 잔차 보고

    등식: ω_{a*} = ω_a = ω_{a+λ1}, ω_{λa} = |λ|ω_a, ω_1 = 0
    부등식: ω_{a+b} ≤ ω_a + ω_b, ω_{ab} ≤ ‖a‖ω_b + ‖b‖ω_a
    """
    provenance = sample_set_id(pairs)
    t = pair_distances(pairs, K)
    algebra = a.algebra
    elements = {
        "a": a,
        "b": b,
        "a_star": a.adjoint(),
        "lambda_a": a.scale(lam),
        "a_plus_b": a + b,
        "ab": a * b,
        "a_plus_lambda_unit": a + algebra.scalar(lam),
        "unit": algebra.unit(),
    }
    dev = {name: pair_deviations(pairs, x) for name, x in elements.items()}
    curves = {name: concave_majorant(EmpiricalModulus(np.column_stack([t, v]), provenance)) for name, v in dev.items()}
    grid = comparison_grid(curves.values(), float(np.max(t)))
    w = {name: np.asarray(curve(grid)) for name, curve in curves.items()}
    norm_a, norm_b = element_norm(a), element_norm(b)

    residuals = {
        "adjoint": float(np.max(np.abs(w["a_star"] - w["a"]))),
        "shift": float(np.max(np.abs(w["a_plus_lambda_unit"] - w["a"]))),
        "unit": float(np.max(w["unit"])),
        "scale": float(np.max(np.abs(w["lambda_a"] - abs(lam) * w["a"]))),
        "subadditive": float(np.max(np.maximum(0.0, w["a_plus_b"] - w["a"] - w["b"]))),
        "leibniz": float(np.max(np.maximum(0.0, w["ab"] - norm_a * w["b"] - norm_b * w["a"]))),
    }
    per_sample = {
        "adjoint": float(np.max(np.abs(dev["a_star"] - dev["a"]))),
        "scale": float(np.max(np.abs(dev["lambda_a"] - abs(lam) * dev["a"]))),
        "subadditive": float(np.max(np.maximum(0.0, dev["a_plus_b"] - dev["a"] - dev["b"]))),
        "leibniz": float(np.max(np.maximum(0.0, dev["ab"] - norm_a * dev["b"] - norm_b * dev["a"]))),
    }
    equality_keys = ("adjoint", "shift", "unit", "scale")
    passed = all(residuals[k] <= EQUALITY_TOLERANCE for k in equality_keys) and all(
        residuals[k] <= INEQUALITY_TOLERANCE for k in ("subadditive", "leibniz")
    )
    report = {
        "provenance": provenance,
        "sample_count": len(pairs),
        "lambda": [float(np.real(lam)), float(np.imag(lam))],
        "norms": {"a": norm_a, "b": norm_b},
        "residuals": residuals,
        "per_sample_residuals": per_sample,
        "max_residual": max(residuals.values()),
        "passed": passed,
        "curves": curves,
        "grid": grid,
    }
    status = "✅" if passed else "❌"
    logger.info(f"{status} modulus calculus on {len(pairs)} pairs [{provenance}]: max residual {report['max_residual']:.3e}")
    return report


def chain_inequality_check(
    pairs: Sequence[RepPair],
    K: GeneratingSet,
    K_prime: GeneratingSet,
    a: AlgebraElement,
) -> Dict:
    """
    ω^{K'}_a ≤ ω^K_a ∘ ω^{K'}_K 를 공유 샘플에서 검사

    Returns:
        {"residual", "per_sample_residual", "passed", ...}
    """
    provenance = sample_set_id(pairs)
    t_k = pair_distances(pairs, K)
    t_kp = pair_distances(pairs, K_prime)
    v_a = pair_deviations(pairs, a)

    omega_kp_a = concave_majorant(EmpiricalModulus(np.column_stack([t_kp, v_a]), provenance))
    omega_k_a = concave_majorant(EmpiricalModulus(np.column_stack([t_k, v_a]), provenance))
    omega_kp_k = concave_majorant(
        EmpiricalModulus(_stack_samples(t_kp, [pair_deviations(pairs, b) for b in K.elements]), provenance)
    )
    composed = compose_modulus(omega_k_a, omega_kp_k)

    grid = comparison_grid([omega_kp_a, composed], float(np.max(t_kp)))
    residual = float(np.max(np.maximum(0.0, np.asarray(omega_kp_a(grid)) - np.asarray(composed(grid)))))
    per_sample = float(np.max(np.maximum(0.0, v_a - np.asarray(omega_k_a(omega_kp_k(t_kp))))))
    passed = residual <= INEQUALITY_TOLERANCE and per_sample <= INEQUALITY_TOLERANCE
    logger.info(f"{'✅' if passed else '❌'} chain inequality [{provenance}]: residual {residual:.3e}")
    return {
        "provenance": provenance,
        "residual": residual,
        "per_sample_residual": per_sample,
        "passed": passed,
        "curves": {"outer": omega_k_a, "inner": omega_kp_k, "lhs": omega_kp_a, "composed": composed},
    }


def uniform_equivalence_check(pairs: Sequence[RepPair], K: GeneratingSet, K_prime: GeneratingSet) -> Dict:
    """쌍마다 d_{K'} ≤ ω^K_{K'}(d_K)"""
    provenance = sample_set_id(pairs)
    t_k = pair_distances(pairs, K)
    t_kp = pair_distances(pairs, K_prime)
    witness = concave_majorant(
        EmpiricalModulus(_stack_samples(t_k, [pair_deviations(pairs, b) for b in K_prime.elements]), provenance)
    )
    residual = float(np.max(np.maximum(0.0, t_kp - np.asarray(witness(t_k)))))
    return {
        "provenance": provenance,
        "residual": residual,
        "passed": residual <= INEQUALITY_TOLERANCE,
        "witness": witness,
    }


def morphism_modulus_check(
    pairs: Sequence[RepPair],
    alpha: Homomorphism,
    K: GeneratingSet,
    L: GeneratingSet,
    elements: Optional[Sequence[AlgebraElement]] = None,
) -> Dict:
    """
    pullback 연속률 검사 (pairs 는 α.target 의 표현 쌍)

    - 등거리: d_K(α*ρ, α*ρ') = d_{α(K)}(ρ, ρ')
    - 지배: ω_α^{K,L} ≤ ω^L_{α(K)}
    - 원소별: ω^L_{α(a)} ≤ ω^K_a ∘ ω_α^{K,L} (elements 생략 시 a ∈ K)
    - α(K) ⊆ L 이면 d_K(α*ρ, α*ρ') ≤ d_L(ρ, ρ')
    """
    provenance = sample_set_id(pairs)
    image = [hom_apply(alpha, x) for x in K.elements]
    t_l = pair_distances(pairs, L)
    pulled = np.array([rep_distance(pullback(alpha, rho), pullback(alpha, rho2), K) for rho, rho2 in pairs])
    image_dist = np.array([max(deviation(rho, rho2, y) for y in image) for rho, rho2 in pairs])

    omega_alpha = concave_majorant(EmpiricalModulus(np.column_stack([t_l, pulled]), provenance))
    omega_image = concave_majorant(
        EmpiricalModulus(_stack_samples(t_l, [pair_deviations(pairs, y) for y in image]), provenance)
    )
    grid = comparison_grid([omega_alpha, omega_image], float(np.max(t_l)))
    domination = float(np.max(np.maximum(0.0, np.asarray(omega_alpha(grid)) - np.asarray(omega_image(grid)))))
    isometry = float(np.max(np.abs(pulled - image_dist)))

    # α*ρ(a) = ρ(α(a)) 이므로 두 연속률이 같은 편차 샘플을 공유
    element_residuals = []
    element_sample_residuals = []
    for a in (K.elements if elements is None else elements):
        v_a = pair_deviations(pairs, hom_apply(alpha, a))
        omega_image_a = concave_majorant(EmpiricalModulus(np.column_stack([t_l, v_a]), provenance))
        omega_a = concave_majorant(EmpiricalModulus(np.column_stack([pulled, v_a]), provenance))
        composed = compose_modulus(omega_a, omega_alpha)
        element_grid = comparison_grid([omega_image_a, composed], float(np.max(t_l)))
        element_residuals.append(
            float(np.max(np.maximum(0.0, np.asarray(omega_image_a(element_grid)) - np.asarray(composed(element_grid)))))
        )
        element_sample_residuals.append(float(np.max(np.maximum(0.0, v_a - np.asarray(composed(t_l))))))
    element_bound = max(element_residuals + element_sample_residuals)

    contained = all(any(y.is_close(z, EQUALITY_TOLERANCE) for z in L.elements) for y in image)
    nonexpansive = float(np.max(np.maximum(0.0, pulled - t_l))) if contained else None
    passed = isometry <= EQUALITY_TOLERANCE and domination <= INEQUALITY_TOLERANCE and element_bound <= INEQUALITY_TOLERANCE
    if nonexpansive is not None:
        passed = passed and nonexpansive <= EQUALITY_TOLERANCE
    return {
        "provenance": provenance,
        "isometry_residual": isometry,
        "domination_residual": domination,
        "element_bound_residuals": element_residuals,
        "element_bound_sample_residuals": element_sample_residuals,
        "element_bound_residual": element_bound,
        "image_contained": contained,
        "nonexpansive_residual": nonexpansive,
        "passed": passed,
    }


def cauchy_consistency_check(sequence: Sequence[Representation], K: GeneratingSet) -> Dict:
    """
    표현 수열의 꼬리 지름 D_n = max_{n≤p<q} d_K(ρ_p, ρ_q) 검사

    D_n 비증가, D_n ≤ Σ_{k≥n} d_K(ρ_k, ρ_{k+1})
    """
    n = len(sequence)
    if n < 2:
        raise EmptySampleSetError("Cauchy check needs at least two representations")
    dist = np.zeros((n, n))
    for p in range(n):
        for q in range(p + 1, n):
            dist[p, q] = dist[q, p] = rep_distance(sequence[p], sequence[q], K)
    steps = np.array([dist[k, k + 1] for k in range(n - 1)])
    tails = np.array([float(np.max(dist[k:, k:])) for k in range(n - 1)])
    tail_bounds = np.array([float(np.sum(steps[k:])) for k in range(n - 1)])
    residual = float(np.max(np.maximum(0.0, tails - tail_bounds)))
    monotone = bool(np.all(np.diff(tails) <= EQUALITY_TOLERANCE))
    return {
        "tail_diameters": tails.tolist(),
        "tail_bounds": tail_bounds.tolist(),
        "residual": residual,
        "monotone": monotone,
        "passed": monotone and residual <= EQUALITY_TOLERANCE,
    }
