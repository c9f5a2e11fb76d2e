"""
Legendre–Fenchel 쌍대성 모듈
1차원 격자 위 켤레 함수, δ(s), 연속률 복원, Lipschitz 정칙화, Rep 연속률 샌드위치

핵심 기능:
- GridFn / RealFunctionOnSpace
- fenchel_conjugate, biconjugate (하부 볼록 포락선)
- delta_from_modulus: δ(s) = ½ max_t (ω(t) − st)
- reconstruct_modulus: ω(t) = min_s (2δ(s) + st)
- lip_regularize: f_s = δ(s) + min_y (f(y) + s·d(·,y))
- lipschitz_distance: Lip-s 함수까지의 거리 (LP)
- sandwich_check: ω_f ≤ ω_f^Rep ≤ 2ω_f 의 표본 검사
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from algebra import AlgebraMismatchError, GeneratingSet
from modulus import (
    INEQUALITY_TOLERANCE,
    ConcaveFn,
    EmpiricalModulus,
    EmptySampleSetError,
    comparison_grid,
    concave_majorant,
    pair_deviations,
    sample_set_id,
)
from reps import RepPair, rep_distance
from transport import (
    HIGHS_OPTIONS,
    FiniteMetricSpace,
    SolverFailureError,
    TransportError,
    commutative_algebra,
    function_element,
)

logger = logging.getLogger(__name__)

LIPSCHITZ_CERT_TOLERANCE = 1e-10
DEVIATION_CERT_TOLERANCE = 1e-9


class DualityError(ValueError):
    """쌍대성 계산 오류 기본 클래스"""


class EmptyGridError(DualityError):
    """빈 격자"""


class GridFn:
    """격자 위 실함수 (grid 강증가, values 유한)"""

    def __init__(self, grid, values):
        g = np.array(grid, dtype=float).reshape(-1)
        v = np.array(values, dtype=float).reshape(-1)
        if g.size == 0:
            raise EmptyGridError("grid is empty")
        if g.shape != v.shape:
            raise DualityError(f"grid has {g.size} points but {v.size} values")
        if not np.all(np.isfinite(g)) or not np.all(np.isfinite(v)):
            raise DualityError("grid and values must be finite")
        if np.any(np.diff(g) <= 0):
            raise DualityError("grid must be strictly increasing")
        g.setflags(write=False)
        v.setflags(write=False)
        self.grid = g
        self.values = v

    def __len__(self) -> int:
        return int(self.grid.size)

    @classmethod
    def from_concave(cls, omega: ConcaveFn) -> "GridFn":
        return cls(omega.ts, omega.values)

    def to_rows(self) -> List[Tuple[float, float]]:
        return [(float(x), float(y)) for x, y in zip(self.grid, self.values)]

    def __repr__(self) -> str:
        return f"GridFn(n={len(self)}, range=[{self.grid[0]:.4g}, {self.grid[-1]:.4g}])"


class RealFunctionOnSpace:
    """X 위의 실함수"""

    def __init__(self, space: FiniteMetricSpace, values):
        vals = np.array(values, dtype=float).reshape(-1)
        if vals.shape[0] != space.size:
            raise TransportError(f"{vals.shape[0]} values for {space.size} points")
        if not np.all(np.isfinite(vals)):
            raise DualityError("function values must be finite")
        vals.setflags(write=False)
        self.space = space
        self.values = vals

    def as_element(self):
        return function_element(self.space, self.values)

    def sup_distance(self, other: "RealFunctionOnSpace") -> float:
        return float(np.max(np.abs(self.values - other.values)))

    def __repr__(self) -> str:
        return f"RealFunctionOnSpace(n={self.space.size})"


def _grid(values) -> np.ndarray:
    arr = np.unique(np.asarray(values, dtype=float).reshape(-1))
    if arr.size == 0:
        raise EmptyGridError("grid is empty")
    return arr


def fenchel_conjugate(h: GridFn, s_grid) -> GridFn:
    """h*(s) = max_t (s·t − h(t))"""
    s = _grid(s_grid)
    values = np.max(s[:, None] * h.grid[None, :] - h.values[None, :], axis=1)
    return GridFn(s, values)


def lower_hull_slopes(h: GridFn) -> np.ndarray:
    """하부 볼록 껍질 변의 기울기"""
    hull: List[Tuple[float, float]] = []
    for p in zip(h.grid.tolist(), h.values.tolist()):
        while len(hull) >= 2 and (
            (hull[-1][0] - hull[-2][0]) * (p[1] - hull[-2][1]) - (hull[-1][1] - hull[-2][1]) * (p[0] - hull[-2][0])
        ) <= 0:
            hull.pop()
        hull.append(p)
    if len(hull) < 2:
        return np.zeros(1)
    pts = np.array(hull)
    return np.diff(pts[:, 1]) / np.diff(pts[:, 0])


def biconjugate(h: GridFn, s_grid=None) -> GridFn:
    """
    h** (h 의 격자 위 하부 볼록 포락선)

    s_grid 기본값: 하부 껍질 기울기 (양 끝 기울기 포함)
    """
    if s_grid is None:
        s_grid = lower_hull_slopes(h)
    conj = fenchel_conjugate(h, s_grid)
    values = np.max(conj.grid[None, :] * h.grid[:, None] - conj.values[None, :], axis=1)
    return GridFn(h.grid, values)


def hull_slope_grid(omega: ConcaveFn) -> np.ndarray:
    """ω 의 변 기울기 ∪ {0} (상수 꼬리)"""
    return np.unique(np.concatenate([[0.0], np.maximum(omega.slopes, 0.0)]))


def delta_from_modulus(omega: ConcaveFn, s: float) -> float:
    """δ(s) = ½ max_t (ω(t) − s·t), 꺾임점 위 최대 (꼬리는 s ≥ 0 에서 감소)"""
    if s < 0:
        raise DualityError(f"s must be nonnegative, got {s}")
    return max(0.0, 0.5 * float(np.max(omega.values - s * omega.ts)))


def delta_curve(omega: ConcaveFn, s_grid=None) -> GridFn:
    s = hull_slope_grid(omega) if s_grid is None else _grid(s_grid)
    return GridFn(s, [delta_from_modulus(omega, float(x)) for x in s])


def reconstruct_modulus(delta_samples: GridFn, t_grid) -> GridFn:
    """ω̂(t) = min_s (2δ(s) + s·t)"""
    t = _grid(t_grid)
    values = np.min(2.0 * delta_samples.values[None, :] + delta_samples.grid[None, :] * t[:, None], axis=1)
    return GridFn(t, values)


def random_concave_modulus(rng: np.random.Generator, max_breakpoints: int = 10) -> ConcaveFn:
    """(0,0) 에서 시작하는 무작위 구간 선형 오목 비감소 함수 (꺾임점 ≤ max_breakpoints)"""
    if max_breakpoints < 2:
        raise DualityError(f"need at least 2 breakpoints, got {max_breakpoints}")
    pieces = int(rng.integers(1, max_breakpoints))
    steps = rng.uniform(0.1, 1.0, size=pieces)
    slopes = np.sort(rng.uniform(0.0, 3.0, size=pieces))[::-1]
    ts = np.concatenate([[0.0], np.cumsum(steps)])
    values = np.concatenate([[0.0], np.cumsum(slopes * steps)])
    return ConcaveFn(np.column_stack([ts, values]))


def function_modulus(f: RealFunctionOnSpace) -> EmpiricalModulus:
    """(d(x,y), |f(x) − f(y)|) 샘플 (x < y)"""
    space = f.space
    if space.size < 2:
        raise EmptySampleSetError("function modulus needs at least two points")
    i, j = np.triu_indices(space.size, k=1)
    return EmpiricalModulus(np.column_stack([space.dist[i, j], np.abs(f.values[i] - f.values[j])]))


def _complex_modulus(space: FiniteMetricSpace, values: np.ndarray) -> ConcaveFn:
    i, j = np.triu_indices(space.size, k=1)
    return concave_majorant(EmpiricalModulus(np.column_stack([space.dist[i, j], np.abs(values[i] - values[j])])))


def exact_modulus(f: RealFunctionOnSpace) -> ConcaveFn:
    """f 의 정확한 오목 연속률 ω_f"""
    return concave_majorant(function_modulus(f))


def lipschitz_constant(f: RealFunctionOnSpace) -> float:
    space = f.space
    if space.size < 2:
        return 0.0
    i, j = np.triu_indices(space.size, k=1)
    return float(np.max(np.abs(f.values[i] - f.values[j]) / space.dist[i, j]))


def lip_regularize(f: RealFunctionOnSpace, s: float, omega_f: ConcaveFn) -> Tuple[RealFunctionOnSpace, Dict]:
    """
    f_s = δ(s) + min_y (f(y) + s·d(·,y))

    Returns:
        (f_s, 보고서): Lip(f_s) ≤ s, ‖f − f_s‖ ≤ δ(s) 인증 결과 포함
    """
    delta = delta_from_modulus(omega_f, s)
    values = delta + np.min(f.values[None, :] + s * f.space.dist, axis=1)
    fs = RealFunctionOnSpace(f.space, values)
    lip = lipschitz_constant(fs)
    deviation = f.sup_distance(fs)
    report = {
        "s": float(s),
        "delta": delta,
        "lipschitz": lip,
        "sup_deviation": deviation,
        "lipschitz_ok": lip <= s + LIPSCHITZ_CERT_TOLERANCE,
        "deviation_ok": deviation <= delta + DEVIATION_CERT_TOLERANCE,
    }
    if not (report["lipschitz_ok"] and report["deviation_ok"]):
        logger.error(f"❌ regularization certificate failed at s={s}: lip={lip:.3e}, dev={deviation:.3e}, delta={delta:.3e}")
    return fs, report


def lipschitz_distance(f: RealFunctionOnSpace, s: float) -> float:
    """
    inf { ‖f − u‖_∞ : Lip(u) ≤ s } (LP)

    변수 (u_1..u_n, r): min r s.t. |f − u| ≤ r, u_x − u_y ≤ s·d(x,y)
    """
    space = f.space
    n = space.size
    rows = []
    rhs = []
    for x in range(n):
        row = np.zeros(n + 1)
        row[x], row[n] = -1.0, -1.0
        rows.append(row)
        rhs.append(-f.values[x])
        row = np.zeros(n + 1)
        row[x], row[n] = 1.0, -1.0
        rows.append(row)
        rhs.append(f.values[x])
    for x in range(n):
        for y in range(n):
            if x != y:
                row = np.zeros(n + 1)
                row[x], row[y] = 1.0, -1.0
                rows.append(row)
                rhs.append(s * space.dist[x, y])
    cost = np.zeros(n + 1)
    cost[n] = 1.0
    result = linprog(
        cost,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(None, None)] * n + [(0.0, None)],
        method="highs",
        options=HIGHS_OPTIONS,
    )
    if result.status != 0:
        raise SolverFailureError(f"Lipschitz distance LP failed: {result.message}")
    return float(result.fun)


def _regularizer_elements(f: RealFunctionOnSpace, omega: ConcaveFn) -> list:
    """양의 껍질 기울기 s 마다 (f_s − min f_s)/s (Lip ≤ 1)"""
    elements = []
    for s in hull_slope_grid(omega):
        if s <= 0.0:
            continue
        fs, _ = lip_regularize(f, float(s), omega)
        scaled = fs.values / s
        elements.append(function_element(f.space, scaled - np.min(scaled)))
    return elements


def sandwich_check(
    u: RealFunctionOnSpace,
    v: Optional[RealFunctionOnSpace],
    pairs: Sequence[RepPair],
    K: GeneratingSet,
) -> Dict:
    """
    f = u + i·v 에 대해 Rep 연속률 검사

    K 에 u, v 의 정규화 Lipschitz 정칙화 (f_s − min f_s)/s 를 추가한 집합에서
    샘플마다 ‖Δu‖ ≤ ω_u(d_K), ‖Δf‖ ≤ 2ω_f(d_K) 를 확인
    """
    space = u.space
    if v is None:
        v = RealFunctionOnSpace(space, np.zeros(space.size))
    if v.space != space:
        raise TransportError("real and imaginary parts live on different spaces")
    algebra = commutative_algebra(space)
    if K.algebra != algebra:
        raise AlgebraMismatchError(f"generating set over {K.algebra}, expected {algebra}")
    if not pairs:
        raise EmptySampleSetError("no representation pairs")

    omega_u = exact_modulus(u)
    omega_v = exact_modulus(v)
    omega_f = _complex_modulus(space, u.values + 1j * v.values)

    extra = _regularizer_elements(u, omega_u) + _regularizer_elements(v, omega_v)
    K_ext = GeneratingSet(algebra, list(K.elements) + extra, K.verified)
    t = np.array([rep_distance(pi, other, K_ext) for pi, other in pairs])

    dev_u = pair_deviations(pairs, u.as_element())
    dev_v = pair_deviations(pairs, v.as_element())
    dev_f = pair_deviations(pairs, function_element(space, u.values + 1j * v.values))

    real_residual = float(
        max(
            np.max(np.maximum(0.0, dev_u - np.asarray(omega_u(t)))),
            np.max(np.maximum(0.0, dev_v - np.asarray(omega_v(t)))),
        )
    )
    complex_residual = float(np.max(np.maximum(0.0, dev_f - 2.0 * np.asarray(omega_f(t)))))

    provenance = sample_set_id(pairs)
    step_u = EmpiricalModulus(np.column_stack([t, dev_u]), provenance)
    grid = comparison_grid([omega_u], float(np.max(t)))
    grid_residual = float(np.max(np.maximum(0.0, np.asarray(step_u.step_eval(grid)) - np.asarray(omega_u(grid)))))

    passed = max(real_residual, complex_residual, grid_residual) <= INEQUALITY_TOLERANCE
    logger.info(
        f"{'✅' if passed else '❌'} sandwich on {len(pairs)} pairs: "
        f"real {real_residual:.3e}, complex {complex_residual:.3e}, |K|={len(K_ext)}"
    )
    return {
        "provenance": provenance,
        "generating_set_size": len(K_ext),
        "regularizers_added": len(extra),
        "real_residual": real_residual,
        "complex_residual": complex_residual,
        "grid_residual": grid_residual,
        "passed": passed,
    }
