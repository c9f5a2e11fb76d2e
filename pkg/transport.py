"""
유한 거리 공간 / Kantorovich 모듈
가환 대수 ℂ^{|X|} 와 점 표현의 등거리성, Wasserstein-1 거리

핵심 기능:
- FiniteMetricSpace / Measure
- lipschitz_generators: d(x,·) 함수들 (생성 집합)
- point_rep: π_x(f) = f(x)·I
- kantorovich: 쌍대 LP (scipy HiGHS) + 최적 포텐셜
- kantorovich_primal_oracle: 수송 문제 primal (POT network simplex)
- pushforward, weak-* 수렴 검사
"""
import logging
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import ot
from scipy.optimize import linprog

from algebra import AlgebraElement, FdAlgebra, GeneratingSet, verify_generates
from linalg import ComplexMatrix
from reps import Representation

logger = logging.getLogger(__name__)

METRIC_TOLERANCE = 1e-12
WEIGHT_TOLERANCE = 1e-12
LIPSCHITZ_TOLERANCE = 1e-9
HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


class TransportError(ValueError):
    """거리 공간/측도 오류 기본 클래스"""


class TooFewPointsError(TransportError):
    """점 개수 부족"""


class UnknownPointError(TransportError):
    """존재하지 않는 점 라벨"""


class SpaceMismatchError(TransportError):
    """서로 다른 공간 위의 측도"""


class SolverFailureError(RuntimeError):
    """LP/수송 솔버 실패"""


class FiniteMetricSpace:
    """
    유한 거리 공간 (X, d)

    Args:
        points: 점 라벨 목록 (중복 불가)
        dist: 대칭, 대각 0, 삼각부등식을 만족하는 거리 행렬
    """

    def __init__(self, points: Sequence, dist):
        labels = [str(p) for p in points]
        if len(set(labels)) != len(labels):
            raise TransportError(f"duplicate point labels: {labels}")
        arr = np.array(dist, dtype=float)
        n = len(labels)
        if arr.shape != (n, n):
            raise TransportError(f"distance matrix shape {arr.shape} does not match {n} points")
        if not np.all(np.isfinite(arr)):
            raise TransportError("distances must be finite")
        scale = max(1.0, float(np.max(np.abs(arr)))) if n else 1.0
        if np.any(np.abs(np.diag(arr)) > 0):
            raise TransportError("dist(x, x) must be 0")
        if np.any(np.abs(arr - arr.T) > METRIC_TOLERANCE * scale):
            raise TransportError("distance matrix must be symmetric")
        arr = (arr + arr.T) / 2.0
        off_diagonal = ~np.eye(n, dtype=bool)
        if np.any(arr[off_diagonal] <= 0):
            raise TransportError("dist(x, y) must be positive for x != y")
        if n:
            # d(i,j) ≤ min_k d(i,k) + d(k,j)
            through = np.min(arr[:, :, None] + arr[None, :, :], axis=1)
            violation = float(np.max(arr - through))
            if violation > METRIC_TOLERANCE * scale:
                raise TransportError(f"triangle inequality violated by {violation:.3e}")
        arr.setflags(write=False)
        self.points = tuple(labels)
        self.dist = arr
        self._index = {label: i for i, label in enumerate(labels)}

    @property
    def size(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return self.size

    def index(self, label) -> int:
        key = str(label)
        if key not in self._index:
            raise UnknownPointError(f"unknown point '{label}'")
        return self._index[key]

    def diameter(self) -> float:
        return float(np.max(self.dist)) if self.size else 0.0

    def min_separation(self) -> float:
        if self.size < 2:
            return 0.0
        return float(np.min(self.dist[~np.eye(self.size, dtype=bool)]))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteMetricSpace)
            and self.points == other.points
            and bool(np.array_equal(self.dist, other.dist))
        )

    def __hash__(self) -> int:
        return hash((self.points, self.dist.tobytes()))

    @classmethod
    def from_coordinates(cls, coordinates, labels: Optional[Sequence] = None) -> "FiniteMetricSpace":
        """유클리드 좌표에서 거리 행렬 생성"""
        coords = np.asarray(coordinates, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        if labels is None:
            labels = [f"x{i}" for i in range(coords.shape[0])]
        return cls(labels, dist)

    def __repr__(self) -> str:
        return f"FiniteMetricSpace(n={self.size}, diameter={self.diameter():.4g})"


class Measure:
    """X 위의 확률 측도 (가중치 합 1, 허용오차 1e-12)"""

    def __init__(self, space: FiniteMetricSpace, weights):
        arr = np.array(weights, dtype=float).reshape(-1)
        if arr.shape[0] != space.size:
            raise TransportError(f"{arr.shape[0]} weights for {space.size} points")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise TransportError("weights must be finite and nonnegative")
        if abs(float(np.sum(arr)) - 1.0) > WEIGHT_TOLERANCE:
            raise TransportError(f"weights sum to {float(np.sum(arr))!r}, expected 1")
        arr.setflags(write=False)
        self.space = space
        self.weights = arr

    @classmethod
    def dirac(cls, space: FiniteMetricSpace, label) -> "Measure":
        weights = np.zeros(space.size)
        weights[space.index(label)] = 1.0
        return cls(space, weights)

    @classmethod
    def uniform(cls, space: FiniteMetricSpace) -> "Measure":
        return cls(space, np.full(space.size, 1.0 / space.size))

    def __repr__(self) -> str:
        return f"Measure(n={self.space.size}, support={int(np.sum(self.weights > 0))})"


def random_space(size: int, seed: int, dim: int = 2) -> FiniteMetricSpace:
    """단위 정육면체의 무작위 점들 (유클리드 거리)"""
    rng = np.random.default_rng(seed)
    return FiniteMetricSpace.from_coordinates(rng.uniform(size=(size, dim)))


def random_measure(space: FiniteMetricSpace, rng: np.random.Generator, support: Optional[int] = None) -> Measure:
    weights = rng.exponential(size=space.size)
    if support is not None and support < space.size:
        weights[rng.permutation(space.size)[support:]] = 0.0
    weights = weights / np.sum(weights)
    # 반올림 잔차를 최대 가중치에 흡수
    weights[int(np.argmax(weights))] += 1.0 - float(np.sum(weights))
    return Measure(space, weights)


def commutative_algebra(space: FiniteMetricSpace) -> FdAlgebra:
    """C(X) ≅ ℂ^{|X|} (1×1 블록 |X| 개)"""
    return FdAlgebra([1] * space.size)


def function_element(space: FiniteMetricSpace, values) -> AlgebraElement:
    vals = np.asarray(values, dtype=np.complex128).reshape(-1)
    if vals.shape[0] != space.size:
        raise TransportError(f"{vals.shape[0]} values for {space.size} points")
    return AlgebraElement(commutative_algebra(space), [ComplexMatrix([[z]]) for z in vals])


def lipschitz_generators(space: FiniteMetricSpace) -> GeneratingSet:
    """
    {d(x,·)}_{x∈X} 생성 집합

    Raises:
        TooFewPointsError: |X| < 2
    """
    if space.size < 2:
        raise TooFewPointsError(f"need at least 2 points, got {space.size}")
    algebra = commutative_algebra(space)
    elements = [function_element(space, space.dist[i]) for i in range(space.size)]
    candidate = GeneratingSet(algebra, elements)
    ok, span_dim = verify_generates(candidate, max_word_len=space.size)
    if not ok:
        logger.warning(f"⚠️ distance functions span {span_dim}/{space.size}")
    return GeneratingSet(algebra, elements, ok)


def point_rep(space: FiniteMetricSpace, label, ambient_mult: int = 1) -> Representation:
    """π_x(f) = f(x)·I_{ambient_mult}"""
    if ambient_mult < 1:
        raise TransportError(f"ambient multiplicity must be >= 1, got {ambient_mult}")
    multiplicities = [0] * space.size
    multiplicities[space.index(label)] = ambient_mult
    return Representation.canonical(commutative_algebra(space), multiplicities)


def motivation_distance(space: FiniteMetricSpace, x, y) -> float:
    """max_{f∈{d(z,·)}} |f(x) − f(y)|"""
    i, j = space.index(x), space.index(y)
    return float(np.max(np.abs(space.dist[:, i] - space.dist[:, j])))


def _check_same_space(mu: Measure, nu: Measure) -> FiniteMetricSpace:
    if mu.space != nu.space:
        raise SpaceMismatchError("measures live on different spaces")
    return mu.space


def kantorovich(mu: Measure, nu: Measure) -> Dict:
    """
    max Σ f(x)(μ(x) − ν(x)) s.t. |f(x) − f(y)| ≤ d(x,y)

    Returns:
        {"value": 최적값, "potential": 최적 f 목록, "lipschitz_residual": 제약 위반량}

    Raises:
        SpaceMismatchError, SolverFailureError
    """
    space = _check_same_space(mu, nu)
    n = space.size
    diff = mu.weights - nu.weights
    if n == 1 or not np.any(diff):
        return {"value": 0.0, "potential": [0.0] * n, "lipschitz_residual": 0.0}

    rows = []
    bounds_rhs = []
    for x in range(n):
        for y in range(n):
            if x != y:
                row = np.zeros(n)
                row[x], row[y] = 1.0, -1.0
                rows.append(row)
                bounds_rhs.append(space.dist[x, y])
    bounds = [(0.0, 0.0)] + [(None, None)] * (n - 1)
    result = linprog(
        -diff,
        A_ub=np.array(rows),
        b_ub=np.array(bounds_rhs),
        bounds=bounds,
        method="highs",
        options=HIGHS_OPTIONS,
    )
    if result.status != 0 or result.x is None:
        raise SolverFailureError(f"Kantorovich LP failed: {result.message}")
    potential = np.asarray(result.x, dtype=float)
    value = max(0.0, float(potential @ diff))
    slack = potential[:, None] - potential[None, :] - space.dist
    lipschitz_residual = float(np.max(slack))
    if lipschitz_residual > LIPSCHITZ_TOLERANCE:
        raise SolverFailureError(f"potential violates Lipschitz constraint by {lipschitz_residual:.3e}")
    return {"value": value, "potential": potential.tolist(), "lipschitz_residual": max(0.0, lipschitz_residual)}


def kantorovich_primal_oracle(mu: Measure, nu: Measure) -> float:
    """min Σ plan(x,y) d(x,y) (POT network simplex, 쌍대 LP 와 독립)"""
    space = _check_same_space(mu, nu)
    a = np.ascontiguousarray(mu.weights, dtype=np.float64)
    b = np.ascontiguousarray(nu.weights, dtype=np.float64)
    cost = np.ascontiguousarray(space.dist, dtype=np.float64)
    try:
        value = ot.emd2(a, b, cost)
    except Exception as e:
        raise SolverFailureError(f"transport solver failed: {e}") from e
    return max(0.0, float(value))


def pushforward(mu: Measure, mapping: Mapping, target: FiniteMetricSpace) -> Measure:
    """f_*μ (mapping: 원본 라벨 → 대상 라벨)"""
    weights = np.zeros(target.size)
    for label, w in zip(mu.space.points, mu.weights):
        if label not in mapping:
            raise UnknownPointError(f"map undefined at '{label}'")
        weights[target.index(mapping[label])] += w
    return Measure(target, weights)


def compose_maps(outer: Mapping, inner: Mapping) -> Dict:
    """(outer ∘ inner)"""
    return {x: outer[y] for x, y in inner.items()}


def weak_star_check(sequence: Sequence[Measure], limit: Measure) -> Dict:
    """
    수렴 측도열의 Kantorovich 거리 vs 가중치 차이

    유한 공간에서 min_sep·TV ≤ W1 ≤ diam·TV (TV = ½Σ|μ−ν|)
    """
    space = limit.space
    distances: List[float] = []
    gaps: List[float] = []
    residual = 0.0
    for mu in sequence:
        _check_same_space(mu, limit)
        value = kantorovich(mu, limit)["value"]
        tv = 0.5 * float(np.sum(np.abs(mu.weights - limit.weights)))
        residual = max(residual, value - space.diameter() * tv, space.min_separation() * tv - value)
        distances.append(value)
        gaps.append(float(np.max(np.abs(mu.weights - limit.weights))))
    return {
        "distances": distances,
        "weight_gaps": gaps,
        "residual": max(0.0, residual),
        "passed": residual <= LIPSCHITZ_TOLERANCE,
    }
