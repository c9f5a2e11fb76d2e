"""
복소 행렬 연산 모듈
표현 거리 계산의 수치 기반 (연산자 노름, 유니터리, 직합)

핵심 기능:
- ComplexMatrix / Unitary 불변 래퍼
- 연산자 노름 (최대 특이값) 및 스펙트럼 반경
- 직합, 중복도 합 (m ⊙ A)
- 시드 고정 Haar 유니터리 샘플링, 교환(swap) 유니터리
"""
import logging
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy import linalg as sla

logger = logging.getLogger(__name__)

UNITARY_TOLERANCE = 1e-10
MAX_SEED = 2 ** 64 - 1


class LinalgError(ValueError):
    """행렬 연산 오류 기본 클래스"""


class NonFiniteError(LinalgError):
    """NaN/Inf 포함 행렬"""


class IndexOutOfRangeError(LinalgError):
    """기저 인덱스 범위 초과"""


class NotUnitaryError(LinalgError):
    """유니터리 조건 위반"""


class ComplexMatrix:
    """
    정방 복소 행렬 (생성 후 불변)

    entries 는 읽기 전용 numpy 배열로 보관됨
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Union[np.ndarray, Sequence]):
        arr = np.array(entries, dtype=np.complex128)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise LinalgError(f"square matrix required, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("matrix entries contain NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ComplexMatrix is immutable")

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def identity(cls, dim: int) -> "ComplexMatrix":
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim: int) -> "ComplexMatrix":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def diag(cls, values: Sequence[complex]) -> "ComplexMatrix":
        return cls(np.diag(np.asarray(values, dtype=np.complex128)))

    def adjoint(self) -> "ComplexMatrix":
        return ComplexMatrix(self.entries.conj().T)

    def scale(self, factor: complex) -> "ComplexMatrix":
        return ComplexMatrix(factor * self.entries)

    def __add__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        return ComplexMatrix(self.entries + _as_array(other))

    def __sub__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        return ComplexMatrix(self.entries - _as_array(other))

    def __matmul__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        return ComplexMatrix(self.entries @ _as_array(other))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(np.array_equal(self.entries, other.entries))

    def __hash__(self) -> int:
        return hash((self.dim, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"ComplexMatrix(dim={self.dim})"

    def is_close(self, other: "ComplexMatrix", tol: float = 1e-10) -> bool:
        """연산자 노름 기준 근접 여부"""
        if self.dim != other.dim:
            return False
        return op_norm(self.entries - other.entries) <= tol


MatrixLike = Union[ComplexMatrix, np.ndarray]


class Unitary:
    """유니터리 행렬 (생성 시 ‖U*U − I‖ ≤ 1e-10 검사)"""

    __slots__ = ("matrix",)

    def __init__(self, matrix: MatrixLike, tolerance: float = UNITARY_TOLERANCE):
        mat = matrix if isinstance(matrix, ComplexMatrix) else ComplexMatrix(matrix)
        arr = mat.entries
        residual = op_norm(arr.conj().T @ arr - np.eye(mat.dim))
        if residual > tolerance:
            raise NotUnitaryError(f"unitarity residual {residual:.3e} exceeds {tolerance:.1e}")
        object.__setattr__(self, "matrix", mat)

    def __setattr__(self, name, value):
        raise AttributeError("Unitary is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.entries

    @classmethod
    def identity(cls, dim: int) -> "Unitary":
        return cls(ComplexMatrix.identity(dim))

    def adjoint(self) -> "Unitary":
        return Unitary(self.matrix.adjoint())

    def __matmul__(self, other: "Unitary") -> "Unitary":
        # 곱은 다시 유니터리; 누적 오차만 허용 범위 내 재검사
        return Unitary(self.matrix @ other.matrix)

    def conjugate(self, a: MatrixLike) -> ComplexMatrix:
        """U A U*"""
        arr = self.entries
        return ComplexMatrix(arr @ _as_array(a) @ arr.conj().T)

    def __repr__(self) -> str:
        return f"Unitary(dim={self.dim})"


def _as_array(a: MatrixLike) -> np.ndarray:
    if isinstance(a, ComplexMatrix):
        return a.entries
    if isinstance(a, Unitary):
        return a.entries
    arr = np.asarray(a, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("matrix entries contain NaN or Inf")
    return arr


def op_norm(a: MatrixLike) -> float:
    """
    연산자 노름 = 최대 특이값 (LAPACK SVD)

    Args:
        a: 정방 행렬

    Returns:
        σ_max(a)
    """
    arr = _as_array(a)
    if arr.size == 0:
        return 0.0
    return float(sla.svdvals(arr, check_finite=False)[0])


def power_norm_estimate(a: MatrixLike, iterations: int = 200, seed: int = 0) -> float:
    """A*A 거듭제곱 반복으로 σ_max 추정 (교차 검증 전용)"""
    arr = _as_array(a)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(arr.shape[1]) + 1j * rng.standard_normal(arr.shape[1])
    v /= np.linalg.norm(v)
    gram = arr.conj().T @ arr
    estimate = 0.0
    for _ in range(iterations):
        w = gram @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        estimate = norm_w
    return float(np.sqrt(estimate))


def spectral_radius(a: MatrixLike) -> float:
    """max |λ| (고유값 기준)"""
    arr = _as_array(a)
    eigenvalues = sla.eigvals(arr, check_finite=False)
    return float(np.max(np.abs(eigenvalues)))


def direct_sum(*blocks: MatrixLike) -> ComplexMatrix:
    """블록 대각 행렬 A ⊕ B ⊕ ..."""
    if not blocks:
        raise LinalgError("direct_sum needs at least one block")
    return ComplexMatrix(sla.block_diag(*[_as_array(b) for b in blocks]))


def multiplicity_sum(a: MatrixLike, m: int) -> ComplexMatrix:
    """m ⊙ A: A 를 대각으로 m 번 반복"""
    if m < 1:
        raise LinalgError(f"multiplicity must be >= 1, got {m}")
    arr = _as_array(a)
    return ComplexMatrix(np.kron(np.eye(m), arr))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed > MAX_SEED:
        raise LinalgError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def haar_from_generator(dim: int, rng: np.random.Generator) -> Unitary:
    """주어진 난수 생성기로 Haar 유니터리 생성 (Ginibre QR + 위상 보정)"""
    if dim < 1:
        raise LinalgError(f"dimension must be >= 1, got {dim}")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = sla.qr(z)
    d = np.diag(r)
    phases = d / np.abs(d)
    return Unitary(q * phases)


def haar_unitary(dim: int, seed: int) -> Unitary:
    """
    Haar 분포 유니터리 (시드 결정적)

    Args:
        dim: 차원
        seed: 64비트 시드

    Returns:
        Unitary
    """
    rng = np.random.default_rng(_check_seed(seed))
    return haar_from_generator(dim, rng)


def split_seed(seed: int, count: int) -> List[int]:
    """SeedSequence 로 독립 하위 시드 count 개 생성"""
    children = np.random.SeedSequence(_check_seed(seed)).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def random_hermitian(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """가우시안 에르미트 행렬 (GUE 정규화)"""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    return ComplexMatrix((g + g.conj().T) / 2.0)


def random_matrix(dim: int, rng: np.random.Generator, scale: float = 1.0) -> ComplexMatrix:
    return ComplexMatrix(scale * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))))


def exp_i_hermitian(h: MatrixLike, epsilon: float) -> Unitary:
    """exp(i·ε·H)"""
    arr = _as_array(h)
    return Unitary(sla.expm(1j * epsilon * arr))


def swap_unitary(dim: int, i: int, j: int) -> Unitary:
    """
    기저 벡터 e_i, e_j 교환 순열 행렬 (1-기반 인덱스)

    Raises:
        IndexOutOfRangeError: 인덱스가 1..dim 밖
    """
    if dim < 1:
        raise LinalgError(f"dimension must be >= 1, got {dim}")
    for idx in (i, j):
        if idx < 1 or idx > dim:
            raise IndexOutOfRangeError(f"index {idx} outside 1..{dim}")
    perm = np.eye(dim)
    perm[[i - 1, j - 1]] = perm[[j - 1, i - 1]]
    return Unitary(perm)


def permutation_unitary(order: Sequence[int]) -> Unitary:
    """열 k 가 e_{order[k]} 인 순열 유니터리 (0-기반)"""
    n = len(order)
    if sorted(order) != list(range(n)):
        raise LinalgError(f"not a permutation: {list(order)}")
    perm = np.zeros((n, n))
    perm[list(order), list(range(n))] = 1.0
    return Unitary(perm)


def matrix_to_pairs(a: MatrixLike) -> List[List[float]]:
    """행 우선 [re, im] 쌍 목록 (JSON 직렬화용)"""
    arr = _as_array(a)
    return [[float(z.real), float(z.imag)] for z in arr.reshape(-1)]


def matrix_from_pairs(pairs: Sequence[Sequence[float]], dim: int) -> ComplexMatrix:
    if len(pairs) != dim * dim:
        raise LinalgError(f"expected {dim * dim} complex pairs, got {len(pairs)}")
    values = []
    for pair in pairs:
        if len(pair) != 2:
            raise LinalgError(f"complex entry must be [re, im], got {pair}")
        values.append(complex(float(pair[0]), float(pair[1])))
    return ComplexMatrix(np.array(values, dtype=np.complex128).reshape(dim, dim))


def numerical_rank(rows: np.ndarray, tolerance: float = 1e-8) -> Tuple[int, np.ndarray]:
    """
    행 공간의 수치 랭크와 정규직교 기저

    특이값 σ_k > tolerance·σ_max 인 개수를 랭크로 사용
    """
    if rows.size == 0:
        return 0, rows
    _, s, vh = sla.svd(rows, full_matrices=False, check_finite=False)
    if s.size == 0 or s[0] == 0.0:
        return 0, vh[:0]
    rank = int(np.sum(s > tolerance * s[0]))
    return rank, vh[:rank]
