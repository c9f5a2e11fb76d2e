"""
유한차원 C*-대수 모듈
행렬 블록 직합 ⊕ M_{n_i} 과 그 원소, 생성 집합

핵심 기능:
- FdAlgebra / AlgebraElement / GeneratingSet
- 원소 노름 (블록 최대 노름 = 기약표현 상한)
- *-다항식 평가, 단어 span 랭크로 생성 여부 판정
- 표준 기약표현 열거, 단위화 A⁺ = A ⊕ ℂ
"""
import re
import logging
from typing import List, Sequence, Tuple, Union

import numpy as np

from linalg import ComplexMatrix, numerical_rank, op_norm

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-8
DEFAULT_MAX_WORD_LEN = 4

# (생성자 인덱스, adjoint 여부)
Letter = Tuple[int, bool]
Word = Tuple[Letter, ...]

_LETTER_PATTERN = re.compile(r"^(?:g?(\d+)|([a-z]))(\*?)$")


class AlgebraError(ValueError):
    """대수 구성 오류 기본 클래스"""


class BadWordError(AlgebraError):
    """생성 집합 범위를 벗어난 단어"""


class AlgebraMismatchError(AlgebraError):
    """서로 다른 대수의 원소/표현 혼용"""


class FdAlgebra:
    """⊕_i M_{n_i} (블록 차원 목록으로 식별)"""

    __slots__ = ("block_dims",)

    def __init__(self, block_dims: Sequence[int]):
        dims = tuple(int(n) for n in block_dims)
        if not dims:
            raise AlgebraError("algebra needs at least one block")
        if any(n < 1 for n in dims):
            raise AlgebraError(f"block dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("FdAlgebra is immutable")

    @property
    def block_count(self) -> int:
        return len(self.block_dims)

    @property
    def dimension(self) -> int:
        """선형 차원 Σ n_i²"""
        return sum(n * n for n in self.block_dims)

    def __eq__(self, other) -> bool:
        return isinstance(other, FdAlgebra) and self.block_dims == other.block_dims

    def __hash__(self) -> int:
        return hash(self.block_dims)

    def __repr__(self) -> str:
        return "FdAlgebra(" + " ⊕ ".join(f"M{n}" for n in self.block_dims) + ")"

    def unit(self) -> "AlgebraElement":
        return AlgebraElement(self, [ComplexMatrix.identity(n) for n in self.block_dims])

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [ComplexMatrix.zeros(n) for n in self.block_dims])

    def scalar(self, value: complex) -> "AlgebraElement":
        return self.unit().scale(value)

    def element(self, blocks: Sequence) -> "AlgebraElement":
        return AlgebraElement(self, [b if isinstance(b, ComplexMatrix) else ComplexMatrix(b) for b in blocks])

    def block_unit(self, index: int) -> "AlgebraElement":
        """index 번째 블록의 중심 사영 (0-기반)"""
        blocks = [ComplexMatrix.zeros(n) for n in self.block_dims]
        blocks[index] = ComplexMatrix.identity(self.block_dims[index])
        return AlgebraElement(self, blocks)

    def matrix_unit(self, block: int, row: int, col: int) -> "AlgebraElement":
        """블록 block 의 행렬 단위 E_{row,col} (0-기반)"""
        blocks = [np.zeros((n, n), dtype=np.complex128) for n in self.block_dims]
        blocks[block][row, col] = 1.0
        return self.element(blocks)

    def matrix_units(self) -> List["AlgebraElement"]:
        units = []
        for b, n in enumerate(self.block_dims):
            for i in range(n):
                for j in range(n):
                    units.append(self.matrix_unit(b, i, j))
        return units

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> "AlgebraElement":
        blocks = [
            scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
            for n in self.block_dims
        ]
        return self.element(blocks)

    def from_vector(self, vector: np.ndarray) -> "AlgebraElement":
        blocks = []
        offset = 0
        for n in self.block_dims:
            blocks.append(ComplexMatrix(np.asarray(vector[offset:offset + n * n]).reshape(n, n)))
            offset += n * n
        return AlgebraElement(self, blocks)


class AlgebraElement:
    """대수 원소: 블록별 행렬 목록"""

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra: FdAlgebra, blocks: Sequence[ComplexMatrix]):
        blocks = tuple(blocks)
        if len(blocks) != algebra.block_count:
            raise AlgebraError(f"expected {algebra.block_count} blocks, got {len(blocks)}")
        for i, (block, n) in enumerate(zip(blocks, algebra.block_dims)):
            if block.dim != n:
                raise AlgebraError(f"block {i} has dim {block.dim}, expected {n}")
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    def _check_same(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise AlgebraMismatchError(f"{self.algebra} vs {other.algebra}")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, other: Union["AlgebraElement", complex]) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            self._check_same(other)
            return AlgebraElement(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])
        return self.scale(other)

    def __rmul__(self, other: complex) -> "AlgebraElement":
        return self.scale(other)

    def __neg__(self) -> "AlgebraElement":
        return self.scale(-1.0)

    def scale(self, factor: complex) -> "AlgebraElement":
        return AlgebraElement(self.algebra, [b.scale(factor) for b in self.blocks])

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, [b.adjoint() for b in self.blocks])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([b.entries.reshape(-1) for b in self.blocks])

    def is_close(self, other: "AlgebraElement", tol: float = 1e-10) -> bool:
        self._check_same(other)
        return element_norm(self - other) <= tol

    def __repr__(self) -> str:
        return f"AlgebraElement({self.algebra}, norm={element_norm(self):.4g})"


class GeneratingSet:
    """
    유한 생성 집합 K

    verified=True 는 verify_generates 통과 시에만 부여
    """

    __slots__ = ("algebra", "elements", "verified")

    def __init__(self, algebra: FdAlgebra, elements: Sequence[AlgebraElement], verified: bool = False):
        elements = tuple(elements)
        if not elements:
            raise AlgebraError("generating set must be nonempty")
        for x in elements:
            if x.algebra != algebra:
                raise AlgebraMismatchError(f"element of {x.algebra} in set over {algebra}")
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "verified", bool(verified))

    def __setattr__(self, name, value):
        raise AttributeError("GeneratingSet is immutable")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def union(self, other: "GeneratingSet") -> "GeneratingSet":
        if other.algebra != self.algebra:
            raise AlgebraMismatchError(f"{self.algebra} vs {other.algebra}")
        return GeneratingSet(self.algebra, self.elements + other.elements, self.verified or other.verified)

    def verify(self, max_word_len: int = DEFAULT_MAX_WORD_LEN) -> "GeneratingSet":
        """생성 여부 검사 후 플래그를 갱신한 새 집합 반환"""
        ok, span_dim = verify_generates(self, max_word_len)
        if not ok:
            logger.warning(f"⚠️ generating set spans {span_dim}/{self.algebra.dimension} at word length {max_word_len}")
        return GeneratingSet(self.algebra, self.elements, ok)

    def max_norm(self) -> float:
        return max(element_norm(x) for x in self.elements)

    def __repr__(self) -> str:
        return f"GeneratingSet({self.algebra}, size={len(self.elements)}, verified={self.verified})"


def element_norm(x: AlgebraElement) -> float:
    """‖x‖ = max_i ‖x_i‖"""
    return max(op_norm(b) for b in x.blocks)


def parse_word(text: str) -> Word:
    """
    단어 문자열 파싱

    토큰은 공백 구분: "a", "b*", "g0", "g1*", "0", "1*"
    (문자 a..z 는 인덱스 0..25). 빈 문자열은 빈 단어(단위원)
    """
    letters: List[Letter] = []
    for token in text.split():
        match = _LETTER_PATTERN.match(token.strip())
        if not match:
            raise BadWordError(f"cannot parse letter '{token}'")
        digits, name, star = match.groups()
        index = int(digits) if digits is not None else ord(name) - ord("a")
        letters.append((index, star == "*"))
    return tuple(letters)


def _letter_value(letter: Letter, K: GeneratingSet) -> AlgebraElement:
    index, starred = letter
    if index < 0 or index >= len(K.elements):
        raise BadWordError(f"letter index {index} outside generating set of size {len(K.elements)}")
    x = K.elements[index]
    return x.adjoint() if starred else x


def evaluate_word(word: Union[str, Word], K: GeneratingSet) -> AlgebraElement:
    if isinstance(word, str):
        word = parse_word(word)
    result = K.algebra.unit()
    for letter in word:
        result = result * _letter_value(letter, K)
    return result


def star_polynomial(words: Sequence[Union[str, Word]], coeffs: Sequence[complex], K: GeneratingSet) -> AlgebraElement:
    """
    Σ_k c_k · w_k(K, K*) 평가

    Raises:
        BadWordError: 단어 인덱스 범위 초과 또는 계수 개수 불일치
    """
    if len(words) != len(coeffs):
        raise BadWordError(f"{len(words)} words but {len(coeffs)} coefficients")
    total = K.algebra.zero()
    for word, coeff in zip(words, coeffs):
        total = total + evaluate_word(word, K).scale(coeff)
    return total


def word_span_basis(K: GeneratingSet, max_word_len: int = DEFAULT_MAX_WORD_LEN) -> List[AlgebraElement]:
    """
    길이 ≤ max_word_len 인 *-단어들의 선형 span 의 정규직교 기저

    span_L = span(span_{L-1} ∪ letters · span_{L-1}) 로 점진 계산
    """
    if max_word_len < 1:
        raise AlgebraError(f"max_word_len must be >= 1, got {max_word_len}")
    algebra = K.algebra
    letters = [x for x in K.elements] + [x.adjoint() for x in K.elements]
    basis = [algebra.unit()]
    rank = 1
    for length in range(1, max_word_len + 1):
        candidates = list(basis) + [g * b for g in letters for b in basis]
        rows = []
        for c in candidates:
            v = c.to_vector()
            norm = np.linalg.norm(v)
            if norm > 0.0:
                rows.append(v / norm)
        new_rank, vh = numerical_rank(np.array(rows), RANK_TOLERANCE)
        basis = [algebra.from_vector(row) for row in vh]
        logger.debug(f"word length {length}: span dim {new_rank}/{algebra.dimension}")
        if new_rank == rank or new_rank == algebra.dimension:
            rank = new_rank
            break
        rank = new_rank
    return basis


def verify_generates(K: GeneratingSet, max_word_len: int = DEFAULT_MAX_WORD_LEN) -> Tuple[bool, int]:
    """
    K ∪ {1} 의 단어 span 이 대수 전체인지 판정

    Returns:
        (생성 여부, 달성한 span 차원)
    """
    basis = word_span_basis(K, max_word_len)
    span_dim = len(basis)
    return span_dim == K.algebra.dimension, span_dim


def enumerate_irreps(algebra: FdAlgebra) -> list:
    """블록별 표준 기약표현 (중복도 1, 항등 켤레)"""
    from reps import Representation

    irreps = []
    for i in range(algebra.block_count):
        multiplicities = [0] * algebra.block_count
        multiplicities[i] = 1
        irreps.append(Representation.canonical(algebra, multiplicities))
    return irreps


def norm_via_irreps(x: AlgebraElement) -> float:
    """max_π ‖π(x)‖ (π: 표준 기약표현)"""
    from reps import eval_rep

    return max(op_norm(eval_rep(pi, x)) for pi in enumerate_irreps(x.algebra))


def unitization(algebra: FdAlgebra) -> FdAlgebra:
    """A⁺ ≅ A ⊕ ℂ (마지막에 1×1 블록 추가)"""
    return FdAlgebra(algebra.block_dims + (1,))


def unitize_element(x: AlgebraElement, scalar: complex = 0.0) -> AlgebraElement:
    """x + λ1 ∈ A⁺ 를 (x + λ1_A, λ) 로 표현"""
    target = unitization(x.algebra)
    shifted = x + x.algebra.scalar(scalar)
    return AlgebraElement(target, list(shifted.blocks) + [ComplexMatrix([[scalar]])])


def random_generating_set(
    algebra: FdAlgebra,
    size: int,
    rng: np.random.Generator,
    max_word_len: int = DEFAULT_MAX_WORD_LEN,
) -> GeneratingSet:
    """무작위 원소 size 개로 생성 집합 구성 (검증 플래그 포함)"""
    if size < 1:
        raise AlgebraError(f"generating set size must be >= 1, got {size}")
    elements = [algebra.random_element(rng) for _ in range(size)]
    return GeneratingSet(algebra, elements).verify(max_word_len)

