"""
표현 공간 모듈
유한차원 대수의 표현, 거리 d_K, 표현 쌍 샘플링, *-준동형과 pullback

핵심 기능:
- Representation: 블록 중복도 + 켤레 유니터리 U
- eval_rep: π(x) = U (⊕ m_i ⊙ x_i) U*
- rep_distance: d_K(π, π') = max_{a∈K} ‖π(a) − π'(a)‖
- sample_rep_pairs: 독립 Haar / 지수 섭동 층화 샘플
- Homomorphism: hom_apply, pullback, pushforward_set, 합성
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from algebra import (
    DEFAULT_MAX_WORD_LEN,
    AlgebraElement,
    AlgebraError,
    AlgebraMismatchError,
    FdAlgebra,
    GeneratingSet,
    element_norm,
    verify_generates,
    word_span_basis,
)
from linalg import (
    ComplexMatrix,
    Unitary,
    exp_i_hermitian,
    haar_from_generator,
    op_norm,
    random_hermitian,
    split_seed,
)

logger = logging.getLogger(__name__)

AGREEMENT_TOLERANCE = 1e-8

RepPair = Tuple["Representation", "Representation"]


class RepresentationError(AlgebraError):
    """표현/준동형 구성 오류"""


class AmbientMismatchError(RepresentationError):
    """서로 다른 공간 차원의 표현 비교"""


class Representation:
    """
    유니탈 *-표현 π: A → M_m

    Args:
        algebra: 정의역 대수
        multiplicities: 블록별 중복도 (m_1, ..., m_k)
        conjugator: ambient 차원 유니터리 (None 이면 항등)
    """

    def __init__(self, algebra: FdAlgebra, multiplicities: Sequence[int], conjugator: Optional[Unitary] = None):
        mults = tuple(int(m) for m in multiplicities)
        if len(mults) != algebra.block_count:
            raise RepresentationError(f"expected {algebra.block_count} multiplicities, got {len(mults)}")
        if any(m < 0 for m in mults):
            raise RepresentationError(f"multiplicities must be nonnegative, got {mults}")
        if not any(m > 0 for m in mults):
            raise RepresentationError("at least one multiplicity must be positive")
        ambient = sum(m * n for m, n in zip(mults, algebra.block_dims))
        if conjugator is None:
            conjugator = Unitary.identity(ambient)
        if conjugator.dim != ambient:
            raise AmbientMismatchError(f"conjugator dim {conjugator.dim} != ambient dim {ambient}")
        self.algebra = algebra
        self.multiplicities = mults
        self.ambient_dim = ambient
        self.conjugator = conjugator

    @classmethod
    def canonical(cls, algebra: FdAlgebra, multiplicities: Sequence[int]) -> "Representation":
        return cls(algebra, multiplicities, None)

    def __call__(self, x: AlgebraElement) -> ComplexMatrix:
        return eval_rep(self, x)

    def __repr__(self) -> str:
        return f"Representation({self.algebra}, mult={self.multiplicities}, ambient={self.ambient_dim})"


class Homomorphism:
    """
    유니탈 *-준동형 α: A → B

    target 블록 j 에서 α(x)_j = W_j (⊕_i c_ji ⊙ x_i) W_j*
    """

    def __init__(
        self,
        source: FdAlgebra,
        target: FdAlgebra,
        multiplicity_matrix: Sequence[Sequence[int]],
        conjugators: Optional[Sequence[Unitary]] = None,
    ):
        matrix = np.array(multiplicity_matrix, dtype=int)
        if matrix.shape != (target.block_count, source.block_count):
            raise RepresentationError(
                f"multiplicity matrix shape {matrix.shape} != ({target.block_count}, {source.block_count})"
            )
        if np.any(matrix < 0):
            raise RepresentationError("multiplicity matrix must be nonnegative")
        images = matrix @ np.array(source.block_dims)
        for j, (got, want) in enumerate(zip(images, target.block_dims)):
            if int(got) != want:
                raise RepresentationError(f"target block {j}: Σ c_ji n_i = {int(got)} != {want} (not unital)")
        if conjugators is None:
            conjugators = [Unitary.identity(p) for p in target.block_dims]
        conjugators = tuple(conjugators)
        if len(conjugators) != target.block_count:
            raise RepresentationError(f"expected {target.block_count} conjugators, got {len(conjugators)}")
        for j, (w, p) in enumerate(zip(conjugators, target.block_dims)):
            if w.dim != p:
                raise AmbientMismatchError(f"conjugator {j} dim {w.dim} != target block dim {p}")
        matrix.setflags(write=False)
        self.source = source
        self.target = target
        self.multiplicity_matrix = matrix
        self.conjugators = conjugators

    @classmethod
    def identity(cls, algebra: FdAlgebra) -> "Homomorphism":
        return cls(algebra, algebra, np.eye(algebra.block_count, dtype=int))

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        return hom_apply(self, x)

    def __repr__(self) -> str:
        return f"Homomorphism({self.source} -> {self.target})"


def eval_rep(pi: Representation, x: AlgebraElement) -> ComplexMatrix:
    """π(x) = U (⊕_i m_i ⊙ x_i) U*"""
    if x.algebra != pi.algebra:
        raise AlgebraMismatchError(f"element of {x.algebra} given to representation of {pi.algebra}")
    blocks = []
    for m, block in zip(pi.multiplicities, x.blocks):
        blocks.extend([block.entries] * m)
    return pi.conjugator.conjugate(sla.block_diag(*blocks))


def _check_comparable(pi: Representation, other: Representation) -> None:
    if pi.algebra != other.algebra:
        raise AlgebraMismatchError(f"{pi.algebra} vs {other.algebra}")
    if pi.ambient_dim != other.ambient_dim:
        raise AmbientMismatchError(f"ambient dims {pi.ambient_dim} vs {other.ambient_dim}")


def deviation(pi: Representation, other: Representation, x: AlgebraElement) -> float:
    """‖π(x) − π'(x)‖"""
    _check_comparable(pi, other)
    return op_norm(eval_rep(pi, x).entries - eval_rep(other, x).entries)


def rep_distance(pi: Representation, other: Representation, K: GeneratingSet) -> float:
    """
    d_K(π, π') = max_{a∈K} ‖π(a) − π'(a)‖

    Raises:
        AlgebraMismatchError, AmbientMismatchError
    """
    _check_comparable(pi, other)
    if K.algebra != pi.algebra:
        raise AlgebraMismatchError(f"generating set over {K.algebra}, representations of {pi.algebra}")
    return max(deviation(pi, other, a) for a in K.elements)


def conjugate_rep(pi: Representation, w: Unitary) -> Representation:
    """Ad_W ∘ π"""
    return Representation(pi.algebra, pi.multiplicities, w @ pi.conjugator)


def sample_rep_pairs(
    algebra: FdAlgebra,
    multiplicities: Sequence[int],
    count: int,
    seed: int,
    perturbation_scale: float = 0.5,
) -> List[RepPair]:
    """
    (Ad_U∘ρ, Ad_U'∘ρ) 쌍 샘플링

    앞쪽 절반(올림)은 U' 독립 Haar, 나머지는 U' = U·exp(iεH),
    ε = perturbation_scale · Uniform[0,1). 쌍마다 독립 시드 스트림 사용
    """
    if count < 1:
        raise RepresentationError(f"count must be >= 1, got {count}")
    if perturbation_scale < 0:
        raise RepresentationError(f"perturbation_scale must be >= 0, got {perturbation_scale}")
    base = Representation.canonical(algebra, multiplicities)
    dim = base.ambient_dim
    independent_count = (count + 1) // 2
    pairs: List[RepPair] = []
    for k, child_seed in enumerate(split_seed(seed, count)):
        rng = np.random.default_rng(child_seed)
        u = haar_from_generator(dim, rng)
        if k < independent_count:
            u_other = haar_from_generator(dim, rng)
        else:
            epsilon = perturbation_scale * rng.uniform()
            h = random_hermitian(dim, rng)
            u_other = u if epsilon == 0.0 else u @ exp_i_hermitian(h, epsilon)
        pairs.append((conjugate_rep(base, u), conjugate_rep(base, u_other)))
    logger.debug(f"sampled {count} representation pairs (ambient {dim}, {independent_count} independent)")
    return pairs


def hom_apply(alpha: Homomorphism, x: AlgebraElement) -> AlgebraElement:
    """α(x)_j = W_j (⊕_i c_ji ⊙ x_i) W_j*"""
    if x.algebra != alpha.source:
        raise AlgebraMismatchError(f"element of {x.algebra} given to homomorphism from {alpha.source}")
    blocks = []
    for j, w in enumerate(alpha.conjugators):
        parts = []
        for i, c in enumerate(alpha.multiplicity_matrix[j]):
            parts.extend([x.blocks[i].entries] * int(c))
        blocks.append(w.conjugate(sla.block_diag(*parts)))
    return AlgebraElement(alpha.target, blocks)


def _compose_layout(
    source: FdAlgebra,
    outer_counts: Sequence[int],
    rows: np.ndarray,
    inner_conjugators: Sequence[Unitary],
) -> Tuple[List[int], np.ndarray]:
    """
    ⊕_j r_j ⊙ W_j(⊕_i c_ji ⊙ x_i)W_j* 를 V(⊕_i m_i ⊙ x_i)V* 로 재배열

    Returns:
        (m_i = Σ_j r_j c_ji, V = (⊕_j r_j ⊙ W_j) · P)
    """
    dims = source.block_dims
    mults = [int(sum(int(r) * int(rows[j][i]) for j, r in enumerate(outer_counts))) for i in range(len(dims))]
    ambient = sum(m * n for m, n in zip(mults, dims))

    canon_offset = []
    offset = 0
    for m, n in zip(mults, dims):
        canon_offset.append(offset)
        offset += m * n

    perm = np.zeros((ambient, ambient))
    next_copy = [0] * len(dims)
    pos = 0
    for j, r in enumerate(outer_counts):
        for _ in range(int(r)):
            for i, c in enumerate(rows[j]):
                n = dims[i]
                for _ in range(int(c)):
                    start = canon_offset[i] + next_copy[i] * n
                    perm[pos:pos + n, start:start + n] = np.eye(n)
                    next_copy[i] += 1
                    pos += n

    outer = [inner_conjugators[j].entries for j, r in enumerate(outer_counts) for _ in range(int(r))]
    return mults, sla.block_diag(*outer) @ perm


def pullback(alpha: Homomorphism, rho: Representation) -> Representation:
    """α*ρ = ρ ∘ α (중복도와 켤레 유니터리 합성)"""
    if rho.algebra != alpha.target:
        raise AlgebraMismatchError(f"representation of {rho.algebra}, homomorphism into {alpha.target}")
    mults, v = _compose_layout(alpha.source, rho.multiplicities, alpha.multiplicity_matrix, alpha.conjugators)
    return Representation(alpha.source, mults, Unitary(rho.conjugator.entries @ v))


def compose_homs(beta: Homomorphism, alpha: Homomorphism) -> Homomorphism:
    """β ∘ α"""
    if alpha.target != beta.source:
        raise AlgebraMismatchError(f"cannot compose {alpha} with {beta}")
    rows = []
    conjugators = []
    for k, w in enumerate(beta.conjugators):
        mults, v = _compose_layout(alpha.source, beta.multiplicity_matrix[k], alpha.multiplicity_matrix, alpha.conjugators)
        rows.append(mults)
        conjugators.append(Unitary(w.entries @ v))
    return Homomorphism(alpha.source, beta.target, rows, conjugators)


def pushforward_set(alpha: Homomorphism, K: GeneratingSet, max_word_len: int = DEFAULT_MAX_WORD_LEN) -> GeneratingSet:
    """α(K): target 위에서 생성 여부를 검사해 플래그 부여"""
    if K.algebra != alpha.source:
        raise AlgebraMismatchError(f"generating set over {K.algebra}, homomorphism from {alpha.source}")
    image = GeneratingSet(alpha.target, [hom_apply(alpha, a) for a in K.elements])
    ok, span_dim = verify_generates(image, max_word_len)
    if not ok:
        logger.debug(f"image set spans {span_dim}/{alpha.target.dimension}")
    return GeneratingSet(alpha.target, image.elements, ok)


def hom_distance(alpha: Homomorphism, beta: Homomorphism, K: GeneratingSet) -> float:
    """max_{a∈K} ‖α(a) − β(a)‖"""
    if alpha.source != beta.source or alpha.target != beta.target:
        raise AlgebraMismatchError(f"{alpha} vs {beta}")
    if K.algebra != alpha.source:
        raise AlgebraMismatchError(f"generating set over {K.algebra}, homomorphisms from {alpha.source}")
    return max(element_norm(hom_apply(alpha, a) - hom_apply(beta, a)) for a in K.elements)


def random_homomorphism(source: FdAlgebra, multiplicity_matrix: Sequence[Sequence[int]], seed: int) -> Homomorphism:
    """target 블록 차원은 중복도 행렬로 결정, 켤레는 Haar"""
    matrix = np.array(multiplicity_matrix, dtype=int)
    target = FdAlgebra([int(p) for p in matrix @ np.array(source.block_dims)])
    conjugators = []
    for p, child_seed in zip(target.block_dims, split_seed(seed, target.block_count)):
        conjugators.append(haar_from_generator(p, np.random.default_rng(child_seed)))
    return Homomorphism(source, target, matrix, conjugators)


def block_projection(source: FdAlgebra, keep: Sequence[int]) -> Homomorphism:
    """선택한 블록만 남기는 전사 준동형 (0-기반 인덱스)"""
    target = FdAlgebra([source.block_dims[i] for i in keep])
    matrix = np.zeros((len(keep), source.block_count), dtype=int)
    for j, i in enumerate(keep):
        matrix[j, i] = 1
    return Homomorphism(source, target, matrix)


def representations_agree(
    pi: Representation,
    other: Representation,
    K: GeneratingSet,
    max_word_len: int = DEFAULT_MAX_WORD_LEN,
    tolerance: float = AGREEMENT_TOLERANCE,
) -> bool:
    """단어 span 기저 위에서 π, π' 의 외연적 일치 여부"""
    _check_comparable(pi, other)
    return all(deviation(pi, other, b) <= tolerance for b in word_span_basis(K, max_word_len))
