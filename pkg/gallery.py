"""
반례 갤러리 모듈
명시적 행렬 계산으로 표현 공간의 분리/분산 현상을 재현하고 수치로 인증

핵심 기능:
- orbit_dispersion: 비스칼라 T 의 유니터리 궤도 분산 √2|b|
- compacts_scatter: 랭크 1 사영의 교환 켤레 표현들이 서로 ≥ 1 떨어짐
- a0_discrete: 블록 M_{2^n} 표현 ρ_n 들의 상호 거리 2
- projection_separation: ℂ⊕ℂ 의 사영 표현 분리 ‖P − Q‖ = 1
- run_scenario: 이름 기반 실행 + 산출물(result.json, CSV) 기록
"""
import os
import logging
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from algebra import AlgebraElement, FdAlgebra, GeneratingSet, verify_generates
from artifacts import fingerprint, write_csv_atomic, write_json_atomic
from linalg import (
    ComplexMatrix,
    Unitary,
    direct_sum,
    multiplicity_sum,
    op_norm,
    permutation_unitary,
    swap_unitary,
)
from reps import Representation, eval_rep, rep_distance
from run_config import ConfigError
from schema_io import matrix_from_json

logger = logging.getLogger(__name__)

SCALAR_TOLERANCE = 1e-10
DISPERSION_TOLERANCE = 1e-9
SCATTER_TOLERANCE = 1e-9
A0_TOLERANCE = 1e-9
PROJECTION_TOLERANCE = 1e-10
MAX_A0_EXPONENT = 8


class GalleryError(ValueError):
    """갤러리 시나리오 오류 기본 클래스"""


class UnknownScenarioError(GalleryError):
    """등록되지 않은 시나리오 이름"""


class DimensionTooSmallError(GalleryError):
    """시나리오 최소 차원 미달"""


class DuplicateSubsetError(GalleryError):
    """중복된 기저 부분집합"""


@dataclass
class ScenarioResult:
    name: str
    claim: str
    claimed_bound: float
    measured: float
    tolerance: float
    verdict: str
    details: Dict[str, Any] = field(default_factory=dict)
    table_header: List[str] = field(default_factory=list)
    table: List[List[float]] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("table")
        data.pop("table_header")
        data.pop("artifacts")
        return data


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def _find_cyclic_vector(t: np.ndarray, threshold: float = SCALAR_TOLERANCE) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tξ 와 ξ 가 일차독립인 단위벡터 ξ 탐색 (e_k, 다음 (e_k + e_l)/√2 순)

    잔차 ‖Tξ − ⟨Tξ, ξ⟩ξ‖ 가 threshold 를 넘는 첫 후보, 없으면 잔차 최대 후보.
    모든 후보가 고유벡터이면 T 는 스칼라이므로 비스칼라 T 에서는 잔차가 양수

    Returns:
        (ξ, w = Tξ − ⟨Tξ, ξ⟩ξ)
    """
    n = t.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    candidates = [eye[:, k] for k in range(n)]
    candidates += [(eye[:, k] + eye[:, l]) / np.sqrt(2.0) for k, l in combinations(range(n), 2)]
    best_xi, best_w, best_norm = candidates[0], np.zeros(n, dtype=np.complex128), -1.0
    for xi in candidates:
        t_xi = t @ xi
        w = t_xi - np.vdot(xi, t_xi) * xi
        w_norm = float(np.linalg.norm(w))
        if w_norm > threshold:
            return xi, w
        if w_norm > best_norm:
            best_xi, best_w, best_norm = xi, w, w_norm
    if best_norm <= 0.0:
        raise GalleryError("every candidate vector is an eigenvector of T (T is scalar)")
    return best_xi, best_w


def orbit_dispersion(T: ComplexMatrix, tolerance: float = DISPERSION_TOLERANCE) -> ScenarioResult:
    """
    U_n T U_n* e_1 = a e_1 + b e_n 이므로 ‖(U_nTU_n* − U_mTU_m*)e_1‖ = √2|b|

    e_1 = ξ, e_2 = αξ + βTξ (Gram–Schmidt), U_n 은 e_2 ↔ e_n 교환
    """
    n = T.dim
    if n < 3:
        raise DimensionTooSmallError(f"orbit dispersion needs dim >= 3, got {n}")
    t = T.entries
    scalar = complex(np.trace(t) / n)
    if op_norm(t - scalar * np.eye(n)) <= SCALAR_TOLERANCE:
        spread = max(op_norm(u.conjugate(t).entries - t) for u in (swap_unitary(n, 1, k) for k in range(2, n + 1)))
        return ScenarioResult(
            name="orbit",
            claim="scalar T has a one-point unitary orbit",
            claimed_bound=0.0,
            measured=spread,
            tolerance=tolerance,
            verdict=_verdict(spread <= tolerance),
            details={"scalar": True, "lambda": [scalar.real, scalar.imag], "dim": n},
        )

    xi, w = _find_cyclic_vector(t)
    w_norm = float(np.linalg.norm(w))
    e1 = xi
    e2 = w / w_norm
    alpha = -np.vdot(xi, t @ xi) / w_norm
    beta = 1.0 / w_norm
    a = complex(np.vdot(e1, t @ e1))
    b = complex(np.vdot(e2, t @ e1))

    q, _ = sla.qr(np.column_stack([e1, e2, np.eye(n)]), mode="economic")
    q = q[:, :n].copy()
    q[:, 0], q[:, 1] = e1, e2
    basis = Unitary(q)

    def orbit_point(k: int) -> np.ndarray:
        u = basis.conjugate(swap_unitary(n, 2, k).matrix)
        return u.entries @ t @ u.entries.conj().T @ e1

    points = {k: orbit_point(k) for k in range(2, n + 1)}
    expected = np.sqrt(2.0) * abs(b)
    rows = []
    worst = 0.0
    for k, l in combinations(range(2, n + 1), 2):
        value = float(np.linalg.norm(points[k] - points[l]))
        worst = max(worst, abs(value - expected))
        rows.append([k, l, value, expected])
    measured = rows[0][2]
    logger.debug(f"orbit dim {n}: b={b:.6g}, dispersion {measured:.12g}, worst deviation {worst:.3e}")
    return ScenarioResult(
        name="orbit",
        claim="||(U_n T U_n* - U_m T U_m*) e1|| = sqrt(2)|b| for all 2 <= n < m",
        claimed_bound=float(expected),
        measured=measured,
        tolerance=tolerance,
        verdict=_verdict(worst <= tolerance),
        details={
            "scalar": False,
            "dim": n,
            "a": [a.real, a.imag],
            "b": [b.real, b.imag],
            "alpha": [complex(alpha).real, complex(alpha).imag],
            "beta": beta,
            "xi": [[z.real, z.imag] for z in xi],
            "max_pair_deviation": worst,
            "pairs_checked": len(rows),
        },
        table_header=["n", "m", "dispersion", "sqrt2_abs_b"],
        table=rows,
    )


def compacts_scatter(N: int = 8, m_list: Optional[Sequence[int]] = None, tolerance: float = SCATTER_TOLERANCE) -> ScenarioResult:
    """
    M_N 에서 π_{1,m}(A) = U_{1,m} A U_{1,m} (U_{1,m}: e_1 ↔ e_m)

    ‖π_{1,m}(P_1) − π_{1,m'}(P_1)‖ = ‖P_m − P_{m'}‖ ≥ 1
    """
    indices = list(range(2, N)) if m_list is None else [int(m) for m in m_list]
    if len(indices) < 2:
        raise ConfigError(f"m_list needs at least two indices, got {indices}")
    if len(set(indices)) != len(indices):
        raise ConfigError(f"m_list has duplicates: {indices}")
    if min(indices) < 2:
        raise ConfigError(f"m_list indices must be >= 2, got {indices}")
    if N < max(indices) + 1:
        raise DimensionTooSmallError(f"N={N} must be at least max(m_list)+1={max(indices) + 1}")

    algebra = FdAlgebra([N])
    p1 = algebra.matrix_unit(0, 0, 0)
    # {P_n/n} ∪ {E_{n,n+1}/n}: 대각 사영과 이동 단위로 M_N 생성
    elements = [algebra.matrix_unit(0, k, k).scale(1.0 / (k + 1)) for k in range(N)]
    elements += [algebra.matrix_unit(0, k, k + 1).scale(1.0 / (k + 1)) for k in range(N - 1)]
    K = GeneratingSet(algebra, elements)
    verified, _ = verify_generates(K, max_word_len=max(4, N))
    K = GeneratingSet(algebra, elements, verified)

    reps = {m: Representation(algebra, [1], swap_unitary(N, 1, m)) for m in indices}
    rows = []
    lower_bounds = []
    ok = True
    for m, m2 in combinations(indices, 2):
        lower = op_norm(eval_rep(reps[m], p1).entries - eval_rep(reps[m2], p1).entries)
        distance = rep_distance(reps[m], reps[m2], K)
        lower_bounds.append(lower)
        ok = ok and lower >= 1.0 - tolerance and distance >= lower - tolerance
        rows.append([m, m2, distance, lower])
    diagonal = op_norm(eval_rep(reps[indices[0]], p1).entries - eval_rep(reps[indices[0]], p1).entries)
    measured = float(min(lower_bounds))
    return ScenarioResult(
        name="compacts_scatter",
        claim="d_K(pi_1m, pi_1m') >= ||pi_1m(P1) - pi_1m'(P1)|| >= 1 for m != m'",
        claimed_bound=1.0,
        measured=measured,
        tolerance=tolerance,
        verdict=_verdict(ok and diagonal == 0.0),
        details={"N": N, "m_list": indices, "pairs_checked": len(rows), "generating_set_verified": verified},
        table_header=["m", "m_prime", "d_K", "p1_lower_bound"],
        table=rows,
    )


def a0_setup(N: int) -> Tuple[FdAlgebra, AlgebraElement, GeneratingSet, List[Representation]]:
    """
    블록 M_{2^n} (n=1..N), a = (A, A⊕A, ...), A = diag(1,−1)

    ρ_n: 블록 n 에 중복도 2^{N−n}, 켤레 ⊕^{2^{N−n}} (I ⊕ ... ⊕ I ⊕ V), V = 2×2 교환
    """
    if N < 2:
        raise DimensionTooSmallError(f"a0_discrete needs N >= 2, got {N}")
    if N > MAX_A0_EXPONENT:
        raise ConfigError(f"a0_discrete supports N <= {MAX_A0_EXPONENT} (ambient 2^N), got {N}")
    algebra = FdAlgebra([2 ** n for n in range(1, N + 1)])
    A = ComplexMatrix.diag([1.0, -1.0])
    V = swap_unitary(2, 1, 2).matrix
    a = AlgebraElement(algebra, [multiplicity_sum(A, 2 ** (n - 1)) for n in range(1, N + 1)])
    K = GeneratingSet(algebra, [a])

    reps = []
    for n in range(1, N + 1):
        block_dim = 2 ** n
        u_n = V if block_dim == 2 else direct_sum(ComplexMatrix.identity(block_dim - 2), V)
        copies = 2 ** (N - n)
        multiplicities = [0] * N
        multiplicities[n - 1] = copies
        reps.append(Representation(algebra, multiplicities, Unitary(multiplicity_sum(u_n, copies))))
    return algebra, a, K, reps


def a0_discrete(N: int = 3, tolerance: float = A0_TOLERANCE) -> ScenarioResult:
    """d_K(ρ_n, ρ_m) ≥ ‖ρ_n(a) − ρ_m(a)‖ = ‖diag(−2, 2)‖ = 2"""
    _, a, K, reps = a0_setup(N)
    rows = []
    values = []
    ok = True
    for n, m in combinations(range(1, N + 1), 2):
        value = op_norm(eval_rep(reps[n - 1], a).entries - eval_rep(reps[m - 1], a).entries)
        distance = rep_distance(reps[n - 1], reps[m - 1], K)
        values.append(value)
        ok = ok and abs(value - 2.0) <= tolerance and distance >= value - tolerance
        rows.append([n, m, distance, value])
    return ScenarioResult(
        name="a0_discrete",
        claim="d_K(rho_n, rho_m) >= ||rho_n(a) - rho_m(a)|| = 2 for n < m",
        claimed_bound=2.0,
        measured=float(min(values)),
        tolerance=tolerance,
        verdict=_verdict(ok),
        details={"N": N, "ambient_dim": 2 ** N, "pairs_checked": len(rows), "max_value": float(max(values))},
        table_header=["n", "m", "d_K", "a_deviation"],
        table=rows,
    )


def projection_rep(algebra: FdAlgebra, dim: int, subset: Sequence[int]) -> Representation:
    """ℂ⊕ℂ 의 표현 π_S((1,0)) = P_S (S: 1-기반 기저 인덱스)"""
    chosen = sorted(int(i) - 1 for i in subset)
    rest = [i for i in range(dim) if i not in chosen]
    return Representation(algebra, [len(chosen), dim - len(chosen)], permutation_unitary(chosen + rest))


def projection_separation(dim: int, subsets: Sequence[Sequence[int]], tolerance: float = PROJECTION_TOLERANCE) -> ScenarioResult:
    """기저 정렬 사영 P ≠ Q 에 대해 ‖P − Q‖ = 1, 따라서 d_K(π_P, π_Q) ≥ 1"""
    if dim < 1:
        raise DimensionTooSmallError(f"dim must be >= 1, got {dim}")
    if len(subsets) < 2:
        raise ConfigError("projection_separation needs at least two subsets")
    seen = set()
    for subset in subsets:
        if any(int(i) < 1 or int(i) > dim for i in subset):
            raise ConfigError(f"subset {list(subset)} has indices outside 1..{dim}")
        key = frozenset(int(i) for i in subset)
        if key in seen or len(key) != len(subset):
            raise DuplicateSubsetError(f"duplicate subset {sorted(key)}")
        seen.add(key)

    algebra = FdAlgebra([1, 1])
    p = algebra.block_unit(0)
    verified, _ = verify_generates(GeneratingSet(algebra, [p]))
    K = GeneratingSet(algebra, [p], verified)
    reps = [projection_rep(algebra, dim, s) for s in subsets]
    rows = []
    values = []
    ok = True
    for i, j in combinations(range(len(subsets)), 2):
        value = op_norm(eval_rep(reps[i], p).entries - eval_rep(reps[j], p).entries)
        distance = rep_distance(reps[i], reps[j], K)
        values.append(value)
        ok = ok and abs(value - 1.0) <= tolerance and distance >= 1.0 - tolerance
        rows.append([i, j, distance, value])
    return ScenarioResult(
        name="projection_separation",
        claim="||P - Q|| = 1 and d_K(pi_P, pi_Q) >= 1 for distinct basis projections",
        claimed_bound=1.0,
        measured=float(min(values)),
        tolerance=tolerance,
        verdict=_verdict(ok),
        details={"dim": dim, "subsets": [sorted(int(i) for i in s) for s in subsets], "pairs_checked": len(rows)},
        table_header=["i", "j", "d_K", "projection_gap"],
        table=rows,
    )


def _int_param(config: Dict[str, Any], key: str, default: int) -> int:
    value = config.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    return int(value)


def _check_keys(config: Dict[str, Any], allowed: Sequence[str], name: str) -> None:
    unknown = sorted(set(config) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys for scenario '{name}': {unknown}")


def _orbit_matrix(config: Dict[str, Any], seed: Optional[int]) -> ComplexMatrix:
    dim = _int_param(config, "dim", 3)
    if "matrix" in config:
        return matrix_from_json(config["matrix"], dim)
    preset = config.get("preset", "shift")
    if preset == "shift":
        # Te_k = e_{k+1}
        return ComplexMatrix(np.eye(dim, k=-1))
    if preset == "diagonal":
        return ComplexMatrix.diag(np.arange(1, dim + 1, dtype=float))
    if preset == "scalar":
        return ComplexMatrix.identity(dim).scale(float(config.get("lambda", 3.0)))
    if preset == "random":
        rng = np.random.default_rng(0 if seed is None else seed)
        return ComplexMatrix(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    raise ConfigError(f"unknown orbit preset '{preset}'")


def _run_orbit(config: Dict[str, Any], seed: Optional[int]) -> ScenarioResult:
    _check_keys(config, ("dim", "matrix", "preset", "lambda"), "orbit")
    return orbit_dispersion(_orbit_matrix(config, seed))


def _run_compacts(config: Dict[str, Any], seed: Optional[int]) -> ScenarioResult:
    _check_keys(config, ("N", "m_list"), "compacts_scatter")
    m_list = config.get("m_list")
    if m_list is not None and not isinstance(m_list, list):
        raise ConfigError("'m_list' must be a list of integers")
    return compacts_scatter(_int_param(config, "N", 8), m_list)


def _run_a0(config: Dict[str, Any], seed: Optional[int]) -> ScenarioResult:
    _check_keys(config, ("N",), "a0_discrete")
    return a0_discrete(_int_param(config, "N", 3))


def _run_projections(config: Dict[str, Any], seed: Optional[int]) -> ScenarioResult:
    _check_keys(config, ("dim", "subsets"), "projection_separation")
    subsets = config.get("subsets", [[1], [2], [1, 2]])
    if not isinstance(subsets, list) or not all(isinstance(s, list) for s in subsets):
        raise ConfigError("'subsets' must be a list of index lists")
    return projection_separation(_int_param(config, "dim", 4), subsets)


SCENARIOS: Dict[str, Callable[[Dict[str, Any], Optional[int]], ScenarioResult]] = {
    "orbit": _run_orbit,
    "orbit_dispersion": _run_orbit,
    "compacts_scatter": _run_compacts,
    "a0_discrete": _run_a0,
    "projection_separation": _run_projections,
}


def run_scenario(
    name: str,
    config: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> ScenarioResult:
    """
    시나리오 실행 및 산출물 기록

    Args:
        name: 등록된 시나리오 이름
        config: 시나리오 매개변수
        seed: 무작위 preset 용 시드
        out_dir: 지정 시 <out_dir>/<name>/result.json, table.csv 기록

    Raises:
        UnknownScenarioError, ConfigError
    """
    if name not in SCENARIOS:
        raise UnknownScenarioError(f"unknown scenario '{name}' (registered: {sorted(SCENARIOS)})")
    config = {} if config is None else config
    if not isinstance(config, dict):
        raise ConfigError(f"scenario config must be an object, got {type(config).__name__}")
    try:
        result = SCENARIOS[name](config, seed)
    except (TypeError, KeyError) as e:
        raise ConfigError(f"malformed config for '{name}': {e}")

    status = "✅" if result.passed else "❌"
    logger.info(f"{status} {result.name}: measured {result.measured:.12g} vs claimed {result.claimed_bound:.12g}")

    if out_dir:
        target = os.path.join(out_dir, result.name)
        payload = result.to_dict()
        payload["config"] = config
        payload["seed"] = seed
        payload["result_fingerprint"] = fingerprint(result.to_dict())
        result.artifacts.append(write_json_atomic(os.path.join(target, "result.json"), payload))
        if result.table:
            result.artifacts.append(write_csv_atomic(os.path.join(target, "table.csv"), result.table_header, result.table))
    return result
