"""
입출력 스키마 모듈
대수 원소, 표현, 준동형, 거리 공간, 측도, 오목 함수의 JSON 변환

복소 행렬은 행 우선 [re, im] 쌍 목록, 또는 행 목록(실수 또는 [re, im])으로 표기
"""
import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from algebra import AlgebraElement, FdAlgebra, GeneratingSet
from linalg import ComplexMatrix, Unitary, matrix_from_pairs, matrix_to_pairs
from modulus import ConcaveFn
from reps import Homomorphism, Representation
from run_config import ConfigError
from transport import FiniteMetricSpace, Measure

logger = logging.getLogger(__name__)


class SchemaError(ConfigError):
    """입력 문서 스키마 오류"""


def _require(doc: Dict[str, Any], key: str, where: str) -> Any:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where} must be a JSON object")
    if key not in doc:
        raise SchemaError(f"{where} is missing '{key}'")
    return doc[key]


def _complex_entry(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise SchemaError(f"complex entry must be [re, im], got {value}")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


def _is_pair(v: Any) -> bool:
    return isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)


def matrix_from_json(value: Any, dim: int) -> ComplexMatrix:
    """[re, im] 쌍 dim² 개, 또는 dim 개 행 (원소는 실수 또는 [re, im])"""
    try:
        if isinstance(value, list) and len(value) == dim * dim and all(_is_pair(v) for v in value):
            return matrix_from_pairs(value, dim)
        if isinstance(value, list) and len(value) == dim:
            rows = []
            for row in value:
                if not isinstance(row, list) or len(row) != dim:
                    raise SchemaError(f"matrix row must have {dim} entries, got {row}")
                rows.append([_complex_entry(v) for v in row])
            return ComplexMatrix(np.array(rows, dtype=np.complex128))
        if dim == 1 and isinstance(value, (int, float)):
            return ComplexMatrix([[complex(value)]])
    except SchemaError:
        raise
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid matrix literal: {e}")
    raise SchemaError(f"cannot read a {dim}x{dim} matrix from {value!r}")


def algebra_from_json(doc: Any) -> FdAlgebra:
    dims = doc.get("block_dims") if isinstance(doc, dict) else doc
    if not isinstance(dims, list):
        raise SchemaError("algebra must be {'block_dims': [...]} or a list of block dimensions")
    try:
        return FdAlgebra(dims)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid algebra: {e}")


def algebra_to_json(algebra: FdAlgebra) -> Dict[str, Any]:
    return {"block_dims": list(algebra.block_dims)}


def element_from_json(doc: Any, algebra: FdAlgebra) -> AlgebraElement:
    """{'blocks': [...]} 또는 블록 목록"""
    blocks = doc.get("blocks") if isinstance(doc, dict) else doc
    if not isinstance(blocks, list) or len(blocks) != algebra.block_count:
        raise SchemaError(f"element needs {algebra.block_count} blocks")
    try:
        return AlgebraElement(algebra, [matrix_from_json(b, n) for b, n in zip(blocks, algebra.block_dims)])
    except SchemaError:
        raise
    except ValueError as e:
        raise SchemaError(f"invalid element: {e}")


def element_to_json(x: AlgebraElement) -> Dict[str, Any]:
    return {"block_dims": list(x.algebra.block_dims), "blocks": [matrix_to_pairs(b) for b in x.blocks]}


def generating_set_from_json(docs: Any, algebra: FdAlgebra) -> GeneratingSet:
    if not isinstance(docs, list) or not docs:
        raise SchemaError("generating set must be a nonempty list of elements")
    return GeneratingSet(algebra, [element_from_json(d, algebra) for d in docs])


def unitary_from_json(value: Any, dim: int) -> Unitary:
    try:
        return Unitary(matrix_from_json(value, dim))
    except SchemaError:
        raise
    except ValueError as e:
        raise SchemaError(f"invalid unitary: {e}")


def representation_from_json(doc: Any, algebra: FdAlgebra) -> Representation:
    mults = _require(doc, "multiplicities", "representation")
    try:
        ambient = sum(int(m) * n for m, n in zip(mults, algebra.block_dims))
        if "ambient_dim" in doc and int(doc["ambient_dim"]) != ambient:
            raise SchemaError(f"ambient_dim {doc['ambient_dim']} != Σ m_i n_i = {ambient}")
        conjugator = unitary_from_json(doc["conjugator"], ambient) if doc.get("conjugator") is not None else None
        return Representation(algebra, mults, conjugator)
    except SchemaError:
        raise
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid representation: {e}")


def representation_to_json(pi: Representation) -> Dict[str, Any]:
    return {
        "multiplicities": list(pi.multiplicities),
        "ambient_dim": pi.ambient_dim,
        "conjugator": matrix_to_pairs(pi.conjugator.matrix),
    }


def homomorphism_from_json(doc: Any) -> Homomorphism:
    source = algebra_from_json(_require(doc, "source", "homomorphism"))
    target = algebra_from_json(_require(doc, "target", "homomorphism"))
    matrix = _require(doc, "multiplicity_matrix", "homomorphism")
    conjugators = None
    if doc.get("conjugators") is not None:
        conjugators = [unitary_from_json(w, p) for w, p in zip(doc["conjugators"], target.block_dims)]
    try:
        return Homomorphism(source, target, matrix, conjugators)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid homomorphism: {e}")


def homomorphism_to_json(alpha: Homomorphism) -> Dict[str, Any]:
    return {
        "source": list(alpha.source.block_dims),
        "target": list(alpha.target.block_dims),
        "multiplicity_matrix": alpha.multiplicity_matrix.tolist(),
        "conjugators": [matrix_to_pairs(w.matrix) for w in alpha.conjugators],
    }


def space_from_json(doc: Any) -> FiniteMetricSpace:
    """{'points': [...], 'dist': 행 목록 또는 행 우선 평탄 목록} 또는 {'coordinates': [...]}"""
    try:
        if isinstance(doc, dict) and "coordinates" in doc:
            return FiniteMetricSpace.from_coordinates(doc["coordinates"], doc.get("points"))
        points = _require(doc, "points", "space")
        dist = np.asarray(_require(doc, "dist", "space"), dtype=float)
        if dist.ndim == 1:
            dist = dist.reshape(len(points), len(points))
        return FiniteMetricSpace(points, dist)
    except SchemaError:
        raise
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid metric space: {e}")


def space_to_json(space: FiniteMetricSpace) -> Dict[str, Any]:
    return {"points": list(space.points), "dist": space.dist.tolist()}


def measure_from_json(doc: Any, space: FiniteMetricSpace) -> Measure:
    """{'weights': [...]} 또는 {'dirac': label}"""
    try:
        if isinstance(doc, dict) and "dirac" in doc:
            return Measure.dirac(space, doc["dirac"])
        weights = doc.get("weights") if isinstance(doc, dict) else doc
        return Measure(space, weights)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid measure: {e}")


def concave_from_json(doc: Any) -> ConcaveFn:
    points = doc.get("breakpoints") if isinstance(doc, dict) else doc
    try:
        return ConcaveFn(points)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid concave function: {e}")


def concave_to_json(omega: ConcaveFn) -> Dict[str, Any]:
    return {"breakpoints": omega.breakpoints.tolist()}


def load_representation_list(docs: Optional[Sequence[Any]], algebra: FdAlgebra) -> List[Representation]:
    if not isinstance(docs, list) or not docs:
        raise SchemaError("'representations' must be a nonempty list")
    return [representation_from_json(d, algebra) for d in docs]
