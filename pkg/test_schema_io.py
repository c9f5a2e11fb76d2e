"""
입출력 스키마 테스트
행렬/대수/원소/표현/준동형/거리 공간/측도/오목 함수 JSON 변환과 스키마 오류
"""
import numpy as np
import pytest

from algebra import FdAlgebra
from linalg import haar_unitary
from reps import Representation, eval_rep, random_homomorphism
from run_config import ConfigError
from schema_io import (
    SchemaError,
    algebra_from_json,
    algebra_to_json,
    concave_from_json,
    concave_to_json,
    element_from_json,
    element_to_json,
    generating_set_from_json,
    homomorphism_from_json,
    homomorphism_to_json,
    load_representation_list,
    matrix_from_json,
    measure_from_json,
    representation_from_json,
    representation_to_json,
    space_from_json,
    space_to_json,
)


def test_matrix_literals():
    rows = matrix_from_json([[1, [0, 1]], [0, 2]], 2)
    assert np.array_equal(rows.entries, np.array([[1, 1j], [0, 2]]))
    pairs = matrix_from_json([[1, 0], [0, 1], [0, 0], [2, 0]], 2)
    assert np.array_equal(pairs.entries, rows.entries)
    assert matrix_from_json(3.5, 1).entries[0, 0] == 3.5
    with pytest.raises(SchemaError):
        matrix_from_json([[1, 2, 3]], 2)
    with pytest.raises(SchemaError):
        matrix_from_json([[1, [0, 1, 2]], [0, 2]], 2)
    assert issubclass(SchemaError, ConfigError)


def test_algebra_and_elements():
    algebra = algebra_from_json({"block_dims": [1, 2]})
    assert algebra == algebra_from_json([1, 2])
    assert algebra_to_json(algebra) == {"block_dims": [1, 2]}
    with pytest.raises(SchemaError):
        algebra_from_json({"block_dims": [0]})
    with pytest.raises(SchemaError):
        algebra_from_json("M2")

    x = algebra.random_element(np.random.default_rng(0))
    doc = element_to_json(x)
    assert doc["block_dims"] == [1, 2]
    assert element_from_json(doc, algebra).is_close(x, 0.0)
    with pytest.raises(SchemaError):
        element_from_json({"blocks": [[[1]]]}, algebra)
    K = generating_set_from_json([doc, {"blocks": [5, [[1, 0], [0, -1]]]}], algebra)
    assert len(K) == 2
    with pytest.raises(SchemaError):
        generating_set_from_json([], algebra)


def test_representations():
    algebra = FdAlgebra([1, 2])
    pi = Representation(algebra, [1, 1], haar_unitary(3, 4))
    doc = representation_to_json(pi)
    assert doc["ambient_dim"] == 3
    loaded = representation_from_json(doc, algebra)
    x = algebra.random_element(np.random.default_rng(1))
    assert eval_rep(loaded, x).is_close(eval_rep(pi, x), 1e-12)

    canonical = representation_from_json({"multiplicities": [2, 0]}, algebra)
    assert canonical.ambient_dim == 2
    with pytest.raises(SchemaError):
        representation_from_json({"multiplicities": [1, 1], "ambient_dim": 4}, algebra)
    with pytest.raises(SchemaError):
        representation_from_json({"multiplicities": [1, 1], "conjugator": [[2, 0, 0], [0, 1, 0], [0, 0, 1]]}, algebra)
    with pytest.raises(SchemaError):
        representation_from_json({"conjugator": None}, algebra)
    with pytest.raises(SchemaError):
        load_representation_list([], algebra)


def test_homomorphisms():
    alpha = random_homomorphism(FdAlgebra([1, 2]), [[1, 1], [0, 2]], seed=6)
    loaded = homomorphism_from_json(homomorphism_to_json(alpha))
    assert loaded.target.block_dims == (3, 4)
    x = alpha.source.random_element(np.random.default_rng(2))
    assert loaded(x).is_close(alpha(x), 1e-12)

    plain = homomorphism_from_json({"source": [2], "target": [4], "multiplicity_matrix": [[2]]})
    assert plain.conjugators[0].dim == 4
    with pytest.raises(SchemaError):
        homomorphism_from_json({"source": [2], "target": [3], "multiplicity_matrix": [[1]]})
    with pytest.raises(SchemaError):
        homomorphism_from_json({"source": [2], "target": [4]})


def test_spaces_measures_and_concave_functions():
    space = space_from_json({"points": ["a", "b"], "dist": [0, 1, 1, 0]})
    assert space_to_json(space) == {"points": ["a", "b"], "dist": [[0.0, 1.0], [1.0, 0.0]]}
    line = space_from_json({"coordinates": [0.0, 1.0, 3.0]})
    assert line.points == ("x0", "x1", "x2")
    assert line.dist[0, 2] == 3.0
    with pytest.raises(SchemaError):
        space_from_json({"points": ["a", "b"], "dist": [[0, 1], [2, 0]]})
    with pytest.raises(SchemaError):
        space_from_json({"dist": [[0]]})

    assert measure_from_json({"dirac": "b"}, space).weights.tolist() == [0.0, 1.0]
    assert measure_from_json([0.25, 0.75], space).weights.tolist() == [0.25, 0.75]
    with pytest.raises(SchemaError):
        measure_from_json({"dirac": "z"}, space)
    with pytest.raises(SchemaError):
        measure_from_json({"weights": [0.5, 0.6]}, space)

    omega = concave_from_json({"breakpoints": [[0, 0], [1, 2], [3, 3]]})
    assert concave_to_json(omega) == {"breakpoints": [[0.0, 0.0], [1.0, 2.0], [3.0, 3.0]]}
    with pytest.raises(SchemaError):
        concave_from_json([[0, 0], [1, 1], [2, 3]])


if __name__ == "__main__":
    print("=" * 50)
    print("입출력 스키마 테스트")
    print("=" * 50)
    for name, func in list(globals().items()):
        if name.startswith("test_") and callable(func):
            func()
            print(f"✅ {name}")
    print("\n🎉 모든 테스트 완료!")
