"""
CLI / 설정 / 산출물 / 실행 로그 테스트
종료 코드(0 통과, 1 위반, 2 설정 오류, 3 수치 실패), 설정 우선순위, fingerprint
"""
import os
import csv
import json
import tempfile
from contextlib import contextmanager

import pytest

import app
from app import EXIT_CONFIG, EXIT_PASS, EXIT_VIOLATED, main
from artifacts import fingerprint, read_json, to_jsonable, write_json_atomic
from modulus import EmpiricalModulus, concave_majorant
from run_config import ConfigError, load_run_config
from run_logs import RunLogManager


@contextmanager
def _env(**values):
    """환경변수 임시 설정 (None 이면 제거)"""
    saved = {key: os.environ.get(key) for key in values}
    try:
        for key, value in values.items():
            if value is None:
                os.environ.pop(key, None)
            else:
                os.environ[key] = value
        yield
    finally:
        for key, value in saved.items():
            if value is None:
                os.environ.pop(key, None)
            else:
                os.environ[key] = value


def _write_config(directory: str, payload) -> str:
    path = os.path.join(directory, "config.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)
    return path


def test_gallery_command_writes_result():
    with tempfile.TemporaryDirectory() as out:
        code = main(["gallery", "--seed", "1", "--out", out, "--scenario", "a0_discrete"])
        assert code == EXIT_PASS
        document = read_json(os.path.join(out, "gallery", "a0_discrete", "result.json"))
        assert document["verdict"] == "pass"
        assert document["seed"] == 1


def test_usage_errors_exit_with_config_code():
    with tempfile.TemporaryDirectory() as out, _env(LAB_SEED=None):
        assert main(["metric", "--out", out]) == EXIT_CONFIG
        assert main(["gallery", "--seed", "1", "--out", out, "--scenario", "nope"]) == EXIT_CONFIG
        assert main(["gallery", "--seed", "1", "--out", out]) == EXIT_CONFIG
        assert main(["no_such_command"]) == EXIT_CONFIG
        assert main(["metric", "--seed", "1", "--out", out, "--config", os.path.join(out, "missing.json")]) == EXIT_CONFIG

        broken = os.path.join(out, "broken.json")
        with open(broken, "w", encoding="utf-8") as f:
            f.write("{not json")
        assert main(["metric", "--seed", "1", "--out", out, "--config", broken]) == EXIT_CONFIG

        bad_space = _write_config(out, {"space": {"points": ["a", "b"], "dist": [[0, 1], [2, 0]]}})
        assert main(["metric", "--seed", "1", "--out", out, "--config", bad_space]) == EXIT_CONFIG


def test_metric_a0_preset():
    with tempfile.TemporaryDirectory() as out:
        config = _write_config(out, {"preset": "a0_discrete", "N": 3})
        assert main(["metric", "--seed", "5", "--out", out, "--config", config]) == EXIT_PASS
        with open(os.path.join(out, "metric", "distances.csv"), encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["rep", "rho_1", "rho_2", "rho_3"]
        for i, row in enumerate(rows[1:]):
            for j, value in enumerate(row[1:]):
                expected = 0.0 if i == j else 2.0
                assert float(value) == pytest.approx(expected, abs=1e-9)


def test_metric_on_point_representations():
    with tempfile.TemporaryDirectory() as out:
        space = {"points": ["a", "b", "c"], "dist": [[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]]}
        config = _write_config(out, {"space": space})
        assert main(["metric", "--seed", "5", "--out", out, "--config", config]) == EXIT_PASS
        report = read_json(os.path.join(out, "metric", "metric.json"))
        assert report["isometry_residual"] <= 1e-10
        assert report["labels"] == ["a", "b", "c"]
        assert report["diagonal_residual"] == 0.0


def test_transport_and_modulus_commands():
    with tempfile.TemporaryDirectory() as out:
        assert main(["transport", "--seed", "7", "--out", out]) == EXIT_PASS
        report = read_json(os.path.join(out, "transport", "transport.json"))
        assert report["max_duality_gap"] <= 1e-9
        assert report["measures"] == 8

        assert main(["modulus", "--seed", "7", "--out", out, "--samples", "60"]) == EXIT_PASS
        report = read_json(os.path.join(out, "modulus", "modulus_report.json"))
        assert report["sample_count"] == 60
        assert os.path.exists(os.path.join(out, "modulus", "modulus_0.csv"))
        assert os.path.exists(os.path.join(out, "modulus", "modulus_1.csv"))
        with open(os.path.join(out, "modulus", "modulus_0.csv"), encoding="utf-8") as f:
            assert next(csv.reader(f)) == ["t", "step_value", "hull_value"]


def test_modulus_command_with_homomorphism():
    with tempfile.TemporaryDirectory() as out:
        config = _write_config(out, {
            "algebra": [1, 2],
            "homomorphism": {"source": [1, 2], "target": [3, 4], "multiplicity_matrix": [[1, 1], [0, 2]]},
        })
        assert main(["modulus", "--seed", "9", "--out", out, "--samples", "40", "--config", config]) == EXIT_PASS
        report = read_json(os.path.join(out, "modulus", "modulus_report.json"))
        assert report["morphism"]["image_contained"]
        assert report["morphism"]["isometry_residual"] <= 1e-10
        assert report["morphism"]["element_bound_residual"] <= 1e-9
        assert report["algebra"] == {"block_dims": [1, 2]}

        mismatched = _write_config(out, {
            "algebra": [2, 3],
            "homomorphism": {"source": [1, 2], "target": [3, 4], "multiplicity_matrix": [[1, 1], [0, 2]]},
        })
        assert main(["modulus", "--seed", "9", "--out", out, "--samples", "10", "--config", mismatched]) == EXIT_CONFIG


def test_missing_modulus_is_reported_as_violation():
    def _unseparated(config, out_dir):
        concave_majorant(EmpiricalModulus([(0.0, 1.0), (1.0, 0.5)]))
        return True, {}

    original = app.COMMANDS["modulus"]
    app.COMMANDS["modulus"] = _unseparated
    try:
        with tempfile.TemporaryDirectory() as out:
            assert main(["modulus", "--seed", "1", "--out", out]) == EXIT_VIOLATED
            manager = RunLogManager(os.path.join(out, "run_logs.json"))
            assert manager.get_logs(command="modulus")[0]["status"] == "violated"
    finally:
        app.COMMANDS["modulus"] = original


def test_duality_command():
    with tempfile.TemporaryDirectory() as out:
        assert main(["duality", "--seed", "3", "--out", out, "--samples", "30"]) == EXIT_PASS
        report = read_json(os.path.join(out, "duality", "duality.json"))
        assert report["roundtrip_residual"] <= 1e-9
        assert report["sandwich"]["passed"]
        for name in ("delta.csv", "reconstruction.csv", "regularization.csv"):
            assert os.path.exists(os.path.join(out, "duality", name))


def test_logs_command_reads_run_history():
    with tempfile.TemporaryDirectory() as out, _env(LAB_SEED=None):
        assert main(["gallery", "--seed", "2", "--out", out, "--scenario", "projection_separation"]) == EXIT_PASS
        assert main(["logs", "--out", out]) == EXIT_PASS
        manager = RunLogManager(os.path.join(out, "run_logs.json"))
        statuses = [entry["status"] for entry in manager.get_logs(command="gallery")]
        assert statuses == ["passed", "started"]
        summary = manager.get_summary()
        assert summary["status_counts"]["passed"] == 1
        assert summary["latest_by_command"]["gallery"]["status"] == "passed"


def test_config_precedence():
    with tempfile.TemporaryDirectory() as out, _env(LAB_SEED="11", LAB_TOLERANCE="1e-6", LAB_OUTPUT_DIR=out):
        assert load_run_config("metric").tolerance == 1e-6
        assert load_run_config("metric").seed == 11

        path = _write_config(out, {"tolerance": 1e-7, "seed": 12, "preset": "a0_discrete"})
        from_file = load_run_config("metric", path)
        assert from_file.tolerance == 1e-7
        assert from_file.seed == 12
        assert from_file.params == {"preset": "a0_discrete"}

        flagged = load_run_config("metric", path, {"tolerance": 1e-8, "seed": None})
        assert flagged.tolerance == 1e-8
        assert flagged.seed == 12


def test_config_validation():
    with _env(LAB_SEED=None):
        with pytest.raises(ConfigError):
            load_run_config("metric")
        assert load_run_config("logs", require_seed=False).seed is None
        with pytest.raises(ConfigError):
            load_run_config("metric", overrides={"seed": -1})
        with pytest.raises(ConfigError):
            load_run_config("metric", overrides={"seed": 1, "sample_count": 0})
        with pytest.raises(ConfigError):
            load_run_config("metric", overrides={"seed": 1, "tolerance": "abc"})


def test_artifact_fingerprint():
    payload = {"value": 1.5, "z": complex(1, -2), "nested": [1, 2]}
    assert to_jsonable(payload)["z"] == [1.0, -2.0]
    assert fingerprint(payload) == fingerprint(dict(reversed(list(payload.items()))))
    with tempfile.TemporaryDirectory() as out:
        first = read_json(write_json_atomic(os.path.join(out, "a.json"), payload, "UTC"))
        second = read_json(write_json_atomic(os.path.join(out, "b.json"), payload, "Asia/Seoul"))
        assert first["fingerprint"] == second["fingerprint"] == fingerprint(payload)
        assert first["schema_version"] == "1.0"
        assert [name for name in os.listdir(out) if name.startswith(".tmp_")] == []


if __name__ == "__main__":
    print("=" * 50)
    print("CLI / 설정 / 산출물 테스트")
    print("=" * 50)
    for name, func in list(globals().items()):
        if name.startswith("test_") and callable(func):
            func()
            print(f"✅ {name}")
    print("\n🎉 모든 테스트 완료!")
