"""
실행 설정 모듈
우선순위: CLI 플래그 > JSON 설정 파일 > 환경변수(.env) 기본값
"""
import os
import json
import logging
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)

# 환경변수 기본 키 (LAB_SEED 는 기본값 없음)
DEFAULT_KEYS = {
    "LAB_SEED": "",
    "LAB_OUTPUT_DIR": "lab_output",
    "LAB_TOLERANCE": "1e-9",
    "LAB_SAMPLE_COUNT": "200",
    "LAB_MAX_WORD_LEN": "4",
    "LAB_PERTURBATION_SCALE": "0.5",
    "LAB_TIMEZONE": "Asia/Seoul",
    "LAB_RUN_LOG_FILE": "",
}

# 설정 파일에서 스칼라 필드로 취급하는 키
SCALAR_FIELDS = (
    "seed",
    "output_dir",
    "tolerance",
    "sample_count",
    "max_word_len",
    "perturbation_scale",
    "multiplicities",
    "scenario",
    "timezone",
    "run_log_file",
)

MAX_SEED = 2 ** 64 - 1


class ConfigError(ValueError):
    """설정/사용법 오류 (종료 코드 2)"""


class RunConfig:
    def __init__(self, **kwargs: Any) -> None:
        self.command: str = kwargs.get("command", "")
        self.seed: Optional[int] = kwargs.get("seed")
        self.config_path: Optional[str] = kwargs.get("config_path")
        self.output_dir: str = kwargs.get("output_dir", DEFAULT_KEYS["LAB_OUTPUT_DIR"])
        self.tolerance: float = kwargs.get("tolerance", float(DEFAULT_KEYS["LAB_TOLERANCE"]))
        self.sample_count: int = kwargs.get("sample_count", int(DEFAULT_KEYS["LAB_SAMPLE_COUNT"]))
        self.max_word_len: int = kwargs.get("max_word_len", int(DEFAULT_KEYS["LAB_MAX_WORD_LEN"]))
        self.perturbation_scale: float = kwargs.get("perturbation_scale", float(DEFAULT_KEYS["LAB_PERTURBATION_SCALE"]))
        self.multiplicities: Optional[List[int]] = kwargs.get("multiplicities")
        self.scenario: Optional[str] = kwargs.get("scenario")
        self.timezone: str = kwargs.get("timezone", DEFAULT_KEYS["LAB_TIMEZONE"])
        self.run_log_file: str = kwargs.get("run_log_file", "") or ""
        self.params: Dict[str, Any] = dict(kwargs.get("params") or {})

    def validate(self, require_seed: bool = True) -> "RunConfig":
        if self.seed is None or self.seed == "":
            if require_seed:
                raise ConfigError("seed is required (--seed, config file 'seed', or LAB_SEED)")
            self.seed = None
        else:
            self.seed = _coerce(int, self.seed, "seed")
            if self.seed < 0 or self.seed > MAX_SEED:
                raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        self.tolerance = _coerce(float, self.tolerance, "tolerance")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        self.sample_count = _coerce(int, self.sample_count, "sample_count")
        if self.sample_count < 1:
            raise ConfigError(f"sample_count must be >= 1, got {self.sample_count}")
        self.max_word_len = _coerce(int, self.max_word_len, "max_word_len")
        if self.max_word_len < 1:
            raise ConfigError(f"max_word_len must be >= 1, got {self.max_word_len}")
        self.perturbation_scale = _coerce(float, self.perturbation_scale, "perturbation_scale")
        if self.perturbation_scale < 0:
            raise ConfigError(f"perturbation_scale must be >= 0, got {self.perturbation_scale}")
        if self.multiplicities is not None:
            if not isinstance(self.multiplicities, (list, tuple)):
                raise ConfigError("multiplicities must be a list of integers")
            self.multiplicities = [_coerce(int, m, "multiplicities") for m in self.multiplicities]
        if not self.output_dir:
            raise ConfigError("output_dir must not be empty")
        return self

    @property
    def log_file(self) -> str:
        return self.run_log_file or os.path.join(self.output_dir, "run_logs.json")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "seed": self.seed,
            "config_path": self.config_path,
            "output_dir": self.output_dir,
            "tolerance": self.tolerance,
            "sample_count": self.sample_count,
            "max_word_len": self.max_word_len,
            "perturbation_scale": self.perturbation_scale,
            "multiplicities": self.multiplicities,
            "scenario": self.scenario,
            "timezone": self.timezone,
            "params": self.params,
        }


def _coerce(kind, value: Any, name: str):
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be {kind.__name__}, got boolean")
    try:
        if kind is int and isinstance(value, float):
            if not value.is_integer():
                raise ValueError(value)
            return int(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be {kind.__name__}, got {value!r}")


def _env_defaults() -> Dict[str, Any]:
    return {
        "seed": os.getenv("LAB_SEED", DEFAULT_KEYS["LAB_SEED"]).strip() or None,
        "output_dir": os.getenv("LAB_OUTPUT_DIR", DEFAULT_KEYS["LAB_OUTPUT_DIR"]),
        "tolerance": os.getenv("LAB_TOLERANCE", DEFAULT_KEYS["LAB_TOLERANCE"]),
        "sample_count": os.getenv("LAB_SAMPLE_COUNT", DEFAULT_KEYS["LAB_SAMPLE_COUNT"]),
        "max_word_len": os.getenv("LAB_MAX_WORD_LEN", DEFAULT_KEYS["LAB_MAX_WORD_LEN"]),
        "perturbation_scale": os.getenv("LAB_PERTURBATION_SCALE", DEFAULT_KEYS["LAB_PERTURBATION_SCALE"]),
        "timezone": os.getenv("LAB_TIMEZONE", DEFAULT_KEYS["LAB_TIMEZONE"]),
        "run_log_file": os.getenv("LAB_RUN_LOG_FILE", DEFAULT_KEYS["LAB_RUN_LOG_FILE"]),
    }


def read_config_file(path: str) -> Dict[str, Any]:
    """JSON 설정 파일 로드 (최상위는 객체)"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return data


def load_run_config(
    command: str,
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    require_seed: bool = True,
) -> RunConfig:
    """
    RunConfig 구성 및 검증

    Args:
        command: 실행 명령 (metric, modulus, ...)
        config_path: JSON 설정 파일 경로
        overrides: CLI 플래그 값 (None 은 무시)
        require_seed: False 면 seed 없이 허용 (logs 조회)
    """
    merged: Dict[str, Any] = _env_defaults()
    params: Dict[str, Any] = {}
    if config_path:
        for key, value in read_config_file(config_path).items():
            if key in SCALAR_FIELDS:
                merged[key] = value
            else:
                params[key] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    config = RunConfig(command=command, config_path=config_path, params=params, **merged)
    return config.validate(require_seed)
