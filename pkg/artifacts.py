"""
실행 산출물 저장 모듈
JSON / CSV 산출물을 원자적으로(임시 파일 + rename) 기록

핵심 기능:
- schema_version, 생성 시각(KST 기본), sha1 fingerprint 부착
- numpy / complex / dataclass 값의 JSON 변환
"""
import os
import csv
import json
import hashlib
import logging
import tempfile
from dataclasses import asdict, is_dataclass
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pytz

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
DEFAULT_TIMEZONE = "Asia/Seoul"


def now_iso(timezone: Optional[str] = None) -> str:
    """설정된 시간대의 현재 시각 (ISO 8601)"""
    tz = pytz.timezone(timezone or os.getenv("LAB_TIMEZONE", DEFAULT_TIMEZONE))
    return datetime.now(tz).isoformat()


def to_jsonable(value: Any) -> Any:
    """numpy 배열/스칼라, 복소수, dataclass 를 JSON 호환 값으로 변환"""
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def fingerprint(payload: Any) -> str:
    """결정적 payload 의 sha1 (키 정렬 JSON 기준)"""
    raw = json.dumps(to_jsonable(payload), sort_keys=True, ensure_ascii=False)
    return hashlib.sha1(raw.encode("utf-8")).hexdigest()


def _atomic_write(path: str, writer) -> str:
    dir_path = os.path.dirname(os.path.abspath(path))
    os.makedirs(dir_path, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp_", dir=dir_path)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            writer(f)
        os.replace(tmp_path, path)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return path


def write_json_atomic(path: str, payload: Dict[str, Any], timezone: Optional[str] = None) -> str:
    """
    JSON 산출물 기록

    Args:
        path: 대상 경로
        payload: 결정적 내용 (fingerprint 대상)
        timezone: generated_at 시간대
    """
    body = to_jsonable(payload)
    document = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": now_iso(timezone),
        "fingerprint": fingerprint(body),
    }
    document.update(body)
    _atomic_write(path, lambda f: json.dump(document, f, ensure_ascii=False, indent=2))
    logger.debug(f"wrote {path}")
    return path


def write_csv_atomic(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """헤더 포함 UTF-8 CSV 기록"""
    materialized: List[List[Any]] = [list(to_jsonable(list(row))) for row in rows]

    def _write(f):
        writer = csv.writer(f)
        writer.writerow(list(header))
        writer.writerows(materialized)

    _atomic_write(path, _write)
    logger.debug(f"wrote {path} ({len(materialized)} rows)")
    return path


def read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
