"""
실행 로그 관리 모듈
CLI 명령 실행 결과를 저장하고 조회

핵심 기능:
- 메모리 + 파일 기반 로그 저장 (최근 100개)
- 명령별 상태(started / passed / violated / failed), 메시지, 상세 기록
- 요약 통계
"""
import os
import json
import logging
import threading
from collections import deque
from datetime import datetime
from typing import Dict, List, Optional

import pytz

from artifacts import DEFAULT_TIMEZONE, to_jsonable

logger = logging.getLogger(__name__)

MAX_LOG_ENTRIES = 100
STATUS_EMOJI = {"started": "🚀", "passed": "✅", "violated": "❌", "failed": "💥"}


class RunLogManager:
    """실행 로그 관리 클래스 (로그 파일 경로별 1개 인스턴스)"""

    def __init__(self, log_file: str, timezone: Optional[str] = None):
        self.log_file = log_file
        self.tz = pytz.timezone(timezone or os.getenv("LAB_TIMEZONE", DEFAULT_TIMEZONE))
        self.logs = deque(maxlen=MAX_LOG_ENTRIES)
        self._lock = threading.Lock()
        self._load_logs()

    def _load_logs(self):
        """파일에서 로그 로드"""
        try:
            if os.path.exists(self.log_file):
                with open(self.log_file, "r", encoding="utf-8") as f:
                    data = json.load(f)
                for entry in data.get("logs", [])[-MAX_LOG_ENTRIES:]:
                    self.logs.append(entry)
                logger.debug(f"Loaded {len(self.logs)} run logs")
        except Exception as e:
            logger.warning(f"Failed to load run logs: {e}")

    def _save_logs(self):
        """파일에 로그 저장 (임시 파일 후 교체)"""
        try:
            dir_path = os.path.dirname(os.path.abspath(self.log_file))
            os.makedirs(dir_path, exist_ok=True)
            tmp_path = self.log_file + ".tmp"
            with open(tmp_path, "w", encoding="utf-8") as f:
                json.dump(
                    {"updated_at": datetime.now(self.tz).isoformat(), "logs": list(self.logs)},
                    f,
                    ensure_ascii=False,
                    indent=2,
                )
            os.replace(tmp_path, self.log_file)
        except Exception as e:
            logger.warning(f"Failed to save run logs: {e}")

    def add_log(self, command: str, status: str, message: str = "", details: Optional[Dict] = None) -> Dict:
        """
        로그 추가

        Args:
            command: 명령 이름 (예: "gallery")
            status: "started", "passed", "violated", "failed"
            message: 결과 메시지
            details: 추가 상세 정보 (seed, 잔차 등)
        """
        now = datetime.now(self.tz)
        entry = {
            "id": f"{command}_{now.strftime('%Y%m%d_%H%M%S_%f')}",
            "command": command,
            "status": status,
            "message": message,
            "details": to_jsonable(details or {}),
            "timestamp": now.isoformat(),
            "date": now.strftime("%Y-%m-%d"),
        }
        with self._lock:
            self.logs.append(entry)
            self._save_logs()
        logger.info(f"{STATUS_EMOJI.get(status, '📝')} [{command}] {status}: {message}")
        return entry

    def get_logs(self, command: Optional[str] = None, status: Optional[str] = None, limit: int = 50) -> List[Dict]:
        """최신순 로그 조회"""
        results = []
        for entry in reversed(list(self.logs)):
            if command and entry.get("command") != command:
                continue
            if status and entry.get("status") != status:
                continue
            results.append(entry)
            if len(results) >= limit:
                break
        return results

    def get_latest_by_command(self) -> Dict[str, Dict]:
        latest = {}
        for entry in reversed(list(self.logs)):
            command = entry.get("command")
            if command and command not in latest:
                latest[command] = entry
        return latest

    def get_summary(self) -> Dict:
        """로그 요약 통계"""
        counts = {status: 0 for status in STATUS_EMOJI}
        for entry in self.logs:
            status = entry.get("status")
            if status in counts:
                counts[status] += 1
        return {
            "total_logs": len(self.logs),
            "status_counts": counts,
            "latest_by_command": self.get_latest_by_command(),
        }


_managers: Dict[str, RunLogManager] = {}
_managers_lock = threading.Lock()


def get_run_log_manager(log_file: str, timezone: Optional[str] = None) -> RunLogManager:
    """로그 파일 경로별 인스턴스 반환"""
    key = os.path.abspath(log_file)
    with _managers_lock:
        if key not in _managers:
            _managers[key] = RunLogManager(log_file, timezone)
        return _managers[key]


def log_run_event(
    log_file: str,
    command: str,
    status: str,
    message: str = "",
    details: Optional[Dict] = None,
    timezone: Optional[str] = None,
) -> Dict:
    """실행 이벤트 로깅 (외부 호출용)"""
    return get_run_log_manager(log_file, timezone).add_log(command, status, message, details)
