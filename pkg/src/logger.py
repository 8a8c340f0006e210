"""
로깅 유틸리티

콘솔 로깅을 기본으로 하고, 실행 결과 디렉토리에 대한 파일 로깅을 선택적으로 제공합니다.
"""
import logging
import logging.handlers
import platform
import sys
from pathlib import Path
from typing import Optional


class LoggerManager:
    """로깅 관리 클래스"""

    def __init__(self, app_name: str = "tfstab", level: str = "INFO"):
        self.app_name = app_name
        self.log_dir: Optional[Path] = None
        self.logger = None

        # 로거 초기화
        self._setup_logger(level)

    def _setup_logger(self, level: str) -> None:
        """로거 설정 및 초기화"""
        self.logger = logging.getLogger(self.app_name)
        self.logger.setLevel(logging.DEBUG)

        # 기존 핸들러 제거 (중복 방지)
        for handler in self.logger.handlers[:]:
            self.logger.removeHandler(handler)

        console_handler = logging.StreamHandler()
        console_handler.setLevel(getattr(logging, level.upper(), logging.INFO))
        console_handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))
        self.logger.addHandler(console_handler)

        # 로거 전파 방지 (중복 로그 방지)
        self.logger.propagate = False

    def enable_file_logging(self, log_dir: str) -> None:
        """파일 핸들러 추가 (일별 로테이션 + 오류 전용 파일)"""
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)

        for handler in self.logger.handlers[:]:
            if isinstance(handler, logging.FileHandler):
                self.logger.removeHandler(handler)
                handler.close()

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        file_handler = logging.handlers.TimedRotatingFileHandler(
            self.log_dir / f"{self.app_name}.log",
            when='midnight',
            interval=1,
            backupCount=30,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)

        error_handler = logging.handlers.TimedRotatingFileHandler(
            self.log_dir / f"{self.app_name}_error.log",
            when='midnight',
            interval=1,
            backupCount=30,
            encoding='utf-8'
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(formatter)

        self.logger.addHandler(file_handler)
        self.logger.addHandler(error_handler)

    def close_file_logging(self) -> None:
        """파일 핸들러 해제"""
        for handler in self.logger.handlers[:]:
            if isinstance(handler, logging.FileHandler):
                self.logger.removeHandler(handler)
                handler.close()

    def set_log_level(self, level: str) -> None:
        """로그 레벨 설정"""
        level_map = {
            'DEBUG': logging.DEBUG,
            'INFO': logging.INFO,
            'WARNING': logging.WARNING,
            'ERROR': logging.ERROR,
            'CRITICAL': logging.CRITICAL
        }

        if level.upper() in level_map:
            # 콘솔 핸들러의 레벨만 조정 (파일은 항상 DEBUG)
            for handler in self.logger.handlers:
                if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
                    handler.setLevel(level_map[level.upper()])
        else:
            self.logger.warning(f"알 수 없는 로그 레벨: {level}")

    def get_logger(self, name: Optional[str] = None) -> logging.Logger:
        """로거 인스턴스 반환"""
        if name:
            return logging.getLogger(f"{self.app_name}.{name}")
        return self.logger

    def log_system_info(self) -> None:
        """실행 환경 정보 로깅"""
        import numpy
        import scipy

        self.logger.info("=== 실행 환경 ===")
        self.logger.info(f"운영체제: {platform.system()} {platform.release()}")
        self.logger.info(f"Python 버전: {sys.version.split()[0]}")
        self.logger.info(f"numpy {numpy.__version__}, scipy {scipy.__version__}")
        self.logger.info("================")


# 전역 로거 인스턴스
_logger_manager: Optional[LoggerManager] = None


def get_logger_manager() -> LoggerManager:
    """전역 로거 매니저 인스턴스 반환"""
    global _logger_manager
    if _logger_manager is None:
        _logger_manager = LoggerManager()
    return _logger_manager


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """로거 인스턴스 반환 (편의 함수)"""
    return get_logger_manager().get_logger(name)
