"""
예외 계층 및 전역 예외 처리
"""
import sys
import threading
import traceback
from typing import Callable, Optional

from .logger import get_logger


class TfStabError(Exception):
    """라이브러리 공통 예외 (error_code는 CLI가 출력하는 기계용 코드)"""

    error_code = "tfstab"

    def __init__(self, message: str, error_code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        if error_code is not None:
            self.error_code = error_code

    def __str__(self) -> str:
        return self.message


class SignalFormatError(TfStabError, ValueError):
    error_code = "signal_format"


class GridError(TfStabError, ValueError):
    error_code = "grid"


class FieldKindError(TfStabError, ValueError):
    error_code = "field_kind"


class DegenerateFieldError(TfStabError, ValueError):
    error_code = "degenerate_field"


class DegenerateGraphError(TfStabError, ValueError):
    error_code = "degenerate_graph"


class InvalidCutError(TfStabError, ValueError):
    error_code = "invalid_cut"


class EigenSolverError(TfStabError, ArithmeticError):
    """고유값 풀이 실패 (마지막 잔차와 연산자 적용 횟수 포함)"""

    error_code = "eigensolver"

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PartitionIntegrityError(TfStabError, AssertionError):
    error_code = "partition"


class ReconstructionError(TfStabError, ArithmeticError):
    error_code = "reconstruction"


class ConfigError(TfStabError, ValueError):
    error_code = "config"


class SerializationError(TfStabError, ValueError):
    error_code = "serialization"


class GlobalExceptionHandler:
    """전역 예외 처리 클래스"""

    def __init__(self):
        self.logger = get_logger("GlobalExceptionHandler")
        self._original_excepthook = sys.excepthook
        self._original_thread_excepthook = threading.excepthook
        self._crash_callback: Optional[Callable] = None

    def install(self) -> None:
        """전역 예외 처리기 설치"""
        sys.excepthook = self._handle_exception
        threading.excepthook = self._handle_thread_exception
        self.logger.debug("전역 예외 처리기 설치 완료")

    def uninstall(self) -> None:
        """전역 예외 처리기 제거"""
        sys.excepthook = self._original_excepthook
        threading.excepthook = self._original_thread_excepthook
        self.logger.debug("전역 예외 처리기 제거 완료")

    def set_crash_callback(self, callback: Callable) -> None:
        """크래시 발생 시 호출할 콜백 설정"""
        self._crash_callback = callback

    def _handle_exception(self, exc_type, exc_value, exc_traceback) -> None:
        """메인 스레드 예외 처리"""
        if issubclass(exc_type, KeyboardInterrupt):
            self.logger.info("키보드 인터럽트로 종료")
            sys.__excepthook__(exc_type, exc_value, exc_traceback)
            return

        self.logger.critical(f"치명적 오류 발생: {exc_type.__name__}: {exc_value}")
        for line in traceback.format_exception(exc_type, exc_value, exc_traceback):
            self.logger.debug(line.rstrip())

        if self._crash_callback:
            try:
                self._crash_callback(exc_type, exc_value, exc_traceback)
            except Exception as e:
                self.logger.error(f"크래시 콜백 실행 중 오류: {str(e)}")

        self._original_excepthook(exc_type, exc_value, exc_traceback)

    def _handle_thread_exception(self, args) -> None:
        """작업 스레드 예외 처리"""
        thread_name = args.thread.name if args.thread is not None else "?"
        self.logger.error(
            f"스레드 '{thread_name}'에서 예외 발생: {args.exc_type.__name__}: {args.exc_value}",
            exc_info=(args.exc_type, args.exc_value, args.exc_traceback)
        )


# 전역 인스턴스
_global_exception_handler: Optional[GlobalExceptionHandler] = None


def get_exception_handler() -> GlobalExceptionHandler:
    """전역 예외 처리기 인스턴스 반환"""
    global _global_exception_handler
    if _global_exception_handler is None:
        _global_exception_handler = GlobalExceptionHandler()
    return _global_exception_handler


def install_global_exception_handler(crash_callback: Callable = None) -> None:
    """전역 예외 처리기 설치 (편의 함수)"""
    handler = get_exception_handler()
    if crash_callback:
        handler.set_crash_callback(crash_callback)
    handler.install()


def uninstall_global_exception_handler() -> None:
    """전역 예외 처리기 제거 (편의 함수)"""
    get_exception_handler().uninstall()
