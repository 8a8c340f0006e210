#!/usr/bin/env python3
"""
가보 위상 복원 안정성 분석 도구 (tfstab)

스펙트로그램 가중 시간-주파수 격자의 체거 상수 추정, 다성분 분할,
불안정성 실험, 스펙트로그램 재구성을 하위 명령으로 제공합니다.
"""
import sys
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

# 프로젝트 루트를 Python 경로에 추가
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src import __version__
from src.app import StabilityApp
from src.config_manager import ConfigManager
from src.error_handler import TfStabError, install_global_exception_handler, uninstall_global_exception_handler
from src.logger import get_logger
from src.models import RunConfig, SignalKind

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"쉼표로 구분된 실수 목록이 아닙니다: {text}")


def _add_signal_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("입력 신호")
    group.add_argument('--in', dest='input_path', type=str, help='입력 파일 (.wav, .csv, .txt, 필드는 .tfc)')
    group.add_argument('--synth', choices=[k.value for k in SignalKind], help='합성 신호 종류')
    group.add_argument('--a', type=float, default=0.0, help='이동량 a')
    group.add_argument('--b', type=float, default=0.0, help='변조 주파수 b')
    group.add_argument('--n', type=int, help='합성 신호 샘플 수')
    group.add_argument('--dt', type=float, help='합성 신호 샘플 간격')
    group.add_argument('--normalize', action='store_true', help='최대 진폭 1로 정규화')


def build_parser() -> argparse.ArgumentParser:
    """명령행 파서 구성"""
    parser = argparse.ArgumentParser(
        prog="tfstab",
        description="가보 위상 복원 안정성 분석 도구",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
사용 예시:
  python main.py transform --synth gaussian --n 512 --dt 0.0625 -o out/
  python main.py cheeger --in out/field.tfc --p 1 -o out/cheeger
  python main.py sweep --a-list 1,1.5,2,2.5,3 --p 1 --q inf -o out/sweep
        """
    )
    parser.add_argument('--version', action='version', version=f'tfstab v{__version__}')
    parser.add_argument('--config', type=str, help='설정 JSON 파일')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'])
    parser.add_argument('--workers', type=int, help='병렬 작업 수')
    parser.add_argument('--seed', type=int, help='난수 시드')
    parser.add_argument('-o', '--output-dir', type=str, default='out', help='출력 디렉토리 (기본값: out)')

    sub = parser.add_subparsers(dest='subcommand', required=True)

    p = sub.add_parser('transform', help='신호 → 가보 필드 파일 + SVG')
    _add_signal_arguments(p)
    p.add_argument('--kind', choices=['gabor', 'ambiguity', 'window-derivative'], default='gabor')
    p.add_argument('--csv', action='store_true', help='필드를 CSV로도 기록')

    p = sub.add_parser('cheeger', help='체거 상수 추정')
    _add_signal_arguments(p)
    p.add_argument('--p', type=float)
    p.add_argument('--radius', type=float, help='원판 B_R(0)으로 제한')
    p.add_argument('--export-graph', dest='export_graph_files', action='store_true', help='간선 목록 기록')

    p = sub.add_parser('partition', help='다성분 재귀 분할')
    _add_signal_arguments(p)
    p.add_argument('--p', type=float)
    p.add_argument('--tau', type=float, help='분할 임계값 (보정 단위)')
    p.add_argument('--radius', type=float, help='원판 B_R(0)으로 제한')

    p = sub.add_parser('stability', help='두 신호 비교')
    p.add_argument('--f', dest='f_path', type=str, help='첫 번째 신호 파일')
    p.add_argument('--g', dest='g_path', type=str, help='두 번째 신호 파일')
    p.add_argument('--a', type=float, default=2.0, help='파일이 없을 때 두 가우시안 간격')
    p.add_argument('--p', type=float)
    p.add_argument('--q', type=float)
    p.add_argument('--s', type=float, default=6.0)

    p = sub.add_parser('sweep', help='두 가우시안 불안정성 실험')
    p.add_argument('--a-list', type=_float_list, default=[1.0, 1.5, 2.0, 2.5, 3.0])
    p.add_argument('--p', type=float)
    p.add_argument('--q', type=float)
    p.add_argument('--s', type=float, default=6.0)

    p = sub.add_parser('reconstruct', help='스펙트로그램 → 신호')
    _add_signal_arguments(p)
    p.add_argument('--delta', type=float, default=0.0625, help='자기 쌍대 격자 간격 (합성 입력)')
    p.add_argument('--noise', type=float, default=0.0, help='스펙트로그램 잡음 수준')
    p.add_argument('--regularization', choices=['threshold', 'tikhonov'])
    p.add_argument('--tau-reg', type=float)
    p.add_argument('--reference', dest='reference_path', type=str, help='오차 계산용 기준 신호')

    p = sub.add_parser('diagnose', help='진단 보고')
    _add_signal_arguments(p)
    p.add_argument('--radius', type=float, help='원판 반지름 R')
    p.add_argument('--r', type=float, help='로그 도함수 노름 지수')

    return parser


GLOBAL_KEYS = {'config', 'log_level', 'workers', 'seed', 'output_dir', 'subcommand'}


def build_run_config(args: argparse.Namespace) -> Tuple[RunConfig, ConfigManager]:
    """기본값 < --config 파일 < 명시적 플래그 순으로 설정 병합"""
    config_manager = ConfigManager(args.config)
    config_manager.update_config(log_level=args.log_level, workers=args.workers, seed=args.seed)
    options: Dict[str, Any] = {k: v for k, v in vars(args).items() if k not in GLOBAL_KEYS}
    return RunConfig(args.subcommand, options, config_manager.get_config(), args.output_dir), config_manager


def main(argv: Optional[List[str]] = None) -> int:
    """메인 함수"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    def crash_handler(exc_type, exc_value, exc_traceback):
        print(f"error: internal: {exc_type.__name__}: {exc_value}", file=sys.stderr)

    install_global_exception_handler(crash_handler)
    logger = get_logger("main")
    try:
        run_config, config_manager = build_run_config(args)
        app = StabilityApp(config_manager)
        app.run(run_config)
        return EXIT_OK

    except TfStabError as e:
        logger.debug(f"계산 오류: {e.error_code}: {e.message}")
        print(f"error: {e.error_code}: {e.message}", file=sys.stderr)
        return EXIT_FAILURE

    except KeyboardInterrupt:
        logger.info("사용자에 의해 중단됨 (Ctrl+C)")
        return EXIT_FAILURE

    except Exception as e:
        logger.error(f"예상치 못한 오류 발생: {str(e)}", exc_info=True)
        print(f"error: internal: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE

    finally:
        uninstall_global_exception_handler()


if __name__ == "__main__":
    sys.exit(main())
