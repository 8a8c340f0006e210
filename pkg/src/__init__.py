"""
가보 위상 복원 안정성 분석 도구

스펙트로그램 가중 시간-주파수 격자의 체거 상수를 스펙트럴 클러스터링으로 추정하고,
측정을 안정한 다성분으로 분할하며, 모호 함수 역합성곱으로 신호를 재구성합니다.
"""

__version__ = "1.0.0"
__author__ = "tfstab"

from .models import (AnalysisConfig, FieldKind, GaborField, ReconstructionConfig, Regularization,
                     RunConfig, Signal, SignalKind, TfGrid, WeightField)

__all__ = [
    "AnalysisConfig",
    "FieldKind",
    "GaborField",
    "ReconstructionConfig",
    "Regularization",
    "RunConfig",
    "Signal",
    "SignalKind",
    "TfGrid",
    "WeightField",
]
