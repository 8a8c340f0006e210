"""
설정 관리 시스템
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional

from .error_handler import ConfigError
from .logger import get_logger
from .models import AnalysisConfig, RunConfig


class ConfigManager:
    """설정 관리 클래스"""

    def __init__(self, config_file: Optional[str] = None):
        self.logger = get_logger("ConfigManager")
        self.config_file = Path(config_file) if config_file else None

        self._config: Optional[AnalysisConfig] = None
        self.load_config()

    def load_config(self) -> AnalysisConfig:
        """설정 파일 로드 (파일이 없으면 기본값)"""
        if self.config_file is None:
            self._config = AnalysisConfig()
            self.logger.debug("설정 파일 미지정, 기본 설정 사용")
            return self._config

        if not self.config_file.exists():
            self._config = AnalysisConfig()
            self.logger.warning(f"설정 파일이 없어 기본 설정 사용: {self.config_file}")
            return self._config

        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"설정 파일을 읽을 수 없습니다 ({self.config_file}): {e}")
        if not isinstance(data, dict):
            raise ConfigError("설정 파일 최상위는 JSON 객체여야 합니다")

        unknown = sorted(set(data) - set(AnalysisConfig().to_dict()))
        if unknown:
            self.logger.warning(f"알 수 없는 설정 키 무시: {', '.join(unknown)}")

        self._config = AnalysisConfig.from_dict(data)
        self.logger.info(f"설정 파일 로드 완료: {self.config_file}")
        return self._config

    def save_config(self, path: Optional[str] = None) -> Path:
        """설정 파일 저장"""
        target = Path(path) if path else self.config_file
        if target is None:
            raise ConfigError("저장할 설정 파일 경로가 없습니다")
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8') as f:
            json.dump(self.get_config().to_dict(), f, indent=2, ensure_ascii=False, sort_keys=True)
        self.logger.info(f"설정 파일 저장 완료: {target}")
        return target

    def get_config(self) -> AnalysisConfig:
        """현재 설정 반환"""
        if self._config is None:
            self.load_config()
        return self._config

    def update_config(self, **kwargs) -> AnalysisConfig:
        """설정 업데이트 (None 값과 알 수 없는 키는 무시, 갱신 후 재검증)"""
        data = self.get_config().to_dict()
        for key, value in kwargs.items():
            if value is None:
                continue
            if key not in data:
                self.logger.debug(f"알 수 없는 설정 무시: {key}")
                continue
            data[key] = value
            self.logger.debug(f"설정 업데이트: {key} = {value}")

        self._config = AnalysisConfig.from_dict(data)
        return self._config

    def get_config_summary(self) -> Dict[str, Any]:
        """설정 요약 정보 반환"""
        return {
            'config_file': str(self.config_file) if self.config_file else None,
            'file_exists': bool(self.config_file and self.config_file.exists()),
            'settings': self.get_config().to_dict()
        }

    def write_manifest(self, output_dir: str, run_config: RunConfig) -> Path:
        """실행 설정 전체를 manifest.json으로 기록 (시각 정보 없음)"""
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        manifest = out / "manifest.json"
        with open(manifest, 'w', encoding='utf-8') as f:
            json.dump(run_config.to_dict(), f, indent=2, ensure_ascii=False, sort_keys=True)
            f.write("\n")
        self.logger.debug(f"manifest 기록: {manifest}")
        return manifest
