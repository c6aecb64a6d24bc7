"""
Configuration Manager for Free Group Lab
Handles loading/saving the resource caps and numeric tolerances.
"""

import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

log = logging.getLogger(__name__)


class Settings(BaseModel):
    """Caps and tolerances shared by the library and the command line"""

    model_config = ConfigDict(extra="ignore", validate_assignment=True)

    enumerate_cap: int = Field(10**7, ge=1)
    fiber_pair_cap: int = Field(10**8, ge=1)
    naive_rotation_cap: int = Field(20_000, ge=1)
    brute_force_budget: int = Field(5_000_000, ge=1)
    cycle_cap: int = Field(10**5, ge=1)
    size_cap: int = Field(10**7, ge=1)
    stochastic_tolerance: float = Field(1e-12, gt=0)
    spectral_tolerance: float = Field(1e-12, gt=0)
    spectral_max_iterations: int = Field(10**6, ge=1)
    malnormal_pair_budget: int = Field(4_000_000, ge=1)
    sample_max_attempts: int = Field(10**6, ge=1)
    default_workers: int = Field(1, ge=1)
    presets_folder: str = ""


DEFAULTS = Settings()


class ConfigManager:
    """Manages the settings file"""

    CONFIG_FILE = "freegroups_config.json"
    ENV_VAR = "FREEGROUPS_CONFIG"

    def __init__(self, config_path: Optional[str] = None):
        """Resolve the settings path and load it immediately"""
        self.config_path = self._resolve_path(config_path)
        self.settings = self.load_config()

    def _get_app_root(self) -> Path:
        """Get application root directory (works for both script and frozen builds)"""
        if getattr(sys, 'frozen', False):
            return Path(sys.executable).parent
        return Path(__file__).parent.parent

    def _resolve_path(self, config_path: Optional[str]) -> Path:
        if config_path:
            return Path(config_path)
        from_env = os.environ.get(self.ENV_VAR, "").strip()
        if from_env:
            return Path(from_env)
        return self._get_app_root() / self.CONFIG_FILE

    def load_config(self) -> Settings:
        """Load settings from disk; missing keys take their defaults"""
        if self.config_path.exists():
            try:
                with open(self.config_path, 'r', encoding='utf-8') as f:
                    raw = json.load(f)
                return Settings.model_validate(raw)
            except (OSError, json.JSONDecodeError, ValidationError) as exc:
                log.warning("ignoring unreadable settings file %s: %s", self.config_path, exc)
        return Settings()

    def save_config(self, settings: Optional[Settings] = None) -> bool:
        """Write settings to disk. Returns True if successful."""
        if settings is not None:
            self.settings = settings
        try:
            self.config_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_path, 'w', encoding='utf-8') as f:
                json.dump(self.settings.model_dump(), f, indent=2)
                f.flush()
                os.fsync(f.fileno())
            return True
        except OSError as exc:
            log.warning("could not write settings file %s: %s", self.config_path, exc)
            return False

    def reload_config(self):
        """Force reload settings from disk"""
        self.settings = self.load_config()

    def get(self, key: str) -> Any:
        return getattr(self.settings, key)

    def set(self, key: str, value: Any) -> bool:
        """Update one setting in memory; invalid values are rejected"""
        if key not in Settings.model_fields:
            return False
        try:
            setattr(self.settings, key, value)
        except ValidationError:
            return False
        return True

    def as_dict(self) -> Dict[str, Any]:
        return self.settings.model_dump()

    def get_presets_folder(self) -> Path:
        """Folder holding custom experiment presets (JSON files)"""
        folder = self.settings.presets_folder.strip()
        if folder:
            return Path(folder)
        return self._get_app_root() / "presets" / "custom"
