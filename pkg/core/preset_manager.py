"""
Preset Manager for Free Group Lab
Manages built-in and custom experiment presets.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from core.config_manager import ConfigManager
from core.experiments import ExperimentConfig

log = logging.getLogger(__name__)

_CTP_GRID = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]


class PresetManager:
    """Manages experiment presets"""

    PRESETS = {
        "ctp_transition": {
            "name": "CTP transition",
            "description": "Central tree property across densities, uniform rank 2, n = 25",
            "config": {
                "name": "ctp_transition",
                "automaton": "uniform:2",
                "n_values": [25],
                "size": {"mode": "density", "values": _CTP_GRID},
                "properties": [{"name": "ctp"}],
                "trials": 100,
                "master_seed": 20240601,
            },
        },
        "cprime_transition": {
            "name": "C'(1/3) transition",
            "description": "Small cancellation on both sides of density 1/6, one length per side",
            "config": {
                "name": "cprime_transition",
                "automaton": "uniform:2",
                "cells": [
                    {"n": 80, "size": {"mode": "density", "value": 0.08}},
                    {"n": 32, "size": {"mode": "density", "value": 0.25}},
                ],
                "word_mode": "cyclically_reduced",
                "properties": [{"name": "cprime", "param": "1/3"}],
                "trials": 50,
                "master_seed": 20240602,
            },
        },
        "degenerate_regime": {
            "name": "Degenerate regime",
            "description": "Abelianization and prefix collisions above density 1/2",
            "config": {
                "name": "degenerate_regime",
                "automaton": "uniform:2",
                "cells": [
                    {"n": 20, "size": {"mode": "density", "value": 0.55}},
                    {"n": 21, "size": {"mode": "density", "value": 0.55}},
                ],
                "properties": [
                    {"name": "abelian_z2"},
                    {"name": "abelian_trivial"},
                    {"name": "degenerate"},
                    {"name": "collision", "param": "const:20"},
                ],
                "trials": 20,
                "master_seed": 20240603,
            },
        },
        "small_central_trees": {
            "name": "Small central trees",
            "description": "Three long words have a short longest common prefix",
            "config": {
                "name": "small_central_trees",
                "automaton": "uniform:2",
                "n_values": [1000],
                "size": {"mode": "fixed", "values": [3]},
                "properties": [{"name": "lcp_below", "param": "const:7"}, {"name": "ctp"}],
                "trials": 200,
                "master_seed": 20240604,
            },
        },
        "malnormal_density": {
            "name": "Malnormality at low density",
            "description": "Exact malnormality against its certificate at small densities",
            "config": {
                "name": "malnormal_density",
                "automaton": "uniform:2",
                "n_values": [12, 16],
                "size": {"mode": "density", "values": [0.02, 0.05, 0.1]},
                "properties": [{"name": "malnormal"}, {"name": "malnormal_certificate"}],
                "trials": 50,
                "master_seed": 20240605,
            },
        },
    }

    @staticmethod
    def _get_custom_presets_folder(folder: Optional[Path] = None) -> Path:
        """Get custom presets folder, creating it when missing"""
        if folder is None:
            folder = ConfigManager().get_presets_folder()
        folder = Path(folder)
        folder.mkdir(parents=True, exist_ok=True)
        return folder

    @staticmethod
    def _validate_preset(preset_data: Dict[str, Any]) -> bool:
        """Validate preset structure"""
        if not isinstance(preset_data, dict):
            return False
        if not all(key in preset_data for key in ("name", "description", "config")):
            return False
        try:
            ExperimentConfig.model_validate(preset_data["config"])
        except ValidationError as exc:
            log.warning("preset %r has an invalid config: %s", preset_data.get("name"), exc)
            return False
        return True

    @staticmethod
    def load_custom_presets(folder: Optional[Path] = None) -> Dict[str, Dict[str, Any]]:
        """Load all custom presets from the presets folder"""
        custom_presets = {}
        custom_folder = PresetManager._get_custom_presets_folder(folder)

        for json_file in sorted(custom_folder.glob("*.json")):
            try:
                with open(json_file, 'r', encoding='utf-8') as f:
                    preset_data = json.load(f)
            except (OSError, json.JSONDecodeError) as exc:
                log.warning("skipping unreadable preset %s: %s", json_file, exc)
                continue
            if PresetManager._validate_preset(preset_data):
                # filename (without extension) is the key
                custom_presets[f"custom-{json_file.stem}"] = preset_data

        return custom_presets

    @staticmethod
    def save_custom_preset(name: str, description: str, config: ExperimentConfig,
                           folder: Optional[Path] = None) -> str:
        """Save a custom preset; returns its key"""
        safe_name = "".join(c if c.isalnum() or c in ('-', '_') else '_' for c in name)
        safe_name = safe_name.lower()[:50]

        custom_folder = PresetManager._get_custom_presets_folder(folder)
        counter = 1
        filename = safe_name
        while (custom_folder / f"{filename}.json").exists():
            filename = f"{safe_name}_{counter}"
            counter += 1

        preset_data = {
            "name": name,
            "description": description,
            "category": "custom",
            "config": config.model_dump(exclude_none=True),
            "created_date": datetime.now().strftime("%Y-%m-%d"),
        }
        with open(custom_folder / f"{filename}.json", 'w', encoding='utf-8') as f:
            json.dump(preset_data, f, indent=2, ensure_ascii=False)

        return f"custom-{filename}"

    @staticmethod
    def delete_custom_preset(preset_key: str, folder: Optional[Path] = None) -> bool:
        """Delete a custom preset by key"""
        if not preset_key.startswith("custom-"):
            return False

        filename = preset_key[len("custom-"):]
        preset_path = PresetManager._get_custom_presets_folder(folder) / f"{filename}.json"
        if not preset_path.exists():
            return False
        try:
            preset_path.unlink()
            return True
        except OSError:
            return False

    @staticmethod
    def get_all_presets(folder: Optional[Path] = None) -> Dict[str, Dict[str, Any]]:
        """Get all available presets (built-in + custom)"""
        all_presets = dict(PresetManager.PRESETS)
        all_presets.update(PresetManager.load_custom_presets(folder))
        return all_presets

    @staticmethod
    def get_preset(preset_key: str, folder: Optional[Path] = None) -> Optional[ExperimentConfig]:
        """Experiment config of a preset (built-in first, then custom)"""
        preset = PresetManager.PRESETS.get(preset_key)
        if preset is None and preset_key.startswith("custom-"):
            preset = PresetManager.load_custom_presets(folder).get(preset_key)
        if preset is None:
            return None
        return ExperimentConfig.model_validate(preset["config"])

    @staticmethod
    def get_preset_names(folder: Optional[Path] = None) -> List[str]:
        return [preset["name"] for preset in PresetManager.get_all_presets(folder).values()]
