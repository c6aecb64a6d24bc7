"""
Core module for Free Group Lab
"""
from .config_manager import ConfigManager, Settings
from .preset_manager import PresetManager
from .odt_report import ODTReportGenerator

__all__ = ['ConfigManager', 'Settings', 'PresetManager', 'ODTReportGenerator']
