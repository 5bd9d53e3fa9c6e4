#!/usr/bin/env python3
"""
Configuration Loader Module
Loads simulator and training settings from the JSON files under config/
"""

import json
import logging
import os
from typing import Dict, Optional

from .errors import ConfigError

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

SIM_CONFIG_FILE = "sim_config.json"
TRAIN_CONFIG_FILE = "train_config.json"


class ConfigurationLoader:
    """
    Loads and caches:
    - sim_config.json: simulator parameters and corpus size
    - train_config.json: training hyperparameters and model defaults

    A missing file means defaults; a present file must hold only known keys.
    """

    def __init__(self, config_dir: str = "config"):
        """
        Args:
            config_dir: Directory containing the JSON files
        """
        self.config_dir = config_dir
        self._sim_config = None
        self._train_config = None

    def load_all(self):
        """Load both configuration files"""
        logger.info(f"Loading configuration from {self.config_dir}...")
        self.sim_config()
        self.train_config()
        logger.info("✅ Configuration loaded successfully")

    def _read_json(self, file_name: str) -> Dict:
        file_path = os.path.join(self.config_dir, file_name)
        if not os.path.exists(file_path):
            logger.warning(f"⚠️ {file_path} not found, using defaults")
            return {}
        try:
            with open(file_path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"❌ Failed to load {file_path}: {e}")
            raise ConfigError(f"Cannot read {file_path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{file_path} must hold a JSON object")
        # keys starting with '_' are comments
        return {k: v for k, v in data.items() if not k.startswith("_")}

    def sim_config(self, path: Optional[str] = None):
        """SimConfig from `path`, or from config_dir/sim_config.json (cached)"""
        from ..simulation.sim_config import SimConfig

        if path is not None:
            return SimConfig.from_dict(self._read_file(path))
        if self._sim_config is None:
            self._sim_config = SimConfig.from_dict(self._read_json(SIM_CONFIG_FILE))
            logger.info(f"✅ Simulator config: seed {self._sim_config.seed}, {self._sim_config.corpus_slip_frames} slip frames")
        return self._sim_config

    def train_config(self, path: Optional[str] = None):
        """TrainConfig from `path`, or from config_dir/train_config.json (cached)"""
        from ..harness.train_config import TrainConfig

        if path is not None:
            return TrainConfig.from_dict(self._read_file(path))
        if self._train_config is None:
            self._train_config = TrainConfig.from_dict(self._read_json(TRAIN_CONFIG_FILE))
            logger.info(f"✅ Training config: {self._train_config.model_kind}, {self._train_config.epochs} epochs")
        return self._train_config

    def _read_file(self, path: str) -> Dict:
        directory, name = os.path.split(path)
        if not os.path.exists(path):
            raise ConfigError(f"Config file {path} not found")
        return ConfigurationLoader(directory or ".")._read_json(name)


# Global instance
_config_loader = None


def get_config_loader(config_dir: str = "config") -> ConfigurationLoader:
    """
    Get singleton configuration loader instance

    Args:
        config_dir: Directory containing the JSON files

    Returns:
        ConfigurationLoader instance
    """
    global _config_loader
    if _config_loader is None or _config_loader.config_dir != config_dir:
        _config_loader = ConfigurationLoader(config_dir)
        _config_loader.load_all()
    return _config_loader
