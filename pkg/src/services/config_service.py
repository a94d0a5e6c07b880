import json
from typing import Any, Dict

import yaml


class ConfigurationService:
    """Service for loading simulation defaults from a JSON or YAML file."""

    def __init__(self, config_file: str):
        self.config_file = config_file
        self.config = self._load_config(config_file)

    def _load_config(self, config_file: str) -> Dict[str, Any]:
        """Load configuration from a JSON or YAML file; an empty file is an empty config."""
        with open(config_file, 'r', encoding='utf-8') as f:
            if config_file.endswith('.json'):
                data = json.load(f)
            elif config_file.endswith(('.yaml', '.yml')):
                data = yaml.safe_load(f)
            else:
                raise ValueError("Unsupported config file format. Use JSON or YAML.")
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ValueError(f"Configuration file {config_file} must contain a mapping at the top level")
        return data

    def get(self, key: str, default=None):
        """Get a configuration value; dotted keys reach into nested sections (e.g. 'sweep.trials')."""
        value: Any = self.config
        for part in key.split('.'):
            if not isinstance(value, dict) or part not in value:
                return default
            value = value[part]
        return value
