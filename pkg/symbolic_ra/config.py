from __future__ import annotations

from os import getenv
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import find_dotenv, load_dotenv
from loguru import logger
from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

yaml = YAML()
yaml.preserve_quotes = True

DEFAULT_CONFIG_PATH = Path('config.yml')

DEFAULTS: Dict[str, Any] = {
    'theory': 'linear',
    'solver_command': None,
    'solver_timeout': 10,
    'default_depth': 3,
    'sampling_attempts': 200,
    'sampling_seed': 0,
    'log_level': 'WARNING',
    'log_path': None,
}

LOG_LEVELS = ('TRACE', 'DEBUG', 'INFO', 'SUCCESS', 'WARNING', 'ERROR', 'CRITICAL')


class ConfigError(Exception):
    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


class RAConfig:
    """
    Settings for the ra tool. Options missing from the file take their defaults.
    RA_SOLVER_COMMAND in the environment or a .env file overrides solver_command.
    """
    _config: dict
    filepath: Optional[Path]

    def __init__(self, config_path: Optional[Path] = None):
        self.filepath = Path(config_path) if config_path is not None else None
        self._config = dict(DEFAULTS)
        if self.filepath is not None:
            self._config.update(self._read(self.filepath))

        load_dotenv(find_dotenv(usecwd=True))
        solver_override = getenv('RA_SOLVER_COMMAND')
        if solver_override:
            logger.debug(f'Using the solver command from RA_SOLVER_COMMAND: {solver_override}')
            self._config['solver_command'] = solver_override

    @property
    def name(self) -> str:
        return self.filepath.name if self.filepath is not None else 'the default configuration'

    @staticmethod
    def _read(filepath: Path) -> dict:
        try:
            with open(filepath) as fp:
                loaded = yaml.load(fp)
        except OSError as e:
            raise ConfigError(f'Could not open the config file {filepath}: {e}') from e
        except YAMLError as e:
            raise ConfigError(f'{filepath.name} is not valid YAML. {e}') from e
        if loaded is None:
            return {}
        if not isinstance(loaded, dict):
            raise ConfigError(f'{filepath.name} must be a mapping of options, like "theory: linear".')
        for key in loaded:
            if key not in DEFAULTS:
                logger.warning(f'{filepath.name} has the unknown option "{key}". It is ignored. Perhaps there is a typo?')
        return {key: value for key, value in loaded.items() if key in DEFAULTS}

    def __getitem__(self, item):
        try:
            return self._config[item]
        except KeyError as e:
            raise ConfigError(
                f'Looked for the config option {e} in {self.name} but didn\'t find it. Perhaps there is a typo in your configuration?') from e

    @property
    def solver_command(self) -> Optional[str]:
        command = self['solver_command']
        return str(command) if command else None

    @property
    def log_path(self) -> Optional[Path]:
        path = self['log_path']
        if not path:
            return None
        root = self.filepath.parent if self.filepath is not None else Path.cwd()
        return root / str(path)

    def check(self) -> bool:
        warnings: List[str] = []
        errors: List[str] = []

        for key in ('solver_timeout', 'default_depth', 'sampling_attempts', 'sampling_seed'):
            value = self[key]
            if isinstance(value, bool) or not isinstance(value, int):
                errors.append(f"'{key}' in {self.name} must be a whole number, got {value!r}.")
            elif value < 0:
                errors.append(f"'{key}' in {self.name} must not be negative, got {value}.")

        if str(self['log_level']).upper() not in LOG_LEVELS:
            errors.append(f"'log_level' in {self.name} must be one of {', '.join(LOG_LEVELS)}, got {self['log_level']!r}.")

        if str(self['theory']) == 'external' and not self.solver_command:
            warnings.append(
                f"The theory in {self.name} is 'external' but no solver_command is set. "
                f"Set solver_command or RA_SOLVER_COMMAND, or pass --theory external:<command>."
            )
        if isinstance(self['default_depth'], int) and self['default_depth'] > 8:
            warnings.append(f"'default_depth' in {self.name} is {self['default_depth']}. Enumeration grows exponentially with depth.")

        for warning in warnings:
            logger.warning(warning)

        if errors:
            for error in errors:
                logger.error(error)
            return False
        else:
            return True


def load_config(config_path: Optional[Path] = None) -> RAConfig:
    """Reads config_path, or config.yml in the working directory when it exists."""
    if config_path is None and DEFAULT_CONFIG_PATH.exists():
        config_path = DEFAULT_CONFIG_PATH
    config = RAConfig(config_path)
    if not config.check():
        raise ConfigError(f'{config.name} has invalid options. See the errors above.')
    return config
