"""Configuration for the cell tracker.

Two layers:
- ``Settings``: process-level knobs from the environment (logging,
  parallelism, invariant checks, output retries), cached by ``get_settings``
- ``CliConfig``: the sectioned experiment file that fixes every parameter
  influencing results, read by ``load_config`` and written by ``dump_config``

Example:
    >>> from cell_tracker.config import get_settings, load_config
    >>> settings = get_settings()
    >>> config = load_config("experiments/default.ini")
"""

from cell_tracker.config.experiment import CliConfig, dump_config, load_config, parse_config
from cell_tracker.config.settings import Settings, clear_settings_cache, get_settings

__all__ = [
    "CliConfig",
    "Settings",
    "clear_settings_cache",
    "dump_config",
    "get_settings",
    "load_config",
    "parse_config",
]
