"""Dynamic version loading from package metadata.

The version is read at runtime with importlib.metadata so the manifest
stays the single source of truth.

Example:
    >>> from cell_tracker.version import get_version
    >>> get_version()  # "0.1.0" when installed, "0.0.0-dev" from a checkout
"""

import importlib.metadata
from functools import lru_cache

# Must match the 'name' field under [tool.poetry] in pyproject.toml
PACKAGE_NAME = "pmb-cell-tracker"

DEV_VERSION = "0.0.0-dev"


@lru_cache(maxsize=1)
def get_version() -> str:
    """Get the package version from metadata, or the development fallback."""
    try:
        return importlib.metadata.version(PACKAGE_NAME)
    except importlib.metadata.PackageNotFoundError:
        return DEV_VERSION


def __getattr__(name: str) -> str:
    """Provide a dynamic ``__version__`` that follows ``get_version()``."""
    if name == "__version__":
        return get_version()
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
