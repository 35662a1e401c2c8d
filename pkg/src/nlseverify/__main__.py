"""Allow ``python -m nlseverify`` as an alias for the console script."""

from __future__ import annotations

from .cli import entry

entry()
