"""
Principal infinity-eigenvalues and minimal eigenfunctions on metric graphs.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

import logging
import os

from inflap.const import DEFAULT_LOG_LEVEL, LOG_FORMAT, LOG_LEVEL_ENV

__version__ = "0.3.0"

_LOG = logging.getLogger(__name__)


def setup_logging(level: str | None = None) -> None:
    """Log to stderr at ``level``, falling back to $INFLAP_LOG_LEVEL and then WARNING."""
    name = (level or os.getenv(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL)).upper()
    logging.basicConfig(level=getattr(logging, name, logging.WARNING), format=LOG_FORMAT)
    _LOG.debug("inflap v%s, log level %s", __version__, name)
