"""Allow ``python -m cell_tracker``."""

import sys

from cell_tracker.cli.main import main

sys.exit(main())
