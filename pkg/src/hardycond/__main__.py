"""Allow ``python -m hardycond``."""

import sys

from .cli import main

sys.exit(main())
