"""Allow `python -m softvsm`."""

import sys

from .cli import main

sys.exit(main())
