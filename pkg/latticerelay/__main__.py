"""Entry point for `python -m latticerelay`."""

import sys

from latticerelay.latticerelay import main

if __name__ == "__main__":
    sys.exit(main())
