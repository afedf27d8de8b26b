"""inflap entry point."""

import sys

from inflap.cli import main

if __name__ == "__main__":
    sys.exit(main())
