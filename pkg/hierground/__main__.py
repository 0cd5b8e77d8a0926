"""Allow running as: python -m hierground"""

import sys

from hierground.cli import main

if __name__ == "__main__":
    sys.exit(main())
