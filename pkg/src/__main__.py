"""Package runner for defsum.

Usage: python -m src
"""

import sys

from defsum.main import main

if __name__ == "__main__":
    sys.exit(main())
