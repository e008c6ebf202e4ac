"""Permite ejecutar la CLI con python -m alphabx."""

import sys

from alphabx.main import main


if __name__ == "__main__":
    sys.exit(main())
