"""Run the pathwise CLI from a source checkout: ``python scripts/cli.py run --help``."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.pathwise.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
