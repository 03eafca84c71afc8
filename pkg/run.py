#!/usr/bin/env python3
"""
Grating resonance solver - command-line entry point
"""

import logging
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

from config.settings import Config  # noqa: E402
from src.cli.commands import main  # noqa: E402

# Configure logging
logging.basicConfig(
    level=getattr(logging, Config().LOG_LEVEL, logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

# ============= MAIN ENTRY POINT =============
if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logging.getLogger(__name__).warning("⚠️ Cancelled by user")
        sys.exit(130)
