#!/usr/bin/env python3
"""
Energetic resilience toolkit launcher.

    python energy_resilience.py analyze --config configs/underwater_robot.json
    python energy_resilience.py sweep --config configs/underwater_robot.json --out-dir results
    python energy_resilience.py verify --config configs/underwater_robot.json
    python energy_resilience.py paper-repro
"""

import logging
import sys

from dotenv import load_dotenv


def setup_logging(level: str, log_file: str = ''):
    """Configure root logging; a file handler is added when log_file is set"""
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )


def main(argv=None) -> int:
    # Load configuration before the settings object reads the environment
    load_dotenv('.env')

    from src.settings import settings
    settings.reload()
    setup_logging(settings.log_level, settings.log_file)

    from src.cli import main as cli_main
    try:
        return cli_main(argv)
    except Exception as e:
        logging.error(f"Application error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
