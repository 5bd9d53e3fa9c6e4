#!/usr/bin/env python3
"""
baroslip launcher
Runs the command line from the repository root: python baroslip.py <command> ...
"""

import sys

from src.cli.baroslip_cli import main

if __name__ == "__main__":
    sys.exit(main())
