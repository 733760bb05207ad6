#!/usr/bin/env python3
"""Run the acceptance suite and print the PASS/FAIL summary.

``--fast`` skips the 3D spot check.
"""

import sys
from pathlib import Path

import pytest


def main():
    root = Path(__file__).resolve().parent.parent
    args = [str(root / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]
    if "--fast" in sys.argv[1:]:
        args += ["-m", "not slow"]
    return pytest.main(args)


if __name__ == "__main__":
    sys.exit(main())
