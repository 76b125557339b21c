"""Regenerate every example and figure artifact into one directory (default ./out)."""

import argparse
import sys

from qmaxent.cli import main

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out")
    parser.add_argument("--threads", default="1")
    args = parser.parse_args()
    sys.exit(main(["reproduce", "all", "--out", args.out, "--threads", args.threads]))
