"""Ring QCMI sweep including the optional n = 16 curve (about 20 s on one core)."""

import argparse
import sys

from qmaxent.cli import main

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out-fig5-n16")
    parser.add_argument("--sizes", default="4,8,12,16")
    parser.add_argument("--threads", default="1")
    args = parser.parse_args()
    sys.exit(main(["reproduce", "fig5", "--n", args.sizes, "--out", args.out, "--threads", args.threads]))
