#!/usr/bin/env python3
"""Run the default counting sweep (20 seeded fields, L in {0.2, 0.1, 0.05})
with the oracle cross-check enabled.  Same flags as `gluecount run`."""
import sys

from gluecount.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "--oracle", *sys.argv[1:]]))
