#!/usr/bin/env python3
"""Verify the rank-one completion solver against the multi-start oracle.
Same flags as `gluecount lemma-suite`."""
import sys

from gluecount.cli import main

if __name__ == "__main__":
    sys.exit(main(["lemma-suite", *sys.argv[1:]]))
