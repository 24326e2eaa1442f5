"""Named random substreams derived from a single run seed."""

import os
import zlib

import numpy as np


def substream(seed, name):
    """Generator for the substream ``name`` of ``seed``; stable across runs and platforms."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode())])


def max_workers():
    """Thread cap from ``HPCALC_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("HPCALC_THREADS", "1")))
    except ValueError:
        return 1
