"""Seed derivation: every random stream is a pure function of (master seed, tags)."""

from __future__ import annotations

import zlib

import numpy as np


def _tag_int(tag) -> int:
    if isinstance(tag, (bool, np.bool_)):
        return int(tag)
    if isinstance(tag, (int, np.integer)):
        if tag < 0:
            raise ValueError("integer tags must be non-negative")
        return int(tag)
    if isinstance(tag, float):
        return int(round(tag * 1_000_000))
    return zlib.crc32(str(tag).encode("utf-8"))


def derive_seed(seed: int, *tags) -> np.random.SeedSequence:
    return np.random.SeedSequence([_tag_int(seed)] + [_tag_int(t) for t in tags])


def derive_rng(seed: int, *tags) -> np.random.Generator:
    """Independent generator for ``(seed, *tags)``; identical inputs give identical streams."""
    return np.random.default_rng(derive_seed(seed, *tags))


def derive_int(seed: int, *tags) -> int:
    return int(derive_seed(seed, *tags).generate_state(1, dtype=np.uint32)[0])
