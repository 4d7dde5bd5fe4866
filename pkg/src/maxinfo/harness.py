"""Deterministic trial execution and report digests."""

from __future__ import annotations

import hashlib
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np


def stream_tag(name: str) -> int:
    return zlib.crc32(name.encode())


def trial_rng(seed: int, tag: str, index: int) -> np.random.Generator:
    """Independent stream for one trial, fixed by (seed, tag, index) alone."""
    return np.random.default_rng([int(seed) & (2**64 - 1), stream_tag(tag), int(index)])


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    bounds = np.linspace(0, total, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_trials(worker: Callable, total: int, workers: int = 1, *args) -> np.ndarray:
    """Run ``worker(start, stop, *args)`` over contiguous index ranges and concatenate.

    ``worker`` must return one row per trial index and derive randomness from
    the index only, so the result does not depend on ``workers``.
    """
    if total <= 0:
        return np.empty((0,))
    if workers <= 1:
        return np.asarray(worker(0, total, *args))
    spans = _chunks(total, workers * 4)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(worker, a, b, *args) for a, b in spans]
        parts = [np.asarray(f.result()) for f in futures]
    return np.concatenate(parts)


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=True)


def content_digest(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()
