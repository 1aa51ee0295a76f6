"""Seeded random streams.

Two kinds of randomness are used:

* ordinary ``numpy.random.Generator`` streams, derived hierarchically from a
  master seed and a tuple of integer keys (point, graph, run, ...);
* keyed uniforms, a counter-based hash of ``(seed, node, epoch, slot)`` that
  lets a single node's choices be regenerated without replaying anyone else's.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the sub-stream ``keys`` of ``seed``."""
    return np.random.default_rng([seed & _MASK64, *[int(k) for k in keys]])


def derive_seed(seed: int, *keys: int) -> int:
    """A 64-bit integer seed for the sub-stream ``keys`` of ``seed``."""
    ss = np.random.SeedSequence([seed & _MASK64, *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _mix(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


def keyed_uniform(seed: int, nodes, epochs, slot: int) -> np.ndarray:
    """Uniform draws in [0, 1), one per entry of ``nodes``.

    The value depends only on ``(seed, node, epoch, slot)``, so any subset of
    nodes can be redrawn in isolation.
    """
    nodes = np.asarray(nodes, dtype=np.uint64)
    epochs = np.broadcast_to(np.asarray(epochs, dtype=np.uint64), nodes.shape)
    with np.errstate(over="ignore"):
        h = _mix(np.full(nodes.shape, np.uint64(seed & _MASK64)) + _GOLDEN)
        h = _mix(h ^ (nodes * _GOLDEN))
        h = _mix(h ^ ((epochs << np.uint64(8)) | np.uint64(slot & 0xFF)))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
