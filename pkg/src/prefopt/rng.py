"""Seeded random streams and perturbation-direction samplers.

Every stream is a :class:`numpy.random.Generator` over ``PCG64`` seeded from a
``SeedSequence`` whose entropy is the base seed followed by any number of
keys (trial index, method name, role tag).  String keys are hashed with
SHA-256 so the mapping is stable across processes and platforms, unlike
Python's salted ``hash``.
"""

from __future__ import annotations

import hashlib
import math
from typing import NamedTuple

import numpy as np

from .errors import InvalidDimensionError

GENERATOR_ID = f"numpy.random.PCG64 via SeedSequence (numpy {np.__version__})"

PERTURBATION = "perturbation"
NOISE_1 = "objective-noise-1"
NOISE_2 = "objective-noise-2"
INIT = "init"

_UINT64_MAX = 2**64 - 1


def _entropy_word(key) -> int:
    if isinstance(key, (bool, np.bool_)):
        raise TypeError("boolean stream keys are ambiguous")
    if isinstance(key, (int, np.integer)):
        key = int(key)
        if not 0 <= key <= _UINT64_MAX:
            raise ValueError(f"integer stream keys must fit in uint64, got {key}")
        return key
    if isinstance(key, str):
        return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "little")
    raise TypeError(f"stream keys must be int or str, got {type(key).__name__}")


def _seed_sequence(seed: int, keys) -> np.random.SeedSequence:
    return np.random.SeedSequence([_entropy_word(seed), *(_entropy_word(k) for k in keys)])


def make_stream(seed: int, *keys) -> np.random.Generator:
    """Return an independent generator for ``(seed, *keys)``."""
    return np.random.Generator(np.random.PCG64(_seed_sequence(seed, keys)))


def derive_seed(seed: int, *keys) -> int:
    """Collapse ``(seed, *keys)`` into a single 64-bit seed."""
    return int(_seed_sequence(seed, keys).generate_state(1, np.uint64)[0])


class TrialStreams(NamedTuple):
    """The three per-iteration randomness sources of one optimizer run."""

    perturbation: np.random.Generator
    noise1: np.random.Generator
    noise2: np.random.Generator


def trial_streams(seed: int) -> TrialStreams:
    return TrialStreams(
        make_stream(seed, PERTURBATION),
        make_stream(seed, NOISE_1),
        make_stream(seed, NOISE_2),
    )


def _check_dimension(d) -> int:
    if isinstance(d, (bool, np.bool_)) or not isinstance(d, (int, np.integer)):
        raise InvalidDimensionError(f"dimension must be a positive integer, got {d!r}")
    if d < 1:
        raise InvalidDimensionError(f"dimension must be at least 1, got {d}")
    return int(d)


def sample_unit_sphere(rng: np.random.Generator, d: int, size: int | None = None) -> np.ndarray:
    """Draw directions uniformly from the unit sphere in R^d.

    With ``size=None`` a single vector of shape ``(d,)`` is returned,
    otherwise an array of shape ``(size, d)`` with one direction per row.
    """
    d = _check_dimension(d)
    if size is None:
        while True:
            z = rng.standard_normal(d)
            norm = math.sqrt(float(z @ z))
            if norm > 0.0:
                return z / norm
    z = rng.standard_normal((size, d))
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    # zero rows have probability zero; redraw them anyway
    while np.any(bad := norms == 0.0):
        z[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    return z / norms[:, None]


def sample_gaussian(rng: np.random.Generator, d: int, size: int | None = None) -> np.ndarray:
    """Draw i.i.d. standard normal directions (not normalized)."""
    d = _check_dimension(d)
    if size is None:
        return rng.standard_normal(d)
    return rng.standard_normal((size, d))
