"""Counter-based pseudo-randomness.

All randomness in the laboratory flows through a Philox-class
counter-based generator so that any artifact can be regenerated
bit-identically from its 64-bit seed, independent of draw order or
thread schedule.

Contract
--------
* key = the 64-bit seed, placed directly in the Philox key words;
* counter = (trial, position): each Monte Carlo trial owns a disjoint
  counter block (trial index in a high counter word), and within a
  trial the value for matrix entry (row, column) sits at stream
  position row * n_columns + column;
* Gaussian variates come from the inverse normal CDF applied to
  uniforms built from the top 52 bits of each 64-bit word, mapped to
  (2k+1) * 2**-53.  That value is exact in float64, strictly inside
  (0, 1), and symmetric about 1/2, so the transform attains full double
  precision and never overflows.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import InvalidArgumentError

_SEED_MAX = 2**64


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise InvalidArgumentError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed < _SEED_MAX:
        raise InvalidArgumentError(f"seed must fit in 64 bits, got {seed}")
    return seed


def philox_generator(seed: int, trial: int = 0) -> np.random.Generator:
    """Generator over the Philox stream for (seed, trial).

    Distinct trials occupy counter blocks 2**128 apart, so streams never
    overlap at desk scale regardless of how many values a trial draws.
    """
    seed = _check_seed(seed)
    if not isinstance(trial, (int, np.integer)) or trial < 0:
        raise InvalidArgumentError(f"trial index must be a nonnegative integer, got {trial!r}")
    counter = np.array([0, 0, int(trial), 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def uniform_open(seed: int, count: int, trial: int = 0) -> np.ndarray:
    """`count` uniforms in the open interval (0, 1), 52-bit resolution."""
    gen = philox_generator(seed, trial)
    raw = gen.integers(0, _SEED_MAX, size=count, dtype=np.uint64)
    k = (raw >> np.uint64(12)).astype(np.float64)
    return k * 2.0**-52 + 2.0**-53


def standard_normals(seed: int, count: int, trial: int = 0) -> np.ndarray:
    """`count` i.i.d. standard normal variates via the inverse CDF."""
    return ndtri(uniform_open(seed, count, trial))
