"""Stable seed derivation.

Every random draw in a sweep is keyed by a 64-bit seed computed from the
base seed, a role name and the coordinates that the draw is allowed to
depend on. The mixing rule is:

    payload = json.dumps([base_seed, role, sorted(coords.items())],
                         separators=(",", ":"))
    seed    = int.from_bytes(blake2b(payload, digest_size=8), "little")

with floats rendered through ``repr`` (shortest round-trip form), so the
value is identical on every platform and Python version, and independent of
the order in which cells are scheduled.
"""

from __future__ import annotations

import hashlib
import json
from numbers import Integral, Real

import numpy as np

from .exceptions import InputError

ROLES = ("data", "noise", "features", "subsample", "test", "test-noise", "teacher", "trial")


def _canonical(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, Real):
        return repr(float(value))
    if isinstance(value, str):
        return value
    raise InputError(f"cannot derive a seed from coordinate of type {type(value).__name__}")


def derive_seed(base_seed: int, role: str, **coords) -> int:
    """Return a stable 64-bit seed for ``role`` at the given coordinates."""
    if role not in ROLES:
        raise InputError(f"unknown seed role {role!r}")
    items = [[k, _canonical(v)] for k, v in sorted(coords.items())]
    payload = json.dumps([int(base_seed), role, items], separators=(",", ":"))
    digest = hashlib.blake2b(payload.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def rng_for(base_seed: int, role: str, **coords) -> np.random.Generator:
    return np.random.default_rng(derive_seed(base_seed, role, **coords))
