"""Counter-based keyed hashing kernels with backend selection.

Every random quantity in the package is a deterministic function of a 64-bit
key and integer/float "coordinates", computed by folding the coordinates into
the key with a splitmix-style finalizer. This makes draws addressable (the
factor at a lattice site can be regenerated in isolation) and reproducible
across runs, processes, and backends.

Two interchangeable backends provide the array kernels:

* ``sepex.kernels._fast`` - Cython, built at install time when a compiler is
  available;
* ``sepex.kernels._ref`` - pure numpy, always available.

The compiled backend is preferred. Set ``SEPEX_KERNELS=ref`` or
``SEPEX_KERNELS=fast`` to force one (forcing ``fast`` raises if the extension
is missing). Both produce bit-identical output; ``tests/test_kernels.py``
checks that.
"""

import os

import numpy as np

MASK64 = (1 << 64) - 1
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_GOLD = 0x9E3779B97F4A7C15
_MULT = 0xD1342543DE82EF95


def mix64(z):
    """Splitmix64 finalizer on a Python int (mod 2**64)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
    return z ^ (z >> 31)


def fold64(h, v):
    """Fold one 64-bit value into a running hash. Scalar twin of the kernels."""
    h &= MASK64
    v &= MASK64
    return mix64(h ^ ((v * _MULT + _GOLD + ((h << 6) & MASK64) + (h >> 2)) & MASK64))


def derive(key, *tokens):
    """Derive a subkey by folding integer tokens into ``key`` one at a time."""
    h = key & MASK64
    for t in tokens:
        h = fold64(h, int(t))
    return h


def to_unit(h):
    """Map a 64-bit hash to a float64 in [0, 1) using the top 53 bits."""
    return ((h & MASK64) >> 11) * 2.0**-53


_forced = os.environ.get("SEPEX_KERNELS", "").strip().lower()
if _forced == "ref":
    from . import _ref as _impl

    BACKEND = "ref"
elif _forced == "fast":
    from . import _fast as _impl  # type: ignore[no-redef]

    BACKEND = "fast"
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "fast"
    except ImportError:
        from . import _ref as _impl  # type: ignore[no-redef]

        BACKEND = "ref"


def _as_u64_2d(coords):
    a = np.ascontiguousarray(coords)
    if a.ndim == 1:
        a = a[:, None]
    if a.dtype != np.uint64:
        a = a.astype(np.uint64)
    return np.ascontiguousarray(a)


def hash_tuples(key, coords):
    """Hash each row of ``coords`` (n, K) of non-negative ints under ``key``."""
    return _impl.hash_tuples(key & MASK64, _as_u64_2d(coords))


def uniform_block(hashes, dim):
    """Expand per-row hashes (n,) into an (n, dim) block of uniforms."""
    h = np.ascontiguousarray(hashes, dtype=np.uint64)
    return _impl.uniform_block(h, int(dim))


def uniform_tuples(key, coords, dim):
    """Uniforms keyed by integer coordinates: (n, dim) for ``coords`` (n, K)."""
    return uniform_block(hash_tuples(key, coords), dim)


def hash_float_columns(hashes, cols):
    """Fold float64 columns (n, m) into per-row hashes (n,) by bit pattern."""
    h = np.ascontiguousarray(hashes, dtype=np.uint64)
    c = np.ascontiguousarray(cols, dtype=np.float64)
    if c.ndim == 1:
        c = c[:, None]
    return _impl.hash_float_columns(h, c)


def greedy_cover(dist2, radius2):
    """Greedy first-uncovered cover; returns center indices into ``dist2``."""
    d = np.ascontiguousarray(dist2, dtype=np.float64)
    return _impl.greedy_cover(d, float(radius2))
