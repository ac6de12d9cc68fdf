"""Numpy reference implementation of the hot kernels.

Bit-compatible with the compiled backend in ``_fast.pyx``: all hashing is
64-bit modular integer arithmetic (numpy uint64 arrays wrap silently), and
the uint64 -> float64 conversion ``(h >> 11) * 2**-53`` is exact, so both
backends produce identical bytes.
"""

import numpy as np

_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MULT = np.uint64(0xD1342543DE82EF95)
_U53 = 2.0**-53


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    return z ^ (z >> np.uint64(31))


def _fold(h, v):
    # uint64 wraparound is the point here; numpy only warns for scalar
    # operands (arrays wrap silently), so silence that case.
    with np.errstate(over="ignore"):
        return _mix(h ^ (v * _MULT + _GOLD + (h << np.uint64(6)) + (h >> np.uint64(2))))


def hash_tuples(base, coords):
    """Fold the columns of ``coords`` (n, K) uint64 into per-row hashes."""
    n = coords.shape[0]
    h = np.full(n, np.uint64(base), dtype=np.uint64)
    for j in range(coords.shape[1]):
        h = _fold(h, coords[:, j])
    return h


def uniform_block(h, dim):
    """Expand per-row hashes into (n, dim) uniforms in [0, 1)."""
    out = np.empty((h.shape[0], dim), dtype=np.float64)
    for d in range(dim):
        hd = _fold(h, np.uint64(d))
        out[:, d] = (hd >> np.uint64(11)).astype(np.float64) * _U53
    return out


def hash_float_columns(h, cols):
    """Fold the float64 bit patterns of ``cols`` (n, m) into hashes ``h`` (n,)."""
    out = h.copy()
    bits = cols.view(np.uint64)
    for j in range(cols.shape[1]):
        out = _fold(out, bits[:, j])
    return out


def greedy_cover(dist2, radius2):
    """Greedy internal cover on a squared-distance matrix.

    Scans rows in input order; for each uncovered row, the center chosen is
    the highest-index row still within the radius of it (farthest reach),
    which is the optimal internal cover when rows are ordered along a chain.
    Returns the center indices.
    """
    m = dist2.shape[0]
    covered = np.zeros(m, dtype=bool)
    centers = []
    for i in range(m):
        if not covered[i]:
            c = int(np.nonzero(dist2[i] <= radius2)[0][-1])
            centers.append(c)
            covered |= dist2[c] <= radius2
    return np.asarray(centers, dtype=np.int64)
