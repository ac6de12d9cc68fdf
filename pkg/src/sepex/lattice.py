"""Index-lattice combinatorics for multi-index arrays.

Direction vectors e in {0,1}^K select a subset of the K index coordinates.
For a shape N = (N_1, ..., N_K) the masked index set I_{N,e} consists of the
tuples whose active coordinates range over [N_j] and whose masked coordinates
are pinned to 0. A transversal partition splits I_{N,e} into groups whose
members never share a value in any active coordinate, so the latent factors
attached to distinct members of a group are independent.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class EVector:
    """Binary direction vector over the K index coordinates."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) < 1:
            raise ConfigError("direction vector must have length >= 1")
        if any(b not in (0, 1) for b in bits):
            raise ConfigError(f"direction vector must be binary, got {bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def K(self):
        return len(self.bits)

    @property
    def k(self):
        """Layer: number of active coordinates."""
        return sum(self.bits)

    @property
    def support(self):
        return tuple(j for j, b in enumerate(self.bits) if b)

    @property
    def is_zero(self):
        return self.k == 0

    def leq(self, other):
        """Coordinatewise partial order: self <= other."""
        if self.K != other.K:
            raise ConfigError("direction vectors of different length")
        return all(a <= b for a, b in zip(self.bits, other.bits))

    def strictly_less(self, other):
        return self.leq(other) and self.bits != other.bits

    def mask(self, coords):
        """Hadamard mask i * e: zero out coordinates off the support."""
        if len(coords) != self.K:
            raise ConfigError("index tuple length does not match direction vector")
        return tuple(c if b else 0 for c, b in zip(coords, self.bits))

    @property
    def bitstring(self):
        return "".join(str(b) for b in self.bits)

    @classmethod
    def from_bitstring(cls, s):
        return cls(tuple(int(c) for c in s))

    def __str__(self):
        return self.bitstring


@dataclass(frozen=True)
class Shape:
    """Positive dimensions (N_1, ..., N_K) of an index lattice."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1:
            raise ConfigError("shape must have at least one dimension")
        if any(d < 1 for d in dims):
            raise ConfigError(f"shape dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def K(self):
        return len(self.dims)

    @property
    def total(self):
        return int(np.prod(self.dims, dtype=np.int64))

    @property
    def min_dim(self):
        return min(self.dims)

    @property
    def max_dim(self):
        return max(self.dims)

    def __str__(self):
        return "x".join(str(d) for d in self.dims)


def enumerate_evectors(K):
    """All nonzero direction vectors for K coordinates, grouped by layer.

    Returns a list of K layers; layer ``k-1`` holds the C(K, k) vectors with
    exactly k active coordinates, ordered by ascending support.
    """
    if not 1 <= K <= 16:
        raise ConfigError(f"K must be in [1, 16], got {K}")
    layers = []
    for k in range(1, K + 1):
        layer = []
        for sup in itertools.combinations(range(K), k):
            bits = [0] * K
            for j in sup:
                bits[j] = 1
            layer.append(EVector(tuple(bits)))
        layers.append(layer)
    return layers


def all_evectors(K):
    """Flat list of all 2^K - 1 nonzero direction vectors, layer by layer."""
    return [e for layer in enumerate_evectors(K) for e in layer]


def sub_evectors(e, strict=False):
    """Nonzero e' <= e (strictly less when ``strict``), ascending by layer."""
    if e.is_zero:
        raise ConfigError("zero direction vector has no decomposition")
    subs = []
    for r in range(1, e.k + 1):
        for sub in itertools.combinations(e.support, r):
            bits = [0] * e.K
            for j in sub:
                bits[j] = 1
            subs.append(EVector(tuple(bits)))
    if strict:
        subs = [s for s in subs if s.bits != e.bits]
    return subs


def broadcast_dims(shape, e):
    """Shape (N_j if j active else 1), for broadcasting per-e factor grids."""
    return tuple(d if b else 1 for d, b in zip(shape.dims, e.bits))


def index_set(shape, e):
    """All masked tuples of I_{N,e} as an (n_e, K) int array, lexicographic.

    Active coordinates are 1-based in [1, N_j]; masked coordinates are 0.
    The cardinality is the number of rows, prod of active dims.
    """
    if e.is_zero:
        raise ConfigError("zero direction vector has no index set")
    if e.K != shape.K:
        raise ConfigError(f"direction vector K={e.K} does not match shape K={shape.K}")
    active = list(e.support)
    active_dims = [shape.dims[j] for j in active]
    grid = np.indices(active_dims).reshape(len(active), -1).T + 1
    out = np.zeros((grid.shape[0], shape.K), dtype=np.int64)
    out[:, active] = grid
    return out


@dataclass(frozen=True)
class TransversalPartition:
    """Partition of I_{N,e} into groups transversal in every active coordinate."""

    shape: Shape
    e: EVector
    group_size: int
    groups: tuple  # tuple of groups, each a tuple of index tuples

    @property
    def group_count(self):
        return len(self.groups)

    def to_json_dict(self):
        return {
            "shape": list(self.shape.dims),
            "e": list(self.e.bits),
            "group_size": self.group_size,
            "groups": [[list(t) for t in g] for g in self.groups],
        }

    def to_json(self, indent=None):
        return json.dumps(self.to_json_dict(), indent=indent)

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            shape=Shape(tuple(d["shape"])),
            e=EVector(tuple(d["e"])),
            group_size=int(d["group_size"]),
            groups=tuple(tuple(tuple(int(c) for c in t) for t in g) for g in d["groups"]),
        )


def transversal_partition(shape, e):
    """Partition I_{N,e} into groups of size min_{j active} N_j.

    Construction: order the active coordinates by non-increasing dimension,
    treat the smallest as the within-group counter t, index groups by the
    remaining active coordinates g, and place member t of group g at
    coordinate value ((t + g_j - 2) mod N_j) + 1 in each non-counter
    coordinate. For fixed g_j the map t -> ((t + g_j - 2) mod N_j) + 1 is
    injective on [m] since m <= N_j, which gives transversality.
    """
    if e.is_zero:
        raise ConfigError("zero direction vector has no partition")
    if e.K != shape.K:
        raise ConfigError(f"direction vector K={e.K} does not match shape K={shape.K}")
    # active coordinates, largest dimension first, stable on ties
    order = sorted(e.support, key=lambda j: (-shape.dims[j], j))
    lead, counter = order[:-1], order[-1]
    m = shape.dims[counter]

    t = np.arange(1, m + 1, dtype=np.int64)
    if lead:
        g_grid = np.indices([shape.dims[j] for j in lead]).reshape(len(lead), -1).T + 1
    else:
        g_grid = np.zeros((1, 0), dtype=np.int64)
    n_groups = g_grid.shape[0]

    tuples = np.zeros((n_groups, m, shape.K), dtype=np.int64)
    tuples[:, :, counter] = t[None, :]
    for pos, j in enumerate(lead):
        g_j = g_grid[:, pos][:, None]
        tuples[:, :, j] = (t[None, :] + g_j - 2) % shape.dims[j] + 1

    groups = tuple(tuple(map(tuple, grp)) for grp in tuples.tolist())
    return TransversalPartition(shape=shape, e=e, group_size=m, groups=groups)


@dataclass(frozen=True)
class PartitionReport:
    """Outcome of the three partition checks, with the first counterexample."""

    cover: bool
    disjoint: bool
    transversal: bool
    detail: str = ""

    @property
    def ok(self):
        return self.cover and self.disjoint and self.transversal


def _encode(coords, radices):
    """Mixed-radix encoding of index tuples (coordinate values in [0, N_j])."""
    code = np.zeros(coords.shape[:-1], dtype=np.int64)
    for j, r in enumerate(radices):
        code = code * r + coords[..., j]
    return code


def verify_partition(shape, e, partition):
    """Check exact cover, disjointness, and per-group transversality.

    Accepts a TransversalPartition or any nested list of index tuples.
    Failures are reported, never raised.
    """
    groups = partition.groups if isinstance(partition, TransversalPartition) else partition
    if len(groups) == 0:
        return PartitionReport(False, True, True, "empty partition")
    try:
        stack = np.asarray(groups, dtype=np.int64)
        if stack.ndim != 3 or stack.shape[2] != shape.K:
            raise ValueError
        arrs = list(stack)
    except ValueError:
        # ragged group sizes: fall back to per-group arrays
        stack = None
        arrs = [np.asarray(g, dtype=np.int64).reshape(-1, shape.K) for g in groups]
    flat = stack.reshape(-1, shape.K) if stack is not None else np.concatenate(arrs, axis=0)
    radices = [d + 1 for d in shape.dims]
    codes = _encode(flat, radices)

    expected = np.sort(_encode(index_set(shape, e), radices))
    uniq, counts = np.unique(codes, return_counts=True)

    disjoint = bool(counts.max() == 1)
    cover = bool(len(codes) == len(expected) and np.array_equal(uniq, expected))
    detail = ""
    if not disjoint:
        dup = uniq[np.argmax(counts > 1)]
        detail = f"duplicated tuple {_decode(dup, radices)}"
    elif not cover:
        missing = np.setdiff1d(expected, uniq)
        if len(missing):
            detail = f"missing tuple {_decode(missing[0], radices)}"
        else:
            extra = np.setdiff1d(uniq, expected)
            detail = f"foreign tuple {_decode(extra[0], radices)}"

    transversal = True
    if stack is not None:
        for j in e.support:
            col = np.sort(stack[:, :, j], axis=1)
            rep = (np.diff(col, axis=1) == 0).any(axis=1)
            if rep.any():
                transversal = False
                if not detail:
                    gi = int(np.argmax(rep))
                    detail = f"group {gi} repeats a value in coordinate {j + 1}"
                break
    else:
        for gi, arr in enumerate(arrs):
            for j in e.support:
                vals = arr[:, j]
                if len(np.unique(vals)) != len(vals):
                    transversal = False
                    if not detail:
                        detail = f"group {gi} repeats a value in coordinate {j + 1}"
                    break
            if not transversal:
                break
    return PartitionReport(cover=cover, disjoint=disjoint, transversal=transversal, detail=detail)


def _decode(code, radices):
    coords = []
    for r in reversed(radices):
        coords.append(int(code % r))
        code //= r
    return tuple(reversed(coords))
