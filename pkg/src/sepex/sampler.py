"""Separately exchangeable arrays built from latent uniform factors.

A sample point at index i is tau({U_{i*e}}_e) where one i.i.d. uniform
factor U_{i*e} is attached to every nonzero direction e and masked index
i*e. Factors are never stored: each is a pure function of (seed, e, masked
index) through the keyed counter-based hash in :mod:`sepex.kernels`, so any
factor can be regenerated in isolation, nested fresh draws are cheap, and
equal seeds reproduce arrays bit-for-bit.

Built-in models:

* :class:`AdditiveModel` - weighted sum of factors; conditional laws are
  shifted weighted sums of uniforms (inclusion-exclusion CDF), so
  projections of affine and indicator functions are exact.
* :class:`InteractionModel` - product of the K first-layer factors;
  conditional laws are scaled products of uniforms (Gamma tail CDF).
* :class:`OpaqueModel` - smooth nonlinear tau with no analytic structure,
  exercising the inner Monte Carlo projection path.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from . import kernels
from .errors import ConfigError
from .lattice import EVector, Shape, all_evectors, broadcast_dims, index_set

# domain-separation tags folded into derived keys
TAG_FACTOR = 0xA1
TAG_INNER = 0xA2
TAG_REP = 0xA3
TAG_SIGNS = 0xA4
TAG_MEAN = 0xA5


def ecode(e):
    """Integer code of a direction vector, folded into factor keys."""
    return int(e.bitstring, 2)


@dataclass(frozen=True)
class UFactorKey:
    """Address of one latent factor: direction e plus masked index i*e."""

    e: EVector
    masked_index: tuple

    def __post_init__(self):
        idx = tuple(int(c) for c in self.masked_index)
        object.__setattr__(self, "masked_index", idx)
        if len(idx) != self.e.K:
            raise ConfigError("masked index length does not match direction vector")
        for j, c in enumerate(idx):
            if self.e.bits[j] and c < 1:
                raise ConfigError(f"active coordinate {j + 1} must be >= 1, got {c}")
            if not self.e.bits[j] and c != 0:
                raise ConfigError(f"masked coordinate {j + 1} must be 0, got {c}")


def factor_subkey(seed, e):
    """Per-direction hash key; coordinates are folded on top of this."""
    return kernels.derive(seed, TAG_FACTOR, ecode(e))


def u_factor(seed, key, factor_dim=1):
    """The uniform factor vector at one key, in [0, 1)^factor_dim."""
    h = kernels.derive(factor_subkey(seed, key.e), *key.masked_index)
    return kernels.uniform_block(np.array([h], dtype=np.uint64), factor_dim)[0]


def factor_grid(shape, seed, e, factor_dim=1):
    """All factors U_{i*e} for i in I_{N,e}, shaped for lattice broadcasting.

    Returns an array of shape ``broadcast_dims(shape, e) + (factor_dim,)``:
    active axes have full length, masked axes have length 1, so grids for
    different directions combine by plain numpy broadcasting.
    """
    coords = index_set(shape, e)
    u = kernels.uniform_tuples(factor_subkey(seed, e), coords, factor_dim)
    return u.reshape(broadcast_dims(shape, e) + (factor_dim,))


# ---------------------------------------------------------------------------
# conditional laws


class UniformSumLaw:
    """Law of shift + sum_i c_i * U_i with c_i > 0 and U_i i.i.d. uniform.

    ``shift`` may be an array (one conditional law per lattice site). The CDF
    uses the inclusion-exclusion formula over weight subsets, exact for the
    small weight counts that arise here.
    """

    def __init__(self, shift, weights):
        self.shift = np.asarray(shift, dtype=np.float64)
        w = np.asarray([c for c in weights if c != 0.0], dtype=np.float64)
        if (w < 0).any():
            raise ConfigError("uniform-sum weights must be non-negative")
        if len(w) > 16:
            raise ConfigError(f"{len(w)} weights: inclusion-exclusion CDF too large")
        self.weights = w
        m = len(w)
        if m:
            masks = np.arange(1 << m, dtype=np.uint32)
            bits = (masks[:, None] >> np.arange(m, dtype=np.uint32)) & 1
            self._subset_sums = bits @ w
            self._signs = np.where(bits.sum(axis=1) % 2 == 0, 1.0, -1.0)
            self._norm = math.factorial(m) * float(np.prod(w))

    def mean(self):
        return self.shift + self.weights.sum() / 2.0

    def var(self):
        return float(np.sum(self.weights**2) / 12.0)

    def cdf(self, x):
        y = np.asarray(x, dtype=np.float64) - self.shift
        m = len(self.weights)
        if m == 0:
            return (y >= 0).astype(np.float64)
        z = np.clip(y[..., None] - self._subset_sums, 0.0, None) ** m
        out = (z * self._signs).sum(axis=-1) / self._norm
        out = np.clip(out, 0.0, 1.0)
        # snap the support endpoints: inclusion-exclusion cancellation can
        # leave 1 - 1e-16 above the upper end
        return np.where(y >= self.weights.sum(), 1.0, np.where(y <= 0.0, 0.0, out))


class UniformProductLaw:
    """Law of scale * prod of m i.i.d. uniforms (deterministic when m = 0).

    -log of the product is Gamma(m, 1), so the CDF is the regularized upper
    Gamma tail at -log(x / scale).
    """

    def __init__(self, scale, m):
        self.scale = np.asarray(scale, dtype=np.float64)
        if m < 0:
            raise ConfigError("product length must be >= 0")
        self.m = int(m)

    def mean(self):
        return self.scale * 0.5**self.m

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        bshape = np.broadcast_shapes(x.shape, self.scale.shape)
        xb = np.broadcast_to(x, bshape).reshape(-1)
        sb = np.broadcast_to(self.scale, bshape).reshape(-1)
        if self.m == 0:
            return (sb <= xb).astype(np.float64).reshape(bshape)
        out = np.zeros(xb.shape)
        pos = sb > 0
        ratio = np.zeros_like(out)
        ratio[pos] = xb[pos] / sb[pos]
        out[pos & (ratio >= 1.0)] = 1.0
        inside = pos & (ratio > 0.0) & (ratio < 1.0)
        if inside.any():
            out[inside] = gammaincc(self.m, -np.log(ratio[inside]))
        # zero scale collapses to a point mass at 0
        out[~pos] = (xb[~pos] >= 0.0).astype(np.float64)
        return out.reshape(bshape)


# ---------------------------------------------------------------------------
# models


class SEModel:
    """Base model: a deterministic tau over the factor collection.

    ``tau`` receives a dict {e: array of shape S_e + (factor_dim,)} whose
    entries broadcast against each other (after dropping the factor axis) and
    must return the broadcast-shaped array of sample points.

    Models with analytic structure also implement ``cond_law(e, retained)``
    returning the conditional law of a sample point given the factors
    {U_{i*e'}}_{e' <= e}, and ``marginal_law()`` for the unconditional law.
    Models without analytic structure return None from both, which routes
    projections through inner Monte Carlo. ``range_hint`` bounds the sample
    values and seeds threshold grids for indicator classes.
    """

    K = None
    factor_dim = 1
    description = "se-model"
    range_hint = None

    def tau(self, factors):
        raise NotImplementedError

    def cond_law(self, e, retained):
        return None

    def marginal_law(self):
        return None

    @property
    def analytic(self):
        return self.marginal_law() is not None


class AdditiveModel(SEModel):
    """X_i = sum over nonzero e of c_e * U_{i*e} (first factor coordinate).

    Conditioning on the factors below a direction e leaves a shifted sum of
    the remaining uniforms, so conditional laws are exact UniformSumLaw
    instances for every e.
    """

    def __init__(self, K, coeffs=None):
        self.K = int(K)
        evs = all_evectors(self.K)
        if coeffs is None:
            coeffs = {e: 1.0 for e in evs}
        clean = {}
        for e, c in coeffs.items():
            if not isinstance(e, EVector):
                e = EVector(tuple(e))
            if e.K != self.K:
                raise ConfigError(f"coefficient direction {e} does not match K={self.K}")
            if c < 0:
                raise ConfigError("additive coefficients must be >= 0")
            clean[e] = float(c)
        self.coeffs = {e: clean.get(e, 0.0) for e in evs}
        self.description = f"additive-K{self.K}"
        self.range_hint = (0.0, sum(self.coeffs.values()))

    def tau(self, factors):
        total = 0.0
        for e, c in self.coeffs.items():
            if c != 0.0:
                total = total + c * factors[e][..., 0]
        return total

    def _split(self, e):
        below = [d for d in self.coeffs if d.leq(e)]
        rest = [d for d in self.coeffs if not d.leq(e)]
        return below, rest

    def cond_law(self, e, retained):
        below, rest = self._split(e)
        shift = 0.0
        for d in below:
            c = self.coeffs[d]
            if c != 0.0:
                shift = shift + c * retained[d][..., 0]
        return UniformSumLaw(shift, [self.coeffs[d] for d in rest])

    def marginal_law(self):
        return UniformSumLaw(0.0, list(self.coeffs.values()))


class InteractionModel(SEModel):
    """X_i = prod over k of U_{i*E_k}: pure interaction of first-layer factors.

    Conditional on e, the retained first-layer factors multiply out and the
    rest remain an independent product of uniforms.
    """

    def __init__(self, K):
        self.K = int(K)
        self.layer1 = [e for e in all_evectors(self.K) if e.k == 1]
        self.description = f"interaction-K{self.K}"
        self.range_hint = (0.0, 1.0)

    def tau(self, factors):
        prod = 1.0
        for e in self.layer1:
            prod = prod * factors[e][..., 0]
        return prod

    def cond_law(self, e, retained):
        scale = 1.0
        m = self.K
        for d in self.layer1:
            if d.leq(e):
                scale = scale * retained[d][..., 0]
                m -= 1
        return UniformProductLaw(scale, m)

    def marginal_law(self):
        return UniformProductLaw(1.0, self.K)


class OpaqueModel(SEModel):
    """Smooth nonlinear tau with no analytic conditional structure.

    Exists to exercise the generic inner Monte Carlo projection path; the
    exact functional form is unimportant as long as every factor matters.
    """

    def __init__(self, K, factor_dim=1):
        self.K = int(K)
        self.factor_dim = int(factor_dim)
        self.description = f"opaque-K{self.K}"
        self.range_hint = (-1.5, 1.5)

    def tau(self, factors):
        s = 0.0
        p = 1.0
        for e, u in factors.items():
            w = 1.0 / (1.0 + e.k)
            s = s + w * u[..., 0]
            if e.k == 1:
                p = p * (0.25 + 0.75 * u[..., 0])
        return np.tanh(s - 0.8) + 0.4 * np.sin(2.0 * np.pi * p)


_MODEL_BUILDERS = {
    "additive": AdditiveModel,
    "interaction": InteractionModel,
    "opaque": OpaqueModel,
}


def make_model(name, K, **kwargs):
    """Build a model by name: additive, interaction, or opaque."""
    try:
        builder = _MODEL_BUILDERS[name]
    except KeyError:
        raise ConfigError(f"unknown model {name!r}; choose from {sorted(_MODEL_BUILDERS)}")
    return builder(K, **kwargs)


# ---------------------------------------------------------------------------
# sampling


@dataclass
class SampleArray:
    """One realized array: values[i1-1, ..., iK-1] = X_i."""

    shape: Shape
    seed: int
    values: np.ndarray
    description: str = ""

    def value_at(self, coords):
        if len(coords) != self.shape.K:
            raise ConfigError("index tuple length does not match shape")
        return self.values[tuple(int(c) - 1 for c in coords)]

    def to_csv(self, fileobj):
        """Rows i_1, ..., i_K, x in lexicographic index order."""
        writer = csv.writer(fileobj)
        writer.writerow([f"i_{k + 1}" for k in range(self.shape.K)] + ["x"])
        full = index_set(self.shape, EVector((1,) * self.shape.K))
        flat = self.values.reshape(-1)
        for row, x in zip(full.tolist(), flat):
            writer.writerow(row + [repr(float(x))])


def all_factor_grids(shape, seed, factor_dim=1):
    """Factor grids for every nonzero direction, keyed by EVector."""
    return {e: factor_grid(shape, seed, e, factor_dim) for e in all_evectors(shape.K)}


def marginal_draws(model, n, seed):
    """n independent draws of a single sample point X (fresh factors each)."""
    idx = np.arange(n, dtype=np.uint64)[:, None]
    factors = {}
    for e in all_evectors(model.K):
        key = kernels.derive(seed, TAG_MEAN, ecode(e))
        factors[e] = kernels.uniform_tuples(key, idx, model.factor_dim)
    return np.asarray(model.tau(factors), dtype=np.float64)


def sample_array(model, shape, seed):
    """Realize the array X_i = tau(factors) for every i in the lattice."""
    if model.K != shape.K:
        raise ConfigError(f"model K={model.K} does not match shape K={shape.K}")
    factors = all_factor_grids(shape, seed, model.factor_dim)
    values = np.broadcast_to(np.asarray(model.tau(factors), dtype=np.float64), shape.dims)
    return SampleArray(shape=shape, seed=int(seed), values=values.copy(), description=model.description)


def permuted_sample(model, shape, seed, perms):
    """The relabeled array {X_{pi(i)}}: factors are looked up at permuted indices."""
    if model.K != shape.K:
        raise ConfigError(f"model K={model.K} does not match shape K={shape.K}")
    if len(perms) != shape.K:
        raise ConfigError(f"need {shape.K} permutations, got {len(perms)}")
    maps = []
    for k, perm in enumerate(perms):
        p = np.asarray(perm, dtype=np.int64)
        if sorted(p.tolist()) != list(range(1, shape.dims[k] + 1)):
            raise ConfigError(f"perms[{k}] is not a permutation of 1..{shape.dims[k]}")
        maps.append(p)
    factors = {}
    for e in all_evectors(shape.K):
        coords = index_set(shape, e).copy()
        for j in e.support:
            coords[:, j] = maps[j][coords[:, j] - 1]
        u = kernels.uniform_tuples(factor_subkey(seed, e), coords, model.factor_dim)
        factors[e] = u.reshape(broadcast_dims(shape, e) + (model.factor_dim,))
    values = np.broadcast_to(np.asarray(model.tau(factors), dtype=np.float64), shape.dims)
    return SampleArray(shape=shape, seed=int(seed), values=values.copy(), description=model.description)
