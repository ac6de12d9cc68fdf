"""Projection decomposition of sample means over multi-index arrays.

For a direction e, the conditional projection P_e f at index i is the
expectation of f(X_i) given the factors {U_{i*e'}}_{e' <= e}. Recursively
subtracting the projections of all strictly smaller nonzero directions gives
pi_e f, and averaging pi_e f over I_{N,e} gives the component H_N^e(f). The
components sum to the sample mean exactly: conditioning on everything
returns f(X_i) itself, and the recursion telescopes.

That telescoping survives inner Monte Carlo: each P_e grid is computed once
per decomposition and reused by every direction above it, and the inner
draws are keyed by a hash of the retained factor values, so equal
conditioning content always produces the same estimate.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError
from .fclass import ComboFn
from .lattice import EVector, Shape, all_evectors, sub_evectors
from .sampler import TAG_INNER, TAG_MEAN, all_factor_grids, ecode, marginal_draws

_FULL_CACHE_DRAWS = 10**6
_mean_cache = weakref.WeakKeyDictionary()


def centered_fn(model, f, mc_draws=_FULL_CACHE_DRAWS, seed=0xCE17):
    """f minus E f(X), using the marginal law when analytic, else cached MC."""
    law = model.marginal_law()
    if law is not None:
        mu = f.project(law)
        if mu is not None:
            mu = float(np.asarray(mu))
            if mu == 0.0:
                return f, 0.0
            return ComboFn([(1.0, f)], const=-mu, label=f"{f.label} ctr"), mu
    per_model = _mean_cache.setdefault(model, {})
    key = (f.label, mc_draws, seed)
    if key not in per_model:
        per_model[key] = float(np.mean(f(marginal_draws(model, mc_draws, seed))))
    mu = per_model[key]
    return ComboFn([(1.0, f)], const=-mu, label=f"{f.label} ctr"), mu


@dataclass(frozen=True)
class FactorAssignment:
    """Retained conditioning factors for one direction at one index."""

    e: EVector
    retained: dict

    def __post_init__(self):
        expected = set(sub_evectors(self.e))
        got = set(self.retained)
        if got != expected:
            raise ConfigError(
                f"retained factors must cover exactly the nonzero directions <= {self.e}; "
                f"missing {sorted(d.bitstring for d in expected - got)}, "
                f"extra {sorted(d.bitstring for d in got - expected)}"
            )
        clean = {}
        for d, val in self.retained.items():
            arr = np.asarray(val, dtype=np.float64)
            if arr.ndim == 0:
                arr = arr[None]
            clean[d] = arr
        object.__setattr__(self, "retained", clean)


def _inner_site_keys(e, retained, lat):
    """Per-site hashes of the retained factor values, for inner draw keying."""
    n = int(np.prod(lat)) if lat else 1
    base = kernels.derive(0, TAG_INNER, ecode(e))
    h = np.full(n, np.uint64(base), dtype=np.uint64)
    if retained:
        cols = np.concatenate(
            [
                np.broadcast_to(retained[d], lat + retained[d].shape[-1:]).reshape(n, -1)
                for d in sorted(retained, key=lambda d: d.bitstring)
            ],
            axis=1,
        )
        h = kernels.hash_float_columns(h, cols)
    return h


class _DirectionContext:
    """Projection machinery for one direction, shared across many functions.

    The conditional law and (lazily) the inner Monte Carlo sample values are
    function-independent, so evaluating P_e f for a whole skeleton costs one
    completion draw plus one cheap pass per function.
    """

    def __init__(self, model, e, factors, inner_draws):
        self.model = model
        self.e = e
        self.inner_draws = int(inner_draws)
        self.retained = {d: factors[d] for d in sub_evectors(e)}
        self.law = model.cond_law(e, self.retained)
        self.full = all(b == 1 for b in e.bits)
        self.lat = np.broadcast_shapes(*(a.shape[:-1] for a in self.retained.values()))
        self._samples = None

    def _sample_values(self):
        """(values, exact): points to average f over at each lattice site."""
        if self._samples is not None:
            return self._samples
        if self.full:
            # conditioning on everything: no integration left
            vals = np.asarray(self.model.tau(self.retained), dtype=np.float64)
            self._samples = (np.broadcast_to(vals, self.lat), True)
            return self._samples
        if self.inner_draws < 1:
            raise ConfigError(
                f"no analytic projection for {self.model.description}; need inner_draws >= 1"
            )
        lat = self.lat
        n = int(np.prod(lat)) if lat else 1
        fd = self.model.factor_dim
        h = _inner_site_keys(self.e, self.retained, lat)
        completion = {
            d: np.broadcast_to(a, lat + a.shape[-1:]).reshape((n, 1, fd))
            for d, a in self.retained.items()
        }
        for d in all_evectors(self.e.K):
            if not d.leq(self.e):
                hd = kernels.hash_tuples(
                    0, np.column_stack([h, np.full(n, ecode(d), dtype=np.uint64)])
                )
                completion[d] = kernels.uniform_block(hd, self.inner_draws * fd).reshape(
                    n, self.inner_draws, fd
                )
        x = np.asarray(self.model.tau(completion), dtype=np.float64)
        self._samples = (np.broadcast_to(x, (n, self.inner_draws)), False)
        return self._samples

    def project(self, f):
        """(P_e f grid, se grid or None on exact paths)."""
        if self.law is not None:
            p = f.project(self.law)
            if p is not None:
                return np.asarray(p, dtype=np.float64), None
        x, exact = self._sample_values()
        vals = np.broadcast_to(np.asarray(f(x), dtype=np.float64), x.shape)
        if exact:
            return vals, None
        mean = vals.mean(axis=1).reshape(self.lat)
        if self.inner_draws > 1:
            se = (vals.std(axis=1, ddof=1) / np.sqrt(self.inner_draws)).reshape(self.lat)
        else:
            se = np.zeros(self.lat)
        return mean, se


def direction_contexts(model, e, factors, inner_draws):
    """One reusable context per nonzero direction <= e."""
    return {d: _DirectionContext(model, d, factors, inner_draws) for d in sub_evectors(e)}


def _pe_grid(model, f, e, factors, inner_draws):
    """P_e f over the broadcast lattice of the retained factor arrays.

    Returns (values, se): se is None on exact paths. ``factors`` must hold
    arrays (trailing factor axis) for at least all nonzero directions <= e;
    for the all-ones direction it must hold every direction (tau needs them).
    """
    return _DirectionContext(model, e, factors, inner_draws).project(f)


def projection_grids(model, f, e, factors, inner_draws, contexts=None):
    """All P_d f and pi_d f grids for nonzero d <= e, memoized in one pass.

    Returns (p, pi, se) dicts keyed by direction. The pi recursion reuses
    each P grid exactly once per direction, which is what makes the
    decomposition identity hold to machine precision. Pass ``contexts`` from
    :func:`direction_contexts` to share laws and inner draws across calls.
    """
    if contexts is None:
        contexts = direction_contexts(model, e, factors, inner_draws)
    p, pi, se = {}, {}, {}
    for d in sub_evectors(e):  # ascending layer order
        p[d], se[d] = contexts[d].project(f)
        acc = np.asarray(p[d], dtype=np.float64)
        for d2 in sub_evectors(d, strict=True):
            acc = acc - pi[d2]
        pi[d] = acc
    return p, pi, se


def conditional_projection(model, f, assignment, inner_draws=1000):
    """P_e f at one retained-factor assignment, with its inner standard error."""
    vals, se = _pe_grid(model, f, assignment.e, assignment.retained, inner_draws)
    err = 0.0 if se is None else float(np.asarray(se).reshape(()))
    return float(np.asarray(vals).reshape(())), err


def pi_projection(model, f, assignment, inner_draws=1000):
    """pi_e f at one retained-factor assignment (recursive projection)."""
    _, pi, _ = projection_grids(model, f, assignment.e, assignment.retained, inner_draws)
    return float(np.asarray(pi[assignment.e]).reshape(()))


@dataclass
class ComponentMap:
    """All components H_N^e(f) of one realized array, plus the sample mean."""

    shape: Shape
    f_label: str
    components: dict  # EVector -> float
    sample_mean: float

    def component_sum(self):
        return float(sum(self.components.values()))

    def identity_gap(self):
        """|sum of components - sample mean|; 0 up to rounding."""
        return abs(self.component_sum() - self.sample_mean)

    def to_json_dict(self):
        out = {e.bitstring: float(v) for e, v in self.components.items()}
        out["sample_mean"] = float(self.sample_mean)
        return out


def decompose(model, f, shape, seed, inner_draws=1000):
    """Components H_N^e(f) for every nonzero direction, from one factor draw.

    f is centered first (analytic mean when available, cached Monte Carlo
    otherwise); the returned sample_mean is the centered sample mean E_N f.
    """
    if model.K != shape.K:
        raise ConfigError(f"model K={model.K} does not match shape K={shape.K}")
    fc, _ = centered_fn(model, f)
    factors = all_factor_grids(shape, seed, model.factor_dim)
    full = EVector((1,) * shape.K)
    p, pi, _ = projection_grids(model, fc, full, factors, inner_draws)
    components = {e: float(pi[e].mean()) for e in sub_evectors(full)}
    sample_mean = float(np.broadcast_to(p[full], shape.dims).mean())
    return ComponentMap(shape=shape, f_label=f.label, components=components, sample_mean=sample_mean)


@dataclass
class DegeneracyReport:
    e: EVector
    drop_coordinate: int
    mean: float
    se: float
    replications: int
    passed: bool


def degeneracy_check(model, f, e, drop_coordinate, replications=500, seed=0, inner_draws=400):
    """Conditional-mean-zero check for pi_e f when one active coordinate varies.

    Factors whose direction avoids ``drop_coordinate`` (1-based) are frozen;
    the rest are redrawn ``replications`` times. Passes when the conditional
    mean of pi_e f is within 4 standard errors of zero.
    """
    if replications < 2:
        raise ConfigError("need at least 2 replications")
    j = int(drop_coordinate) - 1
    if j not in e.support:
        raise ConfigError(f"coordinate {drop_coordinate} is not active in {e.bitstring}")
    fc, _ = centered_fn(model, f)
    fd = model.factor_dim
    factors = {}
    for d in sub_evectors(e):
        key = kernels.derive(seed, TAG_MEAN, 0xD6, ecode(d))
        if j not in d.support:
            factors[d] = kernels.uniform_tuples(key, np.zeros((1, 1), dtype=np.uint64), fd)
        else:
            idx = np.arange(replications, dtype=np.uint64)[:, None]
            factors[d] = kernels.uniform_tuples(key, idx, fd)
    _, pi, _ = projection_grids(model, fc, e, factors, inner_draws)
    vals = np.broadcast_to(pi[e], (replications,))
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(replications))
    return DegeneracyReport(
        e=e,
        drop_coordinate=int(drop_coordinate),
        mean=mean,
        se=se,
        replications=replications,
        passed=bool(abs(mean) <= 4.0 * se + 1e-15),
    )
