"""Monte Carlo suprema of the empirical process and its components.

The estimators here feed the bound checks: q-th moments of the component
suprema max_theta |H_N^e(f_theta)| (the left side of the global inequality,
normalized by |I_{N,e}|^{1/2}), and the localization quantities sigma_e,
delta_e, M_e that drive the local one. Everything is plain Monte Carlo with
derived per-replication seeds, so estimates are reproducible and replications
could run in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError
from .fclass import evaluate
from .hoeffding import centered_fn, direction_contexts, projection_grids
from .lattice import broadcast_dims, sub_evectors
from .sampler import TAG_REP, TAG_SIGNS, all_factor_grids, ecode

# domain tags for the localization draws (factor tags live in sampler)
TAG_LOC = 0xA6
TAG_DIAG = 0xA7


@dataclass
class MomentEstimate:
    """|I_{N,e}|^{1/2} (E max_theta |H_N^e|^q)^{1/q} with its Monte Carlo error."""

    value: float
    std_error: float
    replications: int
    q: float

    def __post_init__(self):
        if self.value < 0 or self.std_error < 0:
            raise ConfigError("moment estimates must be non-negative")
        if self.replications < 2:
            raise ConfigError("need at least 2 replications")


@dataclass
class LocalizationStats:
    """Weak-variance constant, envelope norms and ratio for the local bound."""

    sigma_e: float
    envelope_l2: float
    delta_e: float
    m_e_l2: float


def empirical_process_sup(sample, fclass):
    """(sqrt(n)/N) max_theta |sum_i f_theta(X_i)| over the realized array.

    n is the smallest dimension and N the total index count; exact over the
    finite skeleton. The class is expected to be centered already.
    """
    points = sample.values.reshape(-1)
    rows, _ = evaluate(fclass, points)
    sums = np.abs(rows.sum(axis=1))
    n = sample.shape.min_dim
    return float(np.sqrt(n) / sample.shape.total * sums.max())


def component_sup(model, fclass, shape, e, seed, inner_draws=400):
    """max_theta |H_N^e(f_theta)| from one shared factor realization."""
    factors = all_factor_grids(shape, seed, model.factor_dim)
    contexts = direction_contexts(model, e, factors, inner_draws)
    best = 0.0
    for f in fclass.fns:
        fc, _ = centered_fn(model, f)
        _, pi, _ = projection_grids(model, fc, e, factors, inner_draws, contexts=contexts)
        best = max(best, abs(float(pi[e].mean())))
    return best


def sup_replicates(model, fclass, shape, e, replications, seed, inner_draws=400):
    """Component suprema across independent factor realizations, in rep order."""
    if replications < 2:
        raise ConfigError("need at least 2 replications")
    sups = np.empty(replications)
    for r in range(replications):
        rep_seed = kernels.derive(seed, TAG_REP, r)
        sups[r] = component_sup(model, fclass, shape, e, rep_seed, inner_draws)
    return sups


def index_count_root(shape, e):
    """|I_{N,e}|^{1/2}: the normalization in front of the q-th moment."""
    n_e = 1
    for j in e.support:
        n_e *= shape.dims[j]
    return float(np.sqrt(n_e))


def moment_from_sups(sups, scale, q):
    """Delta-method moment estimate from raw supremum replicates."""
    if not 1 <= q <= 8:
        raise ConfigError(f"moment order must be in [1, 8], got {q}")
    sups = np.asarray(sups, dtype=np.float64)
    r = len(sups)
    powers = sups**q
    m = powers.mean()
    if m <= 0.0:
        return MomentEstimate(value=0.0, std_error=0.0, replications=r, q=float(q))
    value = scale * m ** (1.0 / q)
    se = scale * m ** (1.0 / q - 1.0) / q * powers.std(ddof=1) / np.sqrt(r)
    return MomentEstimate(value=float(value), std_error=float(se), replications=r, q=float(q))


def component_moment(model, fclass, shape, e, q, replications, seed, inner_draws=400):
    """Normalized q-th moment of the component supremum over R realizations."""
    sups = sup_replicates(model, fclass, shape, e, replications, seed, inner_draws)
    return moment_from_sups(sups, index_count_root(shape, e), q)


def _retained_batch(e, factor_dim, count, seed, tag, extra=1):
    """Fresh retained-factor draws: arrays (count, extra, fd) per direction."""
    idx = np.arange(count * extra, dtype=np.uint64)[:, None]
    out = {}
    for d in sub_evectors(e):
        key = kernels.derive(seed, tag, ecode(d))
        u = kernels.uniform_tuples(key, idx, factor_dim)
        out[d] = u.reshape(count, extra, factor_dim)
    return out


def conditional_l2_norms(model, fclass, e, draws, seed, inner_draws=400):
    """(max_theta ||P_e f_theta||_2, ||P_e F||_2) by Monte Carlo over fresh factors."""
    if draws < 2:
        raise ConfigError("need at least 2 draws")
    fd = model.factor_dim
    flat = _retained_batch(e, fd, draws, seed, TAG_LOC)
    squeezed = {d: a.reshape(draws, fd) for d, a in flat.items()}
    ctx = direction_contexts(model, e, squeezed, inner_draws)[e]

    def l2(fn):
        vals = np.broadcast_to(ctx.project(fn)[0], (draws,))
        return float(np.sqrt(np.mean(vals**2)))

    return max(l2(f) for f in fclass.fns), l2(fclass.envelope)


def localization_stats(
    model, fclass, shape, e, replications=200, seed=0, inner_draws=400, sigma_override=None
):
    """sigma_e, ||P_e F||_2, delta_e and the diagonal maximum norm ||M_e||_2.

    sigma_e is the largest Monte Carlo L2 norm of P_e f over the skeleton
    (or the user's override), clipped to the admissible interval (0, ||P_e F||_2];
    M_e maximizes P_e F over the n diagonal index patterns (t,...,t) masked
    by e, with n the smallest dimension.
    """
    if replications < 2:
        raise ConfigError("need at least 2 replications")
    fd = model.factor_dim

    sigma_raw, envelope_l2 = conditional_l2_norms(
        model, fclass, e, replications, seed, inner_draws
    )
    if envelope_l2 <= 0:
        raise ConfigError("envelope has zero conditional L2 norm; localization undefined")
    if sigma_override is not None:
        sigma_raw = sigma_override
    sigma_e = float(min(max(sigma_raw, 0.0), envelope_l2))
    delta_e = sigma_e / envelope_l2

    n = shape.min_dim
    diag = _retained_batch(e, fd, replications, seed, TAG_DIAG, extra=n)
    ctx_diag = direction_contexts(model, e, diag, inner_draws)[e]
    pf = np.broadcast_to(ctx_diag.project(fclass.envelope)[0], (replications, n))
    m_e_l2 = float(np.sqrt(np.mean(pf.max(axis=1) ** 2)))

    return LocalizationStats(
        sigma_e=sigma_e, envelope_l2=envelope_l2, delta_e=delta_e, m_e_l2=m_e_l2
    )


def symmetrized_sup_diagnostic(model, fclass, shape, e, seed, inner_draws=400, flip=True):
    """Component supremum with independent coordinate-wise sign flips.

    Each index tuple gets the product of per-coordinate signs eps_{j, i_j}
    over active j, attached to its pi_e value before averaging. With
    ``flip=False`` every sign is +1 and the value equals component_sup.
    """
    factors = all_factor_grids(shape, seed, model.factor_dim)
    contexts = direction_contexts(model, e, factors, inner_draws)
    eps = np.ones(broadcast_dims(shape, e))
    if flip:
        for j in e.support:
            h = np.array([kernels.derive(seed, TAG_SIGNS, j + 1)], dtype=np.uint64)
            u = kernels.uniform_block(h, shape.dims[j])[0]
            signs = np.where(u < 0.5, -1.0, 1.0)
            axes = [1] * shape.K
            axes[j] = shape.dims[j]
            eps = eps * signs.reshape(axes)
    best = 0.0
    for f in fclass.fns:
        fc, _ = centered_fn(model, f)
        _, pi, _ = projection_grids(model, fc, e, factors, inner_draws, contexts=contexts)
        best = max(best, abs(float((eps * pi[e]).mean())))
    return best
