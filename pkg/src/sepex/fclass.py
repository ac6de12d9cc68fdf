"""Function classes, empirical L2 geometry, entropy integrals, Orlicz norms.

A function class is a finite skeleton of real functions f_theta with a
pointwise envelope F >= sup |f_theta|. Covering numbers are computed under
finite discrete measures with greedy internal covers (centers drawn from the
class itself), which upper-bound the minimal covering number, so empirical
entropy stays conservative. The entropy integral

    J(delta) = integral over [0, delta] of
               sup_Q (1 + log N(F, L2(Q), tau * ||F||_Q))^(k/2) dtau

is evaluated two ways: empirically (sup over a supplied family of measures,
a documented lower-bound approximation of the sup over all Q) and
analytically from VC characteristics (A, v), where the covering bound
(A/tau)^v gives an integrand with a closed singularity at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import kernels
from .errors import ConfigError

# ---------------------------------------------------------------------------
# function atoms
#
# Atoms know how to integrate themselves against a conditional law exposing
# mean()/cdf() (see sepex.sampler), which is what makes projections of the
# built-in classes exact instead of Monte Carlo.


class Fn:
    """A real function of one sample point, vectorized over numpy arrays."""

    label = "fn"

    def __call__(self, x):
        raise NotImplementedError

    def project(self, law):
        """E[f(X)] when X follows ``law``; None when not analytic."""
        return None


@dataclass(frozen=True)
class AffineFn(Fn):
    a: float = 1.0
    b: float = 0.0

    def __call__(self, x):
        return self.a * np.asarray(x, dtype=np.float64) + self.b

    def project(self, law):
        return self.a * law.mean() + self.b

    @property
    def label(self):
        return f"affine({self.a:g},{self.b:g})"


@dataclass(frozen=True)
class IndicatorFn(Fn):
    """x -> 1(x <= theta)."""

    theta: float

    def __call__(self, x):
        return (np.asarray(x, dtype=np.float64) <= self.theta).astype(np.float64)

    def project(self, law):
        return law.cdf(self.theta)

    @property
    def label(self):
        return f"ind(<= {self.theta:g})"


class ComboFn(Fn):
    """const + sum_i coef_i * atom_i; projections distribute over the sum."""

    def __init__(self, terms, const=0.0, label=None):
        self.terms = [(float(c), fn) for c, fn in terms]
        self.const = float(const)
        self._label = label

    def __call__(self, x):
        out = np.full(np.shape(x), self.const, dtype=np.float64)
        for c, fn in self.terms:
            out = out + c * fn(x)
        return out

    def project(self, law):
        out = self.const
        for c, fn in self.terms:
            p = fn.project(law)
            if p is None:
                return None
            out = out + c * p
        return out

    @property
    def label(self):
        if self._label:
            return self._label
        inner = " + ".join(f"{c:g}*{fn.label}" for c, fn in self.terms)
        return f"[{self.const:g} + {inner}]"


# ---------------------------------------------------------------------------
# classes


@dataclass
class FunctionClass:
    """Finite skeleton with envelope and optional VC characteristics (A, v)."""

    fns: list
    envelope: Fn
    vc: tuple = None
    label: str = ""
    centered: bool = False

    def __post_init__(self):
        if not self.fns:
            raise ConfigError("function class skeleton is empty")
        if self.vc is not None:
            A, v = self.vc
            if A < math.e or v < 1:
                raise ConfigError(f"VC characteristics need A >= e and v >= 1, got {self.vc}")
            self.vc = (float(A), float(v))

    def __len__(self):
        return len(self.fns)

    def scaled(self, c):
        """The class {c * f_theta} with envelope |c| * F."""
        fns = [ComboFn([(c, f)]) for f in self.fns]
        env = ComboFn([(abs(c), self.envelope)])
        return FunctionClass(fns=fns, envelope=env, vc=self.vc,
                             label=f"{self.label}*{c:g}", centered=self.centered)


def evaluate(fclass, points):
    """Skeleton evaluations as a (|skeleton|, n) matrix plus the envelope row."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1)
    rows = np.empty((len(fclass.fns), len(pts)), dtype=np.float64)
    for i, fn in enumerate(fclass.fns):
        try:
            rows[i] = np.asarray(fn(pts), dtype=np.float64)
        except Exception as exc:
            for x in pts:
                try:
                    fn(x)
                except Exception:
                    raise RuntimeError(f"evaluator {fn.label} failed at x={x!r}: {exc}") from exc
            raise RuntimeError(f"evaluator {fn.label} failed: {exc}") from exc
    env = np.asarray(fclass.envelope(pts), dtype=np.float64)
    return rows, env


def envelope_excess(matrix, env_row):
    """Largest amount by which |f_theta(x)| exceeds F(x); <= 0 when dominated."""
    return float((np.abs(matrix) - env_row[None, :]).max())


# ---------------------------------------------------------------------------
# built-in classes


def singleton_class(fn, envelope, label="singleton"):
    return FunctionClass(fns=[fn], envelope=envelope, label=label)


def halfinterval_class(model=None, n_params=101, support=None, centered=True):
    """Centered half-interval indicators {1(x <= theta) - P(X <= theta)}.

    Thresholds run over the model's sample range (or an explicit support
    interval). Centering uses the model's marginal law when analytic and a
    fixed-seed Monte Carlo mean otherwise. The envelope is the constant 1.
    """
    if support is None:
        if model is None or getattr(model, "range_hint", None) is None:
            raise ConfigError("need a model with a range hint or an explicit support")
        support = model.range_hint
    if centered and model is None:
        raise ConfigError("centering requires a model")
    lo, hi = float(support[0]), float(support[1])
    if not lo < hi:
        raise ConfigError(f"empty support ({lo}, {hi})")
    thetas = np.linspace(lo, hi, int(n_params))
    fns = []
    for theta in thetas:
        atom = IndicatorFn(float(theta))
        if centered:
            p = _marginal_mean(model, atom) if model is not None else 0.0
            fns.append(ComboFn([(1.0, atom)], const=-p, label=f"ind(<= {theta:g}) ctr"))
        else:
            fns.append(atom)
    return FunctionClass(fns=fns, envelope=AffineFn(0.0, 1.0),
                         label="half-interval", centered=centered)


def localized_class(model, theta0, radius, n_params=41):
    """Centered indicator differences {1(x <= theta) - 1(x <= theta0)}.

    Thetas stay within ``radius`` of ``theta0``, so the class's weak variance
    shrinks with the radius while the envelope stays the constant 1. This is
    the knob for driving delta = sigma / ||F|| small.
    """
    if radius <= 0:
        raise ConfigError("radius must be positive")
    base = IndicatorFn(float(theta0))
    p0 = _marginal_mean(model, base)
    thetas = np.linspace(theta0 - radius, theta0 + radius, int(n_params))
    fns = []
    for theta in thetas:
        atom = IndicatorFn(float(theta))
        p = _marginal_mean(model, atom)
        fns.append(
            ComboFn([(1.0, atom), (-1.0, base)], const=-(p - p0),
                    label=f"ind-diff({theta:g},{theta0:g})")
        )
    return FunctionClass(fns=fns, envelope=AffineFn(0.0, 1.0),
                         label=f"localized(r={radius:g})", centered=True)


def _marginal_mean(model, fn, draws=200_000, seed=0x5EED):
    """E f(X) via the marginal law when analytic, else fixed-seed Monte Carlo."""
    law = model.marginal_law()
    if law is not None:
        p = fn.project(law)
        if p is not None:
            return float(np.asarray(p))
    from .sampler import marginal_draws

    return float(np.mean(fn(marginal_draws(model, draws, seed))))


# ---------------------------------------------------------------------------
# empirical measures and covering numbers


@dataclass
class EmpiricalMeasure:
    """Finite discrete measure on sample points."""

    points: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1)
        if len(self.points) == 0:
            raise ConfigError("empirical measure needs at least one point")
        if self.weights is None:
            self.weights = np.full(len(self.points), 1.0 / len(self.points))
        else:
            self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(self.weights) != len(self.points):
            raise ConfigError("weights and points differ in length")
        if (self.weights < 0).any():
            raise ConfigError("weights must be non-negative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ConfigError("weights must sum to 1")

    def norm(self, values):
        """L2 norm of a function given by its values at the support points."""
        return math.sqrt(float(np.sum(self.weights * np.asarray(values) ** 2)))


def _dist2_matrix(matrix, measure):
    """Pairwise squared L2(Q) distances between skeleton rows."""
    weighted = matrix * measure.weights[None, :]
    gram = weighted @ matrix.T
    diag = np.diag(gram)
    d2 = diag[:, None] + diag[None, :] - 2.0 * gram
    return np.clip(d2, 0.0, None)


def covering_number(matrix, measure, radius):
    """Greedy internal cover count at the given L2(Q) radius."""
    if radius <= 0:
        raise ConfigError("covering radius must be positive")
    d2 = _dist2_matrix(matrix, measure)
    return int(len(kernels.greedy_cover(d2, radius * radius)))


def _cover_step_function(matrix, env_row, measure):
    """Cover counts as a step function of the normalized radius tau.

    Returns (breaks, counts): counts[i] is the greedy cover size for tau in
    [breaks[i-1], breaks[i]) with breaks[-1] = inf; the cover composition can
    only change where tau * ||F||_Q crosses a pairwise distance, so this is
    exact for all tau > 0.
    """
    fnorm = measure.norm(env_row)
    d2 = _dist2_matrix(matrix, measure)
    if fnorm == 0.0:
        return np.array([np.inf]), np.array([1], dtype=np.int64)
    d = np.unique(np.sqrt(d2[np.triu_indices_from(d2, k=1)])) / fnorm
    d = d[d > 0]
    breaks = np.append(d, np.inf)
    counts = np.empty(len(breaks), dtype=np.int64)
    lo = 0.0
    for i, b in enumerate(breaks):
        mid = lo + 0.5 if np.isinf(b) else 0.5 * (lo + b)
        counts[i] = len(kernels.greedy_cover(d2, (mid * fnorm) ** 2))
        lo = b
    return breaks, counts


def _max_log_cover(step_funcs, taus):
    """max over measures of log N at each tau, from precomputed step functions."""
    taus = np.asarray(taus, dtype=np.float64)
    best = np.zeros(taus.shape)
    for breaks, counts in step_funcs:
        idx = np.searchsorted(breaks, taus, side="right")
        np.maximum(best, np.log(counts[idx].astype(np.float64)), out=best)
    return best


def entropy_integral_empirical(fclass, measures, delta, k):
    """J(delta) with sup over the supplied measure family (lower bound of J).

    The integrand is piecewise constant between normalized pairwise
    distances, so the integral is computed exactly from the breakpoints; the
    result carries no quadrature error beyond float rounding.
    """
    if not 0 < delta <= 1:
        raise ConfigError(f"delta must lie in (0, 1], got {delta}")
    if not measures:
        raise ConfigError("need at least one measure")
    steps = []
    cuts = [np.array([0.0, delta])]
    for q in measures:
        matrix, env = evaluate(fclass, q.points)
        breaks, counts = _cover_step_function(matrix, env, q)
        steps.append((breaks, counts))
        cuts.append(breaks[(breaks > 0) & (breaks < delta)])
    grid = np.unique(np.concatenate(cuts))
    mids = 0.5 * (grid[:-1] + grid[1:])
    integrand = (1.0 + _max_log_cover(steps, mids)) ** (k / 2.0)
    return float(np.sum(np.diff(grid) * integrand))


def entropy_integral_vc(A, v, k, delta):
    """J(delta) from the VC bound N <= (A/tau)^v, by adaptive quadrature.

    The tau -> 0 endpoint is tamed by substituting u = -log tau, turning the
    integral into int_{-log delta}^inf (1 + v (log A + u))^(k/2) e^(-u) du.
    """
    if A < math.e:
        raise ConfigError(f"need A >= e, got {A}")
    if v < 1:
        raise ConfigError(f"need v >= 1, got {v}")
    if not 0 < delta <= 1:
        raise ConfigError(f"delta must lie in (0, 1], got {delta}")
    logA = math.log(A)
    half_k = k / 2.0

    def g(u):
        return (1.0 + v * (logA + u)) ** half_k * math.exp(-u)

    val, err = integrate.quad(g, -math.log(delta), np.inf, epsabs=1e-10, epsrel=1e-10, limit=200)
    if err > 1e-8:
        raise RuntimeError(f"entropy quadrature error {err:g} above tolerance")
    return float(val)


@dataclass
class EntropyProfile:
    """J(delta) sampled on a grid, with enough context to re-evaluate."""

    deltas: np.ndarray
    values: np.ndarray
    k: int
    method: str  # "empirical" or "vc-analytic"
    A: float = None
    v: float = None

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.deltas.shape != self.values.shape or self.deltas.ndim != 1:
            raise ConfigError("profile needs matching 1-d delta and value grids")
        if (np.diff(self.deltas) <= 0).any():
            raise ConfigError("profile deltas must be strictly increasing")

    def evaluate(self, delta):
        """J at an arbitrary delta: exact for vc-analytic, interpolated otherwise."""
        if self.method == "vc-analytic" and self.A is not None:
            return entropy_integral_vc(self.A, self.v, self.k, delta)
        return float(np.interp(delta, self.deltas, self.values))

    def csv_rows(self):
        return [(float(d), float(val), self.method) for d, val in zip(self.deltas, self.values)]


def entropy_profile_vc(A, v, k, deltas):
    vals = [entropy_integral_vc(A, v, k, d) for d in deltas]
    return EntropyProfile(np.asarray(deltas, dtype=np.float64), np.asarray(vals),
                          k=k, method="vc-analytic", A=float(A), v=float(v))


def entropy_profile_empirical(fclass, measures, k, deltas):
    vals = [entropy_integral_empirical(fclass, measures, d, k) for d in deltas]
    return EntropyProfile(np.asarray(deltas, dtype=np.float64), np.asarray(vals),
                          k=k, method="empirical")


def fit_vc(fclass, measures, taus=None):
    """Fit VC characteristics (A, v) dominating the empirical cover counts.

    Least-squares slope of log N against log(1/tau) gives v (floored at 1);
    A is then pushed up until (A/tau)^v >= N(tau) at every probed tau, so the
    analytic entropy route upper-bounds the empirical one on the grid.
    """
    if taus is None:
        taus = np.geomspace(0.02, 1.0, 30)
    steps = []
    for q in measures:
        matrix, env = evaluate(fclass, q.points)
        steps.append(_cover_step_function(matrix, env, q))
    log_n = _max_log_cover(steps, taus)
    x = np.log(1.0 / taus)
    slope = 0.0
    if log_n.max() > 0:
        slope = float(np.polyfit(x, log_n, 1)[0])
    v = max(1.0, slope)
    A = max(math.e, float(np.max(taus * np.exp(log_n / v))))
    return A, v


# ---------------------------------------------------------------------------
# Orlicz utilities


def orlicz_norm(samples, beta):
    """Empirical psi_beta norm: inf C with mean(exp((|xi|/C)^beta) - 1) <= 1."""
    if beta <= 0:
        raise ConfigError(f"beta must be positive, got {beta}")
    x = np.abs(np.asarray(samples, dtype=np.float64).reshape(-1))
    if len(x) == 0:
        raise ConfigError("need at least one sample")
    top = float(x.max())
    if top == 0.0:
        return 0.0

    def mean_psi(c):
        z = (x / c) ** beta
        return float(np.mean(np.expm1(np.clip(z, None, 700.0))))

    hi = top / math.log(2.0) ** (1.0 / beta)  # mean psi <= 1 here
    lo = hi
    for _ in range(200):
        if mean_psi(lo) >= 1.0:
            break
        lo *= 0.5
    for _ in range(100):
        if hi - lo <= 1e-10 * hi:
            break
        mid = 0.5 * (lo + hi)
        if mean_psi(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class OrliczReport:
    beta: float
    q: float
    m: int
    lq_norm: float
    orlicz: float
    bound: float
    passed: bool


def check_orlicz_bound(samples, beta, q):
    """Empirical check that the L^q norm is within the factorial-Orlicz bound."""
    if q < 1:
        raise ConfigError(f"q must be >= 1, got {q}")
    if beta <= 0:
        raise ConfigError(f"beta must be positive, got {beta}")
    x = np.abs(np.asarray(samples, dtype=np.float64).reshape(-1))
    m = max(1, math.ceil(q / beta - 1e-12))
    lq = float(np.mean(x**q)) ** (1.0 / q)
    norm = orlicz_norm(x, beta)
    bound = math.factorial(m) ** (1.0 / (m * beta)) * norm
    return OrliczReport(beta=float(beta), q=float(q), m=m, lq_norm=lq, orlicz=norm,
                        bound=bound, passed=bool(lq <= bound * (1 + 1e-9)))


# ---------------------------------------------------------------------------
# J-property checks


@dataclass
class JPropertyReport:
    """Worst violation per property; all must clear the tolerance to pass."""

    violations: dict
    tol: float

    @property
    def worst(self):
        return max(self.violations.values())

    @property
    def passed(self):
        return {name: val <= self.tol for name, val in self.violations.items()}

    @property
    def ok(self):
        return self.worst <= self.tol


def check_J_properties(profile, tol=1e-6, cs=(2.0, 5.0)):
    """Check the four structural properties of an entropy-integral profile.

    (i) non-decreasing and concave along the grid, (ii) J(c*delta) <= c*J(delta)
    for c in ``cs``, (iii) delta -> J(delta)/delta non-increasing, and
    (iv) (x, y) -> J(sqrt(x/y))*sqrt(y) midpoint-concave as a function of two
    variables. Violations are reported in value units, 0 when a property
    holds exactly.
    """
    d = profile.deltas
    vals = profile.values
    if len(d) < 5:
        raise ConfigError("profile grid needs at least 5 points")

    viol = {}
    viol["monotone"] = max(0.0, float(np.max(vals[:-1] - vals[1:])))
    chord = vals[:-2] + (vals[2:] - vals[:-2]) * ((d[1:-1] - d[:-2]) / (d[2:] - d[:-2]))
    viol["concave"] = max(0.0, float(np.max(chord - vals[1:-1])))

    worst_sc = 0.0
    for c in cs:
        ok = d * c <= 1.0 + 1e-12
        for delta in d[ok]:
            worst_sc = max(worst_sc, profile.evaluate(min(c * delta, 1.0)) - c * profile.evaluate(delta))
    viol["scaling"] = worst_sc

    ratio = vals / d
    viol["ratio-monotone"] = max(0.0, float(np.max(ratio[1:] - ratio[:-1])))

    # joint concavity of h(x, y) = J(sqrt(x/y)) sqrt(y) via midpoints
    sub = d[np.linspace(0, len(d) - 1, min(8, len(d))).astype(int)]
    ys = np.array([0.25, 0.5, 0.75, 1.0])
    pts = [(float(dd * dd * y), float(y)) for dd in sub for y in ys]
    hs = {p: profile.evaluate(math.sqrt(p[0] / p[1])) * math.sqrt(p[1]) for p in pts}
    worst_joint = 0.0
    for i, p1 in enumerate(pts):
        for p2 in pts[i + 1 :]:
            xm, ym = 0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])
            hm = profile.evaluate(min(1.0, math.sqrt(xm / ym))) * math.sqrt(ym)
            worst_joint = max(worst_joint, 0.5 * (hs[p1] + hs[p2]) - hm)
    viol["joint-concave"] = worst_joint

    return JPropertyReport(violations=viol, tol=tol)
