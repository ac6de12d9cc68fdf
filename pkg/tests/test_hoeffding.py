import numpy as np
import pytest

from sepex import kernels
from sepex.errors import ConfigError
from sepex.fclass import AffineFn, Fn, IndicatorFn
from sepex.hoeffding import (
    ComponentMap,
    FactorAssignment,
    centered_fn,
    conditional_projection,
    decompose,
    degeneracy_check,
    pi_projection,
)
from sepex.lattice import EVector, Shape, all_evectors, sub_evectors
from sepex.sampler import (
    AdditiveModel,
    InteractionModel,
    OpaqueModel,
    all_factor_grids,
    ecode,
)

E10, E01, E11 = EVector((1, 0)), EVector((0, 1)), EVector((1, 1))


class _NoProject(Fn):
    """Same values as the wrapped function, but no analytic projection."""

    def __init__(self, inner):
        self.inner = inner
        self.label = f"mc({inner.label})"

    def __call__(self, x):
        return self.inner(x)


def _assignment(e, **values):
    retained = {EVector(tuple(int(b) for b in key)): v for key, v in values.items()}
    return FactorAssignment(e=e, retained=retained)


class TestConditionalProjection:
    def test_additive_first_layer_value(self):
        # conditioning on U_{(1,0)} = u leaves u + E[U_{(0,1)}] + E[U_{(1,1)}]
        model = AdditiveModel(2)
        f = AffineFn(1.0, -1.5)
        value, se = conditional_projection(model, f, _assignment(E10, **{"10": 0.7}))
        assert se == 0.0
        assert value == pytest.approx(0.7 - 0.5, abs=1e-15)

    def test_full_direction_returns_plain_value(self):
        model = AdditiveModel(2)
        f = AffineFn(1.0, -1.5)
        asg = _assignment(E11, **{"10": 0.2, "01": 0.4, "11": 0.9})
        value, se = conditional_projection(model, f, asg)
        assert se == 0.0
        assert value == pytest.approx(0.2 + 0.4 + 0.9 - 1.5, abs=1e-15)

    def test_indicator_projection_uses_conditional_cdf(self):
        model = InteractionModel(2)
        f = IndicatorFn(0.3)
        value, _ = conditional_projection(model, f, _assignment(E10, **{"10": 0.6}))
        # P(0.6 * U <= 0.3) = P(U <= 0.5)
        assert value == pytest.approx(0.5, abs=1e-12)

    def test_monte_carlo_agrees_with_analytic(self):
        model = InteractionModel(2)
        exact, _ = conditional_projection(model, IndicatorFn(0.3), _assignment(E10, **{"10": 0.6}))
        mc, se = conditional_projection(
            model, _NoProject(IndicatorFn(0.3)), _assignment(E10, **{"10": 0.6}), inner_draws=20000
        )
        assert se > 0
        assert abs(mc - exact) <= 4 * se

    def test_opaque_against_large_draw_oracle(self):
        model = OpaqueModel(2)
        f = AffineFn(1.0, 0.0)
        asg = _assignment(E01, **{"01": 0.37})
        value, se = conditional_projection(model, f, asg, inner_draws=10**4)

        m = 10**6
        idx = np.arange(m, dtype=np.uint64)[:, None]
        factors = {E01: np.full((m, 1), 0.37)}
        for d in (E10, E11):
            factors[d] = kernels.uniform_tuples(kernels.derive(99, ecode(d)), idx, 1)
        vals = np.asarray(model.tau(factors))
        oracle = vals.mean()
        oracle_se = vals.std(ddof=1) / np.sqrt(m)
        assert abs(value - oracle) <= 4 * np.hypot(se, oracle_se)

    def test_monte_carlo_is_deterministic(self):
        model = OpaqueModel(2)
        f = AffineFn(1.0, 0.0)
        asg = _assignment(E10, **{"10": 0.25})
        a = conditional_projection(model, f, asg, inner_draws=500)
        b = conditional_projection(model, f, asg, inner_draws=500)
        assert a == b

    def test_assignment_validates_retained_set(self):
        with pytest.raises(ConfigError, match="missing"):
            _assignment(E11, **{"10": 0.2})
        with pytest.raises(ConfigError, match="extra"):
            _assignment(E10, **{"10": 0.2, "01": 0.3})


class TestPiProjection:
    def test_additive_recursion_values(self):
        # pi strips everything below: each direction keeps only its own factor
        model = AdditiveModel(2)
        f = AffineFn(1.0, -1.5)
        u = {"10": 0.81, "01": 0.13, "11": 0.44}
        assert pi_projection(model, f, _assignment(E10, **{"10": u["10"]})) == pytest.approx(
            u["10"] - 0.5, abs=1e-14
        )
        assert pi_projection(model, f, _assignment(E01, **{"01": u["01"]})) == pytest.approx(
            u["01"] - 0.5, abs=1e-14
        )
        assert pi_projection(model, f, _assignment(E11, **u)) == pytest.approx(
            u["11"] - 0.5, abs=1e-14
        )

    def test_weighted_additive_scales_each_direction(self):
        model = AdditiveModel(2, coeffs={E10: 2.0, E01: 0.5, E11: 1.25})
        f = AffineFn(1.0, 0.0)
        u = {"10": 0.9, "01": 0.2, "11": 0.6}
        fc, _ = centered_fn(model, f)
        assert pi_projection(model, fc, _assignment(E11, **u)) == pytest.approx(
            1.25 * (0.6 - 0.5), abs=1e-12
        )

    def test_scalar_matches_single_cell_decompose(self):
        # content-keyed inner draws: the same factor values give the same
        # projections whether evaluated standalone or inside a lattice pass
        model = OpaqueModel(2)
        f = AffineFn(1.0, 0.0)
        shape = Shape((1, 1))
        grids = all_factor_grids(shape, seed=7)
        cmap = decompose(model, f, shape, seed=7, inner_draws=300)
        fc, _ = centered_fn(model, f)
        for e in all_evectors(2):
            retained = {d: grids[d].reshape(-1) for d in sub_evectors(e)}
            scalar = pi_projection(model, fc, FactorAssignment(e, retained), inner_draws=300)
            assert scalar == cmap.components[e]


class TestDecompose:
    @pytest.mark.parametrize(
        "model,dims",
        [
            (AdditiveModel(2), (2, 2)),
            (AdditiveModel(2, coeffs={E10: 2.0, E01: 0.5, E11: 1.25}), (3, 4)),
            (AdditiveModel(3), (2, 3, 2)),
            (InteractionModel(2), (4, 3)),
        ],
    )
    def test_identity_exact_for_analytic_models(self, model, dims):
        f = AffineFn(1.0, 0.0) if isinstance(model, AdditiveModel) else IndicatorFn(0.4)
        cmap = decompose(model, f, Shape(dims), seed=11)
        assert cmap.identity_gap() <= 1e-12

    @pytest.mark.parametrize("dims,inner", [((3, 3), 200), ((2, 2, 2), 100)])
    def test_identity_exact_on_monte_carlo_path(self, dims, inner):
        # memoized projection grids make the telescoping exact even when the
        # conditional means themselves are noisy estimates
        model = OpaqueModel(len(dims))
        cmap = decompose(model, AffineFn(1.0, 0.0), Shape(dims), seed=3, inner_draws=inner)
        assert cmap.identity_gap() <= 1e-10

    def test_additive_components_match_factor_means(self):
        model = AdditiveModel(2, coeffs={E10: 2.0, E01: 0.5, E11: 1.25})
        shape = Shape((5, 7))
        cmap = decompose(model, AffineFn(1.0, 0.0), shape, seed=21)
        grids = all_factor_grids(shape, seed=21)
        for e, c in model.coeffs.items():
            expected = c * (grids[e][..., 0].mean() - 0.5)
            assert cmap.components[e] == pytest.approx(expected, abs=1e-12)

    def test_single_cell_component_equals_pi(self):
        model = AdditiveModel(2)
        shape = Shape((1, 1))
        cmap = decompose(model, AffineFn(1.0, 0.0), shape, seed=5)
        grids = all_factor_grids(shape, seed=5)
        fc, _ = centered_fn(model, AffineFn(1.0, 0.0))
        for e in all_evectors(2):
            retained = {d: grids[d].reshape(-1) for d in sub_evectors(e)}
            assert cmap.components[e] == pytest.approx(
                pi_projection(model, fc, FactorAssignment(e, retained)), abs=1e-14
            )

    def test_centering_is_enforced(self):
        # an uncentered f must give the same components as its centered twin
        model = AdditiveModel(2)
        shape = Shape((3, 3))
        raw = decompose(model, AffineFn(1.0, 0.0), shape, seed=9)
        shifted = decompose(model, AffineFn(1.0, 5.0), shape, seed=9)
        for e in all_evectors(2):
            assert raw.components[e] == pytest.approx(shifted.components[e], abs=1e-12)
        assert raw.sample_mean == pytest.approx(shifted.sample_mean, abs=1e-12)

    def test_reproducible_and_seed_sensitive(self):
        model = AdditiveModel(2)
        shape = Shape((4, 4))
        a = decompose(model, AffineFn(1.0, 0.0), shape, seed=42)
        b = decompose(model, AffineFn(1.0, 0.0), shape, seed=42)
        c = decompose(model, AffineFn(1.0, 0.0), shape, seed=43)
        assert a.components == b.components and a.sample_mean == b.sample_mean
        assert a.components != c.components

    def test_json_dict_keys(self):
        cmap = decompose(AdditiveModel(2), AffineFn(1.0, 0.0), Shape((2, 3)), seed=1)
        d = cmap.to_json_dict()
        assert set(d) == {"10", "01", "11", "sample_mean"}
        assert d["sample_mean"] == pytest.approx(cmap.sample_mean)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ConfigError, match="does not match"):
            decompose(AdditiveModel(3), AffineFn(1.0, 0.0), Shape((2, 2)), seed=0)


class TestCenteredFn:
    def test_analytic_mean_subtracted_exactly(self):
        model = AdditiveModel(2, coeffs={E10: 2.0, E01: 0.5, E11: 1.25})
        fc, mu = centered_fn(model, AffineFn(1.0, 0.0))
        assert mu == pytest.approx((2.0 + 0.5 + 1.25) / 2.0, abs=1e-14)
        assert float(fc(np.asarray(mu))) == pytest.approx(0.0, abs=1e-14)

    def test_already_centered_passthrough(self):
        model = AdditiveModel(2)
        f = AffineFn(1.0, -1.5)
        fc, mu = centered_fn(model, f)
        assert mu == 0.0 and fc is f

    def test_monte_carlo_mean_is_cached(self):
        model = OpaqueModel(2)
        f = AffineFn(1.0, 0.0)
        _, mu1 = centered_fn(model, f, mc_draws=10**5)
        _, mu2 = centered_fn(model, f, mc_draws=10**5)
        assert mu1 == mu2
        fresh = OpaqueModel(2)
        _, mu3 = centered_fn(fresh, f, mc_draws=2 * 10**5, seed=0xB0B)
        assert abs(mu1 - mu3) < 0.01


class TestDegeneracy:
    @pytest.mark.parametrize("e,drop", [(E11, 1), (E11, 2), (E10, 1)])
    def test_additive_projections_are_degenerate(self, e, drop):
        report = degeneracy_check(AdditiveModel(2), AffineFn(1.0, 0.0), e, drop, replications=400)
        assert report.passed
        assert abs(report.mean) <= 4 * report.se + 1e-15

    def test_opaque_projection_is_degenerate(self):
        report = degeneracy_check(
            OpaqueModel(2), AffineFn(1.0, 0.0), E11, 2, replications=300, inner_draws=200
        )
        assert report.passed

    def test_interaction_indicator_is_degenerate(self):
        report = degeneracy_check(InteractionModel(2), IndicatorFn(0.4), E11, 1, replications=400)
        assert report.passed

    def test_inactive_drop_coordinate_rejected(self):
        with pytest.raises(ConfigError, match="not active"):
            degeneracy_check(AdditiveModel(2), AffineFn(1.0, 0.0), E10, 2)

    def test_report_fields(self):
        report = degeneracy_check(AdditiveModel(2), AffineFn(1.0, 0.0), E11, 1, replications=128)
        assert report.replications == 128
        assert report.e == E11 and report.drop_coordinate == 1
        assert report.se > 0
