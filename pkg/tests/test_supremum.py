import numpy as np
import pytest

from sepex.errors import ConfigError
from sepex.fclass import AffineFn, ComboFn, FunctionClass, halfinterval_class, singleton_class
from sepex.hoeffding import decompose
from sepex.lattice import EVector, Shape
from sepex.sampler import AdditiveModel, sample_array
from sepex.supremum import (
    LocalizationStats,
    MomentEstimate,
    component_moment,
    component_sup,
    empirical_process_sup,
    index_count_root,
    localization_stats,
    sup_replicates,
    symmetrized_sup_diagnostic,
)

E10, E01, E11 = EVector((1, 0)), EVector((0, 1)), EVector((1, 1))
ONE_TWELFTH_ROOT = 1.0 / np.sqrt(12.0)


def _centered_affine():
    # E X = 3/2 for the additive model with unit coefficients, K = 2
    return singleton_class(AffineFn(1.0, -1.5), envelope=AffineFn(0.0, 1.5))


class TestEmpiricalProcessSup:
    def test_zero_class(self):
        sample = sample_array(AdditiveModel(2), Shape((4, 5)), seed=3)
        zero = singleton_class(AffineFn(0.0, 0.0), envelope=AffineFn(0.0, 1.0))
        assert empirical_process_sup(sample, zero) == 0.0

    def test_single_cell_is_plain_value(self):
        model = AdditiveModel(2)
        sample = sample_array(model, Shape((1, 1)), seed=12)
        fclass = _centered_affine()
        expected = abs(float(sample.values[0, 0]) - 1.5)
        assert empirical_process_sup(sample, fclass) == pytest.approx(expected, abs=1e-15)

    def test_matches_brute_force_double_loop(self):
        model = AdditiveModel(2)
        shape = Shape((8, 8))
        sample = sample_array(model, shape, seed=77)
        fclass = halfinterval_class(model, n_params=33)
        best = 0.0
        for f in fclass.fns:
            total = sum(float(f(np.asarray(x))) for x in sample.values.reshape(-1))
            best = max(best, abs(total))
        expected = np.sqrt(8) / 64 * best
        assert empirical_process_sup(sample, fclass) == pytest.approx(expected, rel=1e-12)


class TestComponentSup:
    @pytest.mark.parametrize("e", [E10, E01, E11])
    def test_singleton_consistent_with_decompose(self, e):
        model = AdditiveModel(2)
        shape = Shape((5, 6))
        fclass = _centered_affine()
        cmap = decompose(model, fclass.fns[0], shape, seed=4)
        assert component_sup(model, fclass, shape, e, seed=4) == pytest.approx(
            abs(cmap.components[e]), abs=1e-15
        )

    def test_sign_symmetric_pair_equals_singleton(self):
        model = AdditiveModel(2)
        shape = Shape((4, 4))
        f = AffineFn(1.0, -1.5)
        pair = FunctionClass(
            fns=[f, ComboFn([(-1.0, f)], label="-f")], envelope=AffineFn(0.0, 1.5)
        )
        single = _centered_affine()
        assert component_sup(model, pair, shape, E10, seed=9) == pytest.approx(
            component_sup(model, single, shape, E10, seed=9), abs=1e-15
        )

    def test_scaled_skeleton_peaks_at_largest_coefficient(self):
        model = AdditiveModel(2)
        shape = Shape((6, 3))
        f = AffineFn(1.0, -1.5)
        scales = [0.2, 0.5, 1.0, 1.7, 2.4]
        fns = [ComboFn([(c, f)], label=f"{c}*f") for c in scales]
        fclass = FunctionClass(fns=fns, envelope=AffineFn(0.0, 1.5 * max(scales)))
        base = component_sup(model, _centered_affine(), shape, E10, seed=2)
        assert component_sup(model, fclass, shape, E10, seed=2) == pytest.approx(
            max(scales) * base, rel=1e-12
        )


class TestComponentMoment:
    def test_degenerate_direction_estimates_zero(self):
        # no U_{(1,1)} term in the model, so pi_{(1,1)} f vanishes identically
        model = AdditiveModel(2, coeffs={E10: 1.0, E01: 1.0, E11: 0.0})
        est = component_moment(model, _centered_affine(), Shape((6, 6)), E11, 2, 60, seed=5)
        assert est.value <= 4 * est.std_error + 1e-12

    @pytest.mark.parametrize("dims", [(8, 8), (16, 16)])
    def test_exact_variance_of_degenerate_direction(self, dims):
        # sqrt(N_1) * (E H^2)^{1/2} is the sd of one uniform, for any N_1
        model = AdditiveModel(2)
        est = component_moment(model, _centered_affine(), Shape(dims), E10, 2, 400, seed=31)
        assert est.std_error > 0
        assert abs(est.value - ONE_TWELFTH_ROOT) <= 4 * est.std_error

    def test_first_moment_against_brute_force_oracle(self):
        model = AdditiveModel(2)
        est = component_moment(model, _centered_affine(), Shape((64, 4)), E10, 1, 500, seed=8)
        rng = np.random.default_rng(0)
        means = np.abs(rng.random((10**6, 64)).mean(axis=1) - 0.5)
        oracle = 8.0 * means.mean()
        oracle_se = 8.0 * means.std(ddof=1) / np.sqrt(len(means))
        assert abs(est.value - oracle) <= 4 * np.hypot(est.std_error, oracle_se)

    def test_lyapunov_monotone_in_q(self):
        model = AdditiveModel(2)
        fclass = halfinterval_class(model, n_params=11)
        sups = sup_replicates(model, fclass, Shape((6, 6)), E10, 80, seed=13)
        from sepex.supremum import moment_from_sups

        scale = index_count_root(Shape((6, 6)), E10)
        values = [moment_from_sups(sups, scale, q).value for q in (1, 2, 4, 8)]
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))

    def test_scaling_equivariance(self):
        model = AdditiveModel(2)
        fclass = _centered_affine()
        a = component_moment(model, fclass, Shape((5, 5)), E10, 2, 60, seed=17)
        b = component_moment(model, fclass.scaled(2.5), Shape((5, 5)), E10, 2, 60, seed=17)
        assert b.value == pytest.approx(2.5 * a.value, rel=1e-12)
        assert b.std_error == pytest.approx(2.5 * a.std_error, rel=1e-12)

    def test_constant_across_shapes_for_exact_case(self):
        model = AdditiveModel(2)
        a = component_moment(model, _centered_affine(), Shape((8, 8)), E10, 2, 300, seed=23)
        b = component_moment(model, _centered_affine(), Shape((64, 8)), E10, 2, 300, seed=29)
        assert abs(a.value - b.value) <= 4 * np.hypot(a.std_error, b.std_error)

    def test_validation(self):
        model = AdditiveModel(2)
        with pytest.raises(ConfigError, match="replications"):
            component_moment(model, _centered_affine(), Shape((4, 4)), E10, 2, 1, seed=0)
        with pytest.raises(ConfigError, match="moment order"):
            component_moment(model, _centered_affine(), Shape((4, 4)), E10, 9, 60, seed=0)
        with pytest.raises(ConfigError):
            MomentEstimate(value=-1.0, std_error=0.0, replications=10, q=2.0)


class TestLocalizationStats:
    def test_additive_singleton_matches_uniform_sd(self):
        model = AdditiveModel(2)
        stats = localization_stats(model, _centered_affine(), Shape((16, 16)), E10, 40000, seed=3)
        assert stats.envelope_l2 == pytest.approx(1.5, abs=1e-12)
        assert stats.m_e_l2 == pytest.approx(1.5, abs=1e-12)
        assert abs(stats.sigma_e - ONE_TWELFTH_ROOT) <= 3e-3
        assert stats.delta_e == pytest.approx(stats.sigma_e / 1.5, rel=1e-12)

    def test_envelope_as_member_gives_delta_one(self):
        model = AdditiveModel(2)
        env = AffineFn(0.0, 1.5)
        fclass = singleton_class(env, envelope=env)
        stats = localization_stats(model, fclass, Shape((8, 8)), E10, 500, seed=6)
        assert stats.delta_e == 1.0
        assert stats.sigma_e == stats.envelope_l2

    def test_sigma_override_and_clipping(self):
        model = AdditiveModel(2)
        fclass = _centered_affine()
        low = localization_stats(
            model, fclass, Shape((8, 8)), E10, 200, seed=1, sigma_override=0.1
        )
        assert low.sigma_e == pytest.approx(0.1)
        assert low.delta_e == pytest.approx(0.1 / low.envelope_l2)
        high = localization_stats(
            model, fclass, Shape((8, 8)), E10, 200, seed=1, sigma_override=99.0
        )
        assert high.sigma_e == high.envelope_l2
        assert high.delta_e == 1.0

    def test_scaling_leaves_delta_invariant(self):
        model = AdditiveModel(2)
        fclass = _centered_affine()
        a = localization_stats(model, fclass, Shape((8, 8)), E10, 300, seed=2)
        b = localization_stats(model, fclass.scaled(3.0), Shape((8, 8)), E10, 300, seed=2)
        assert b.sigma_e == pytest.approx(3.0 * a.sigma_e, rel=1e-12)
        assert b.envelope_l2 == pytest.approx(3.0 * a.envelope_l2, rel=1e-12)
        assert b.m_e_l2 == pytest.approx(3.0 * a.m_e_l2, rel=1e-12)
        assert b.delta_e == pytest.approx(a.delta_e, rel=1e-12)

    def test_zero_envelope_rejected(self):
        model = AdditiveModel(2)
        fclass = singleton_class(AffineFn(0.0, 0.0), envelope=AffineFn(0.0, 0.0))
        with pytest.raises(ConfigError, match="envelope"):
            localization_stats(model, fclass, Shape((4, 4)), E10, 100, seed=0)

    def test_stats_container(self):
        stats = LocalizationStats(sigma_e=0.2, envelope_l2=1.0, delta_e=0.2, m_e_l2=1.0)
        assert stats.delta_e == 0.2


class TestSymmetrizedDiagnostic:
    def test_all_plus_signs_equal_component_sup(self):
        model = AdditiveModel(2)
        fclass = halfinterval_class(model, n_params=9)
        shape = Shape((6, 6))
        assert symmetrized_sup_diagnostic(
            model, fclass, shape, E11, seed=44, flip=False
        ) == pytest.approx(component_sup(model, fclass, shape, E11, seed=44), abs=1e-15)

    def test_zero_class(self):
        model = AdditiveModel(2)
        zero = singleton_class(AffineFn(0.0, 0.0), envelope=AffineFn(0.0, 1.0))
        assert symmetrized_sup_diagnostic(model, zero, Shape((4, 4)), E10, seed=1) == 0.0

    @pytest.mark.parametrize("n1", [8, 32])
    def test_symmetrized_to_raw_ratio_band(self, n1):
        model = AdditiveModel(2)
        fclass = _centered_affine()
        shape = Shape((n1, 4))
        from sepex import kernels
        from sepex.sampler import TAG_REP

        raw, sym = [], []
        for r in range(500):
            s = kernels.derive(101, TAG_REP, r)
            raw.append(component_sup(model, fclass, shape, E10, seed=s))
            sym.append(symmetrized_sup_diagnostic(model, fclass, shape, E10, seed=s))
        ratio = np.mean(sym) / np.mean(raw)
        assert 0.3 <= ratio <= 3.0
