"""Moduli, net construction, certification and the necessity direction."""

import numpy as np
import pytest

from mwlp.compactness import (
    EpsilonNet,
    FunctionFamily,
    averaging_modulus,
    boundedness_modulus,
    build_net_average,
    build_net_dyadic,
    certify_net,
    componentwise_reduction,
    moduli_report,
    necessity_check,
    phi_error_constant,
    tail_modulus,
    translation_modulus,
    twisted_modulus,
)
from mwlp.errors import NotTotallyBoundedInput, RadiusExceedsBox
from mwlp.families import gaussian_bumps, indicator_field
from mwlp.grids import Grid
from mwlp.operators import DyadicScheme, translate
from mwlp.spaces import ExponentField, NormFamily, SampledVectorField, Space
from mwlp.weight_fields import (
    MatrixWeightField,
    MeasureDensity,
    make_power_weight,
)


@pytest.fixture
def grid():
    return Grid(1, 2.0, 256)


@pytest.fixture
def unweighted(grid):
    w = MatrixWeightField.constant(grid, [[1.0]], invertible=True)
    return Space.matrix_weight(w, 2.0)


def small_family(grid, rng, d=1, count=6):
    return gaussian_bumps(grid, d, count, rng, center_range=(-0.4, 0.4),
                          width_range=(0.15, 0.3))


class TestModuli:
    def test_zero_family(self, grid, unweighted):
        fam = FunctionFamily([SampledVectorField.zero(grid, 1)])
        assert boundedness_modulus(fam, unweighted) == 0.0
        assert tail_modulus(fam, 1.0, unweighted) == 0.0
        assert translation_modulus(fam, 2 * grid.h, unweighted) == 0.0

    def test_singleton_bound_is_norm(self, grid, unweighted, rng):
        f = SampledVectorField(grid, rng.standard_normal(256).astype(complex))
        fam = FunctionFamily([f])
        assert boundedness_modulus(fam, unweighted) == unweighted.norm(f)

    def test_bound_equals_exhaustive_max(self, grid, unweighted, rng):
        fam = small_family(grid, rng, count=10)
        assert boundedness_modulus(fam, unweighted) == max(
            unweighted.norm(f) for f in fam)

    def test_tail_of_supported_family_vanishes(self, grid, unweighted):
        f = indicator_field(grid, (-0.5,), (0.5,))
        assert tail_modulus(FunctionFamily([f]), 1.0, unweighted) == 0.0

    def test_tail_hand_value(self, unweighted, grid):
        # f = chi_[0, 2) e1 with R = 1: the tail is chi_[1, 2), norm 1
        f = indicator_field(grid, (0.0,), (2.0,))
        val = tail_modulus(FunctionFamily([f]), 1.0, unweighted)
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_tail_at_zero_is_bound(self, grid, unweighted, rng):
        fam = small_family(grid, rng)
        assert tail_modulus(fam, 0.0, unweighted) == boundedness_modulus(fam, unweighted)

    def test_tail_radius_must_stay_in_box(self, grid, unweighted, rng):
        fam = small_family(grid, rng)
        with pytest.raises(RadiusExceedsBox):
            tail_modulus(fam, grid.L, unweighted)

    def test_translation_constant_boundary_leakage(self, grid, unweighted):
        # constant field: only the strip swept past the boundary contributes
        c = SampledVectorField(grid, np.full(256, 1.0, dtype=complex))
        val = translation_modulus(FunctionFamily([c]), grid.h, unweighted)
        assert val == pytest.approx(np.sqrt(grid.h), rel=1e-10)

    def test_translation_scales_with_gradient(self, grid, unweighted):
        x = grid.points[:, 0]
        f = SampledVectorField(grid, np.exp(-4 * x ** 2).astype(complex))
        fam = FunctionFamily([f])
        v1 = translation_modulus(fam, grid.h, unweighted)
        # ratio to h is stable under refinement
        g2 = grid.refine()
        x2 = g2.points[:, 0]
        f2 = SampledVectorField(g2, np.exp(-4 * x2 ** 2).astype(complex))
        w2 = MatrixWeightField.constant(g2, [[1.0]], invertible=True)
        sp2 = Space.matrix_weight(w2, 2.0)
        v2 = translation_modulus(FunctionFamily([f2]), g2.h, sp2)
        assert v1 / grid.h == pytest.approx(v2 / g2.h, rel=0.05)

    def test_monotone_in_family(self, grid, unweighted, rng):
        fam = small_family(grid, rng, count=8)
        sub = FunctionFamily(fam.members[:4])
        for R in (0.5, 1.0):
            assert tail_modulus(sub, R, unweighted) <= tail_modulus(fam, R, unweighted)
        assert (translation_modulus(sub, 2 * grid.h, unweighted)
                <= translation_modulus(fam, 2 * grid.h, unweighted))

    def test_averaging_modulus_constant_zero(self, grid, unweighted):
        c = SampledVectorField(grid, np.full(256, 2.0, dtype=complex))
        val = averaging_modulus(FunctionFamily([c]), unweighted, 8 * grid.h)
        assert val == 0.0

    def test_averaging_modulus_decreasing_curve(self, grid, unweighted, rng):
        fam = small_family(grid, rng)
        vals = [averaging_modulus(fam, unweighted, r)
                for r in (grid.L / 4, grid.L / 8, grid.L / 16)]
        assert vals[2] < vals[1] < vals[0]


class TestTwisted:
    def test_d1_equals_translation_exactly(self, grid, rng):
        fam = small_family(grid, rng)
        w = make_power_weight(grid, [0.5], invertible=True)
        sp = Space.matrix_weight(w, 2.0)
        r = 4 * grid.h
        assert twisted_modulus(fam, w, 2.0, r) == translation_modulus(fam, r, sp)

    def test_constant_eigenvectors_match_diagonal_translation(self, grid, rng):
        # fixed rotation angle: U(x) constant, so the twisted modulus equals
        # the translation modulus of U^H f in L^p(D); the eigenvalue fields
        # are kept separated so the diagonalization is well-conditioned
        theta = 0.7
        c, s = np.cos(theta), np.sin(theta)
        rot = np.array([[c, -s], [s, c]])
        lam = np.stack([1.0 + grid.points[:, 0] ** 2,
                        7.0 + np.cos(grid.points[:, 0])], axis=1)
        diag = np.zeros((256, 2, 2))
        diag[:, 0, 0], diag[:, 1, 1] = lam[:, 0], lam[:, 1]
        w = MatrixWeightField(grid, (rot @ diag @ rot.T).astype(complex),
                              invertible=True)
        fam = small_family(grid, rng, d=2)
        r = 4 * grid.h
        tw = twisted_modulus(fam, w, 2.0, r)
        d_field = MatrixWeightField(grid, diag.astype(complex), invertible=True)
        tilted = FunctionFamily([
            SampledVectorField(grid, f.values @ rot) for f in fam])
        tr = translation_modulus(tilted, r, Space.matrix_weight(d_field, 2.0))
        assert tw == pytest.approx(tr, rel=1e-10)

    def test_rotating_weight_differs_from_translation(self, grid, rng):
        w = make_power_weight(grid, [0.5, -0.25], rotation=lambda p: 3 * p[:, 0],
                              invertible=True)
        fam = small_family(grid, rng, d=2)
        sp = Space.matrix_weight(w, 2.0)
        r = 8 * grid.h
        tw = twisted_modulus(fam, w, 2.0, r)
        tr = translation_modulus(fam, r, sp)
        assert np.isfinite(tw) and np.isfinite(tr)
        assert tw != pytest.approx(tr, rel=1e-6)


class TestDyadicNet:
    def test_singleton(self, grid, unweighted, rng):
        fam = FunctionFamily([small_family(grid, rng)[0]])
        net = build_net_dyadic(fam, 0.2, unweighted)
        assert net.size == 1
        assert net.distances[0] <= net.params["projection_error"] + 1e-12

    def test_two_far_members(self, grid, unweighted, rng):
        f = small_family(grid, rng)[0]
        g = translate(f, (1.0,))
        net = build_net_dyadic(FunctionFamily([f, g]), 0.05, unweighted)
        assert net.size == 2

    def test_duplicates_cluster(self, grid, unweighted, rng):
        base = small_family(grid, rng, count=5)
        fam = FunctionFamily([m for m in base for _ in range(6)])
        net = build_net_dyadic(fam, 0.1, unweighted)
        assert net.size == 5

    def test_certificate_always_passes(self, grid, unweighted, rng):
        fam = small_family(grid, rng, count=12)
        net = build_net_dyadic(fam, 0.1, unweighted)
        cert = certify_net(fam, net, unweighted)
        assert cert.passed
        assert cert.worst_distance <= net.c_net * net.epsilon * (1 + 1e-9)

    def test_shrinking_epsilon_never_shrinks_net(self, grid, unweighted, rng):
        fam = small_family(grid, rng, count=12)
        sizes = [build_net_dyadic(fam, eps, unweighted).size
                 for eps in (0.4, 0.2, 0.1)]
        assert all(a <= b for a, b in zip(sizes, sizes[1:]))
        assert sizes[0] < sizes[-1]

    def test_variable_exponent_route(self, grid, rng):
        w = MatrixWeightField.constant(grid, [[1.0]], invertible=True)
        rho = NormFamily.from_matrix_weight(w, 2.0)
        pf = ExponentField(grid, np.where(grid.points[:, 0] < 0, 1.5, 2.5))
        sp = Space.variable(rho, pf)
        fam = small_family(grid, rng, count=5)
        net = build_net_dyadic(fam, 0.15, sp)
        assert certify_net(fam, net, sp).passed

    def test_quasi_norm_route(self, grid, rng):
        w = MatrixWeightField.constant(grid, [[1.0]], invertible=True)
        sp = Space.matrix_weight(w, 0.5)
        fam = small_family(grid, rng, count=4)
        net = build_net_dyadic(fam, 0.3, sp)
        assert certify_net(fam, net, sp).passed

    def test_twisted_notion(self, grid, rng):
        w = make_power_weight(grid, [0.5, 0.25], rotation=lambda p: p[:, 0],
                              invertible=True)
        sp = Space.matrix_weight(w, 2.0)
        fam = small_family(grid, rng, d=2, count=5)
        net = build_net_dyadic(fam, 0.2, sp, notion="twisted", weight=w)
        assert net.params["notion"] == "twisted"
        assert certify_net(fam, net, sp).passed


class TestAverageNet:
    def test_singleton(self, grid, rng):
        w = MatrixWeightField.constant(grid, [[1.0]], invertible=True)
        fam = FunctionFamily([small_family(grid, rng)[0]])
        net = build_net_average(fam, 0.3, w, None, 2.0)
        assert net.size == 1

    def test_budget_split_recorded(self, grid, rng):
        w = MatrixWeightField.constant(grid, [[1.0]], invertible=True)
        fam = small_family(grid, rng, count=6)
        eps = 0.3
        net = build_net_average(fam, eps, w, None, 2.0)
        b = net.params["budgets"]
        assert b["tail"] == eps / 3
        assert b["averaging"] == eps / 3
        assert b["uniform_radius"] == eps / net.params["A"]
        assert net.params["tail_value"] < eps / 3
        assert net.params["averaging_value"] < eps / 3
        assert net.params["worst_uniform_distance"] <= b["uniform_radius"]

    def test_scaled_copies_cluster_by_uniform_radius(self, grid):
        # scaled copies of one bump: the uniform clustering radius eps / A
        # keeps the near-equal pair together and separates the distant one
        w = MatrixWeightField.constant(grid, [[1.0]], invertible=True)
        x = grid.points[:, 0]
        bump = np.exp(-x ** 2 / (2 * 0.3 ** 2))
        members = [SampledVectorField(grid, (a * bump).astype(complex))
                   for a in (0.1, 0.15, 0.5)]
        fam = FunctionFamily(members)
        net = build_net_average(fam, 0.3, w, None, 2.0)
        assert net.size == 2

    def test_p_below_one_routed_away(self, grid, rng):
        w = MatrixWeightField.constant(grid, [[1.0]], invertible=True)
        fam = small_family(grid, rng)
        with pytest.raises(ValueError):
            build_net_average(fam, 0.1, w, None, 0.5)

    def test_density_measure(self, grid, rng):
        w = MatrixWeightField.constant(grid, [[1.0]], invertible=True)
        mu = MeasureDensity(grid, 1.0 + grid.points[:, 0] ** 2 / 2)
        fam = small_family(grid, rng, count=5)
        net = build_net_average(fam, 0.3, w, mu, 2.0)
        sp = Space.matrix_weight(w, 2.0, mu)
        assert certify_net(fam, net, sp).passed


class TestCertify:
    def test_net_equal_to_family(self, grid, unweighted, rng):
        fam = small_family(grid, rng, count=4)
        net = EpsilonNet(epsilon=0.1, centers=list(fam), assignment=list(range(4)),
                         distances=[0.0] * 4, c_net=1.0, route="manual")
        cert = certify_net(fam, net, unweighted)
        assert cert.passed and cert.worst_distance == 0.0

    def test_zero_net_fails_on_unit_member(self, grid, unweighted, rng):
        f = SampledVectorField(grid, rng.standard_normal(256).astype(complex))
        f = f.scaled(1.0 / unweighted.norm(f))
        net = EpsilonNet(epsilon=0.5, centers=[SampledVectorField.zero(grid, 1)],
                         assignment=[0], distances=[1.0], c_net=1.0, route="manual")
        cert = certify_net(FunctionFamily([f]), net, unweighted)
        assert not cert.passed
        assert cert.worst_distance == pytest.approx(1.0, rel=1e-12)


class TestNecessity:
    def test_singleton_passes_all_epsilons(self, grid, rng):
        w = make_power_weight(grid, [0.5], invertible=True)
        fam = FunctionFamily([small_family(grid, rng)[0]])
        rep = necessity_check(fam, [0.5, 0.2, 0.1], w, 2.0)
        assert rep.passed

    def test_finite_family_passes(self, grid, rng):
        w = make_power_weight(grid, [0.5, 1 / 3], rotation=lambda p: p[:, 0],
                              invertible=True)
        fam = small_family(grid, rng, d=2, count=8)
        rep = necessity_check(fam, [0.4, 0.2], w, 2.0)
        assert rep.passed
        for row in rep.rows:
            assert row.tail_value <= row.tail_bound
            assert row.averaging_value <= row.averaging_bound

    def test_requires_p_above_one(self, grid, rng):
        w = make_power_weight(grid, [0.5], invertible=True)
        fam = small_family(grid, rng)
        with pytest.raises(ValueError):
            necessity_check(fam, [0.1], w, 1.0)

    def test_center_cap(self, grid, rng):
        w = MatrixWeightField.constant(grid, [[1.0]], invertible=True)
        members = [translate(small_family(grid, rng)[0], (k * 0.25,))
                   for k in range(6)]
        fam = FunctionFamily(members)
        with pytest.raises(NotTotallyBoundedInput):
            necessity_check(fam, [0.01], w, 2.0, max_centers=2)

    def test_certified_family_passes_at_4eps(self, grid, rng):
        # sufficiency -> necessity loop: a family with a certified eps-net
        # passes the necessity table at 4 eps
        w = make_power_weight(grid, [0.5], invertible=True)
        sp = Space.matrix_weight(w, 2.0)
        fam = small_family(grid, rng, count=10)
        eps = 0.1
        net = build_net_dyadic(fam, eps, sp)
        assert certify_net(fam, net, sp).passed
        rep = necessity_check(fam, [4 * eps], w, 2.0)
        assert rep.passed


class TestComponentwise:
    def test_d1_identity(self, grid, rng):
        w = make_power_weight(grid, [0.5], invertible=True)
        fam = small_family(grid, rng)
        red = componentwise_reduction(fam, w, 2.0)
        assert len(red.families) == 1
        for f, g in zip(fam, red.families[0]):
            assert np.max(np.abs(np.abs(f.values) - np.abs(g.values))) < 1e-12
        assert red.c_low == pytest.approx(1.0, abs=1e-10)
        assert red.c_high == pytest.approx(1.0, abs=1e-10)

    def test_diagonal_constant_pythagoras(self, grid, rng):
        # p = 2, diagonal constant weight: the diagonal norm squared equals
        # the sum of component norm squares
        w = MatrixWeightField.constant(grid, np.diag([1.0, 4.0]), invertible=True)
        fam = small_family(grid, rng, d=2, count=5)
        red = componentwise_reduction(fam, w, 2.0)
        for j in range(len(fam)):
            assert red.diag_norms[j] ** 2 == pytest.approx(
                float(np.sum(red.component_norms[j] ** 2)), rel=1e-12)

    def test_rotating_weight_bounded_ratios(self, grid, rng):
        w = make_power_weight(grid, [0.5, -0.25], rotation=lambda p: 2 * p[:, 0],
                              invertible=True)
        fam = small_family(grid, rng, d=2, count=6)
        red = componentwise_reduction(fam, w, 2.0)
        # norm equivalence on C^d gives 1/sqrt(d) <= ratio <= 1 for p = 2
        assert red.c_low >= 1 / np.sqrt(2) - 1e-10
        assert red.c_high <= 1.0 + 1e-10
        # works without the invertibility flag as well
        w_plain = MatrixWeightField(grid, w.values, invertible=False)
        red2 = componentwise_reduction(fam, w_plain, 2.0)
        assert red2.c_low > 0

    def test_non_invertible_weight_accepted(self, grid, rng):
        vals = np.zeros((256, 2, 2), dtype=complex)
        vals[:, 0, 0] = np.abs(grid.points[:, 0])
        w = MatrixWeightField(grid, vals)  # rank one, not invertible
        fam = small_family(grid, rng, d=2, count=3)
        red = componentwise_reduction(fam, w, 2.0)
        assert len(red.families) == 2


class TestPhiErrorConstant:
    def test_constant_stable_under_refinement(self, rng):
        values = []
        for n_pts in (256, 512):
            g = Grid(1, 2.0, n_pts)
            w = MatrixWeightField.constant(g, [[1.0]], invertible=True)
            sp = Space.matrix_weight(w, 2.0)
            fam = gaussian_bumps(g, 1, 6, np.random.default_rng(42),
                                 center_range=(-0.4, 0.4), width_range=(0.15, 0.3))
            scheme = DyadicScheme(g, m=0, t=-3)
            values.append(phi_error_constant(fam, scheme, sp)["constant"])
        assert np.isfinite(values[0]) and np.isfinite(values[1])
        ratio = max(values) / min(values)
        assert ratio < 2.0


class TestModuliReport:
    def test_report_shapes_and_flag(self, grid, rng):
        w = make_power_weight(grid, [0.5], invertible=True)
        sp = Space.matrix_weight(w, 2.0)
        fam = small_family(grid, rng)
        rep = moduli_report(fam, sp, notion="translation")
        assert rep.notion == "translation"
        assert len(rep.tail_curve) == 4
        assert all(v >= 0 for _r, v in rep.tail_curve)
        assert all(v >= 0 for _r, v in rep.equi_curve)
        rep2 = moduli_report(fam, sp, notion="averaging")
        assert rep2.notion == "averaging"
