"""Isoperimetric profile and radial symmetrization."""

import numpy as np
import pytest

from curvex._spaceform import ball_volume_K, sphere_area_K
from curvex.charts import ModelSpec, build_normal_chart, make_chart
from curvex.errors import (
    ConfigInvalid,
    LevelSetDegenerate,
    NonPositiveVolume,
    VolumeTooLarge,
)
from curvex.functionals import build_test_function
from curvex.isoperimetry import (
    iso_profile,
    iso_profile_radius,
    symmetrize,
)


@pytest.fixture(scope="module")
def flat_chart():
    chart = make_chart(ModelSpec(kind="flat", n=3, halfwidth=2.0))
    return build_normal_chart(chart, np.zeros(3), r0=1.6)


@pytest.fixture(scope="module")
def radial_result(flat_chart):
    tf = build_test_function(
        flat_chart, None, mode=np.zeros((3, 3)), alpha=0.0, r_s=1.2
    )
    return symmetrize(tf, t=0.01, K=0.0, levels=512, order=32)


@pytest.fixture(scope="module")
def aniso_result(flat_chart):
    a = np.diag([0.3, -0.1, 0.05])
    tf = build_test_function(flat_chart, None, mode=a, alpha=0.0, r_s=1.2)
    return symmetrize(tf, t=0.01, K=0.0, levels=512, order=32)


class TestIsoProfile:
    def test_flat_unit_ball(self):
        # volume 4pi/3 in R^3 is the unit ball, boundary area 4pi
        r = iso_profile_radius(3, 0.0, 4 * np.pi / 3)
        assert abs(r - 1.0) < 1e-12
        assert abs(iso_profile(3, 0.0, 4 * np.pi / 3) - 4 * np.pi) < 1e-10

    def test_flat_n2(self):
        assert abs(iso_profile_radius(2, 0.0, np.pi) - 1.0) < 1e-12
        assert abs(iso_profile(2, 0.0, np.pi) - 2 * np.pi) < 1e-11

    @pytest.mark.parametrize("K", [1.0, -1.0, 0.25])
    def test_radius_roundtrip(self, K):
        for r0 in [0.3, 0.7, 1.4]:
            beta = float(ball_volume_K(3, K, r0))
            r = iso_profile_radius(3, K, beta)
            assert abs(r - r0) < 1e-10

    def test_sphere_total_volume_rejected(self):
        total = float(ball_volume_K(3, 1.0, np.pi))
        with pytest.raises(VolumeTooLarge):
            iso_profile_radius(3, 1.0, total)
        with pytest.raises(VolumeTooLarge):
            iso_profile_radius(3, 1.0, 2 * total)

    def test_nonpositive_volume_rejected(self):
        with pytest.raises(NonPositiveVolume):
            iso_profile_radius(3, 0.0, 0.0)
        with pytest.raises(NonPositiveVolume):
            iso_profile(3, 1.0, -1.0)

    def test_hyperbolic_large_volume(self):
        # bracket doubling must reach large radii
        beta = float(ball_volume_K(3, -1.0, 5.0))
        assert abs(iso_profile_radius(3, -1.0, beta) - 5.0) < 1e-9

    def test_profile_value_is_sphere_area(self):
        beta = float(ball_volume_K(3, 1.0, 0.8))
        assert abs(
            iso_profile(3, 1.0, beta) - float(sphere_area_K(3, 1.0, 0.8))
        ) < 1e-9


class TestSymmetrizeRadial:
    """With a = 0 the function is already radial: the rearrangement is the
    identity and every comparison quantity must close to quadrature
    precision."""

    def test_mass_preserved(self, radial_result):
        assert abs(
            radial_result.mass_symmetrized - radial_result.mass_original
        ) < 1e-8

    def test_entropy_preserved(self, radial_result):
        assert abs(
            radial_result.entropy_symmetrized - radial_result.entropy_original
        ) < 1e-8

    def test_dirichlet_gap_vanishes(self, radial_result):
        gap = (
            radial_result.dirichlet_original
            - radial_result.dirichlet_symmetrized
        )
        assert abs(gap) < 1e-5 * radial_result.dirichlet_original
        assert gap > -1e-9 * radial_result.dirichlet_original

    def test_profile_inverts_the_function(self, radial_result):
        # r_bar(s) is the level radius of u itself, so the spline through
        # (r_bar, s) must reproduce the ladder
        spl = radial_result.profile.spline()
        vals = spl(radial_result.r_bar)
        np.testing.assert_allclose(vals, radial_result.levels, rtol=1e-10)

    def test_area_matches_comparison(self, radial_result):
        # round level sets: measured area equals the comparison-ball area
        np.testing.assert_allclose(
            radial_result.area_original,
            radial_result.area_comparison,
            rtol=1e-6,
        )


class TestSymmetrizeAnisotropic:
    def test_mass_preserved(self, aniso_result):
        assert abs(
            aniso_result.mass_symmetrized - aniso_result.mass_original
        ) < 1e-8

    def test_entropy_preserved(self, aniso_result):
        assert abs(
            aniso_result.entropy_symmetrized - aniso_result.entropy_original
        ) < 1e-8

    def test_dirichlet_gap_positive(self, aniso_result):
        gap = (
            aniso_result.dirichlet_original
            - aniso_result.dirichlet_symmetrized
        )
        assert gap > 0
        # anisotropy is genuinely felt, not roundoff
        assert gap > 1e-4

    def test_volumes_increase(self, aniso_result):
        assert np.all(np.diff(aniso_result.volumes) > 0)

    def test_holder_margin_nonnegative(self, aniso_result):
        scale = aniso_result.coarea * aniso_result.grad_integral
        assert np.all(aniso_result.holder_margin() >= -1e-9 * scale)

    def test_isoperimetric_deficit_sign(self, aniso_result):
        # measured boundary area can never beat the round ball
        assert np.all(
            aniso_result.area_original
            >= aniso_result.area_comparison * (1 - 1e-9)
        )

    def test_coarea_against_volume_ladder(self, aniso_result):
        # independent oracle: -dV/ds by finite differences of the
        # superlevel volumes must match the polar-route coarea integral
        fd = -np.gradient(aniso_result.volumes, aniso_result.levels)
        rel = np.abs(fd - aniso_result.coarea) / aniso_result.coarea
        assert np.median(rel) < 2e-3
        assert rel[2:-2].max() < 2e-2

    def test_levels_descend(self, aniso_result):
        assert np.all(np.diff(aniso_result.levels) < 0)
        top = aniso_result.levels[0]
        bottom = aniso_result.levels[-1]
        assert abs(bottom / top - 1e-6 / (1 - 1e-3)) < 1e-12


class TestSymmetrizeSphereTarget:
    def test_mass_entropy_transfer(self, flat_chart):
        # rearranging onto the round sphere preserves the layer-cake
        # integrals just the same
        a = np.diag([0.2, -0.05, 0.1])
        tf = build_test_function(flat_chart, None, mode=a, alpha=0.0, r_s=1.2)
        res = symmetrize(tf, t=0.01, K=1.0, levels=512, order=32)
        assert abs(res.mass_symmetrized - res.mass_original) < 1e-8
        assert abs(res.entropy_symmetrized - res.entropy_original) < 1e-8
        assert res.r_bar.max() < np.pi
        # positive curvature target: balls of equal volume have smaller
        # boundary, so the comparison area sits below the flat one
        flat_area = sphere_area_K(
            3, 0.0, np.array([iso_profile_radius(3, 0.0, float(v))
                              for v in res.volumes])
        )
        assert np.all(res.area_comparison <= flat_area + 1e-12)


class TestGuards:
    def test_non_flat_chart_rejected(self):
        chart = make_chart(ModelSpec(kind="space_form", n=3, K=1.0))
        nc = build_normal_chart(chart, np.zeros(3), r0=0.8)
        tf = build_test_function(
            nc, None, mode=np.zeros((3, 3)), alpha=0.0, r_s=0.6
        )
        with pytest.raises(ConfigInvalid):
            symmetrize(tf, t=0.001, K=1.0)

    def test_too_few_levels(self, flat_chart):
        tf = build_test_function(
            flat_chart, None, mode=np.zeros((3, 3)), alpha=0.0, r_s=1.2
        )
        with pytest.raises(ConfigInvalid):
            symmetrize(tf, t=0.01, levels=32)

    def test_nonmonotone_ray_detected(self, flat_chart):
        # strong positive profile growth beats the Gaussian decay at this
        # time scale, so u increases along some ray near the center
        tf = build_test_function(
            flat_chart, None, mode=0.5 * np.eye(3), alpha=0.0, r_s=1.2
        )
        with pytest.raises(LevelSetDegenerate):
            symmetrize(tf, t=1.0, levels=64)

    def test_spline_second_derivative_unavailable(self, radial_result):
        spl = radial_result.profile.spline()
        with pytest.raises(ValueError):
            spl(0.5, 2)
