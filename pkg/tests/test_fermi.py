from __future__ import annotations

import numpy as np
import pytest

from causal_locus.fermi import (
    FermiError,
    build_fermi_chart,
    jacobian_sign_check,
    null_frame_at,
    null_pattern,
    verify_fermi,
)
from causal_locus.geodesics import geodesic_ivp
from causal_locus.metric import MetricChart, minkowski, minkowski_as_generic, perturbed_metric

PERTURBED = perturbed_metric(0.1)
V = np.array([1.0, 1.0, 0.0])


@pytest.fixture(scope="module")
def perturbed_chart():
    return build_fermi_chart(PERTURBED, np.zeros(3), V)


class TestNullFrame:
    def test_minkowski_pattern_exact(self):
        fr = null_frame_at(minkowski(2), np.zeros(3), [1.0, 0.0, 1.0])
        np.testing.assert_array_equal(fr.gram(minkowski(2)), null_pattern(3))
        np.testing.assert_array_equal(fr.vectors[0], [1.0, 0.0, 1.0])

    @pytest.mark.parametrize("dim", [3, 4, 5])
    def test_random_null_directions(self, dim):
        rng = np.random.default_rng(dim)
        chart = minkowski(dim - 1)
        for _ in range(10):
            s = rng.normal(size=dim - 1)
            v = np.concatenate([[np.linalg.norm(s)], s])
            assert null_frame_at(chart, np.zeros(dim), v).defect(chart) < 1e-10

    def test_general_metric(self):
        p = np.array([0.0, 0.4, -0.3])
        g, _ = PERTURBED.metric_at(p)
        # null vector with spatial part (1, 0.5)
        s = np.array([1.0, 0.5])
        v = np.concatenate([[np.sqrt(s @ g[1:, 1:] @ s)], s])
        assert null_frame_at(PERTURBED, p, v).defect(PERTURBED) < 1e-10

    def test_rejects_non_null_and_zero(self):
        with pytest.raises(FermiError, match="not null"):
            null_frame_at(minkowski(2), np.zeros(3), [1.0, 0.0, 0.0])
        with pytest.raises(FermiError, match="nonzero"):
            null_frame_at(minkowski(2), np.zeros(3), [0.0, 0.0, 0.0])


class TestCoordinates:
    def test_linear_change_round_trip(self, perturbed_chart):
        x = np.array([0.3, -0.1, 0.2])
        np.testing.assert_allclose(perturbed_chart.to_x(perturbed_chart.to_y(x)), x, atol=1e-15)
        np.testing.assert_allclose(perturbed_chart.axis_point(0.5), [0.5 / np.sqrt(2), 0.0, 0.5 / np.sqrt(2)])

    def test_axis_maps_to_sigma(self, perturbed_chart):
        fc = perturbed_chart
        for t in (0.0, 0.25, 1.0):
            k = int(np.argmin(np.abs(fc.ts - t)))
            np.testing.assert_allclose(fc.psi(fc.axis_point(t)), fc.sigma[k], atol=1e-12)

    def test_minkowski_chart_is_affine(self):
        fc = build_fermi_chart(minkowski_as_generic(2), np.zeros(3), V, t_span=(0.0, 1.0))
        y = np.array([0.4, 0.1, -0.2])
        _, _, E = fc.frame_at(0.4)
        expect = fc.frame_at(0.4)[0] + y[1:] @ E[1:]
        np.testing.assert_allclose(fc.phi(y), expect, atol=1e-14)

    def test_off_grid_parameter(self, perturbed_chart):
        fc = perturbed_chart
        base, vel, E = fc.frame_at(0.1234)
        ref = geodesic_ivp(PERTURBED, np.zeros(3), fc.velocity[np.argmin(np.abs(fc.ts))], (0.0, 0.1234), 1e-4)
        np.testing.assert_allclose(base, ref[-1].x, atol=1e-10)
        np.testing.assert_allclose(E[0], vel, atol=1e-8)

    def test_parameter_range(self, perturbed_chart):
        with pytest.raises(FermiError, match="outside"):
            perturbed_chart.frame_at(2.0)

    def test_t_span_must_contain_zero(self):
        with pytest.raises(FermiError):
            build_fermi_chart(PERTURBED, np.zeros(3), V, t_span=(0.5, 1.0))


class TestVerification:
    def test_minkowski(self):
        for chart in (minkowski(2), minkowski_as_generic(2)):
            fc = build_fermi_chart(chart, np.zeros(3), V, t_span=(-0.1, 1.1))
            rep = verify_fermi(fc, [0.0, 0.5, 1.0])
            assert rep.a1 < 1e-9 and rep.a2 < 1e-10 and rep.a3 < 1e-10

    def test_perturbed(self, perturbed_chart):
        rep = verify_fermi(perturbed_chart, [0.0, 0.3, 0.7, 1.0])
        assert rep.a1 < 1e-9
        assert rep.a2 < 1e-6 and rep.a3 < 1e-5
        assert rep.frame < 1e-8 and rep.velocity < 1e-8
        assert len(rep.a2_samples) == 4

    def test_christoffels_two_ways(self, perturbed_chart):
        x = perturbed_chart.axis_point(0.5)
        np.testing.assert_allclose(
            perturbed_chart.christoffels(x), perturbed_chart.christoffels_from_metric(x), atol=1e-10
        )

    def test_perturbed_ambient_is_flat(self, perturbed_chart):
        # g12 = eps x1^2 is a shear of flat coordinates, so the Fermi metric is flat off the axis too
        x = perturbed_chart.axis_point(0.5) + np.array([0.0, 0.3, 0.0])
        G, _ = perturbed_chart.metric_at(x)
        assert np.max(np.abs(G - np.diag([-1.0, 1.0, 1.0]))) < 1e-9

    def test_curved_metric_flat_only_on_axis(self):
        chart = MetricChart.from_strings(3, {"g00": "-1 - 0.2*x2^2"})
        fc = build_fermi_chart(chart, np.zeros(3), V, t_span=(-0.1, 0.6))
        on = fc.axis_point(0.5)
        off = on + np.array([0.0, 0.3, 0.0])
        eta = np.diag([-1.0, 1.0, 1.0])
        assert np.max(np.abs(fc.metric_at(on)[0] - eta)) < 1e-6
        assert np.max(np.abs(fc.metric_at(off)[0] - eta)) > 1e-3

    def test_negative_control(self):
        fc = build_fermi_chart(PERTURBED, np.zeros(3), V, parallel=False)
        rep = verify_fermi(fc, [0.5, 1.0])
        assert rep.a3 > 1e-2

    def test_fd_step_too_large(self, perturbed_chart):
        with pytest.raises(FermiError):
            verify_fermi(perturbed_chart, [0.5], fd_step=0.3)

    def test_jacobian_sign(self, perturbed_chart):
        rng = np.random.default_rng(2)
        pts = []
        for t in (0.2, 0.6):
            for _ in range(4):
                y = np.concatenate([[t], rng.uniform(-0.3, 0.3, 2)])
                pts.append(perturbed_chart.to_x(y))
        constant, smallest = jacobian_sign_check(perturbed_chart, pts)
        assert constant and smallest > 0.5

    def test_other_null_direction(self):
        chart = MetricChart.from_strings(3, {"g12": "0.1*x1^2", "g00": "-1 - 0.05*x2^2"})
        fc = build_fermi_chart(chart, np.zeros(3), [1.0, 0.6, 0.8], t_span=(-0.1, 0.6))
        rep = verify_fermi(fc, [0.0, 0.5])
        assert rep.a2 < 1e-6 and rep.a3 < 1e-5
