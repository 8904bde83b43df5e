from __future__ import annotations

import math

import numpy as np
import pytest

from causal_locus.catalog import F1_AB
from causal_locus.hypersurface import (
    CausalClass,
    PreconditionError,
    SurfaceError,
    admissibility_residual,
    b_data,
    classify,
    graph,
    lemma_2_3_check,
    minkowski_ab_jets,
    minkowski_consistency,
    normalize_at_lightlike,
    point_report,
)
from causal_locus.metric import MetricChart, minkowski, perturbed_metric

F1 = "y + x^2 + x^3 + y*x^4"
F2 = "y - (1 + y)*x^3 - y^3*x^4"
F3 = "y + x^3 + x^4 + y*x^5"
KOBAYASHI = "(x + 1)*tanh(y)"
CONE = "sqrt(x^2 + (y + 1)^2) - 1"

GENERIC = MetricChart.from_strings(3, {"g12": "0.3*x1^2", "g00": "-1 - 0.2*x2^2", "g11": "1 + 0.1*x0"})


def random_poly(rng, n, degree=3, x="x{}"):
    """Random polynomial text in ``x1..xn`` of total degree ``degree`` with small coefficients."""
    terms = []
    for _ in range(6):
        powers = rng.integers(0, degree + 1, size=n)
        while powers.sum() > degree:
            powers[int(np.argmax(powers))] -= 1
        mono = "*".join(f"{x.format(i + 1)}^{k}" for i, k in enumerate(powers) if k) or "1"
        terms.append(f"{rng.uniform(-0.6, 0.6):.6f}*{mono}")
    return " + ".join(terms)


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


class TestPointReport:
    def test_f1_at_one_zero(self):
        r = point_report(graph(F1, 2), [1.0, 0.0])
        assert r.B == -28.0 and r.A == 56.0 and r.cls is CausalClass.TIMELIKE

    def test_f1_at_one_one(self):
        r = point_report(graph(F1, 2), [1.0, 1.0])
        assert r.B == pytest.approx(-84.0, abs=1e-12)
        assert r.A == pytest.approx(84.0, abs=1e-12)

    def test_f1_origin_degenerate(self):
        r = point_report(graph(F1, 2), [0.0, 0.0])
        assert r.B == 0.0 and not r.gradB.any()
        assert r.cls is CausalClass.LIGHTLIKE_DEGENERATE
        assert r.H is None and r.Hvec is None and r.Hhat is None

    def test_kobayashi_origin_nondegenerate(self):
        r = point_report(graph(KOBAYASHI, 2), [0.0, 0.0])
        assert r.B == 0.0 and np.linalg.norm(r.gradB) > 1.0
        assert r.cls is CausalClass.LIGHTLIKE_NONDEGENERATE

    def test_cone_vanishing(self):
        r = point_report(graph(CONE, 2), [0.3, 0.2])
        assert abs(r.B) < 1e-14 and abs(r.A) < 1e-14

    def test_mean_curvature_quantities(self):
        r = point_report(graph(F1, 2), [0.4, -0.3])
        n = 2
        assert r.H == pytest.approx(r.A / (n * abs(r.B) ** 1.5))
        assert r.Hhat == pytest.approx(math.copysign(r.H, r.B))
        assert r.omegaH * n * r.B == pytest.approx(r.A, rel=1e-15)
        np.testing.assert_allclose(r.Hvec, r.A / (n * r.B**2) * r.nu)
        assert r.theta == pytest.approx(math.sqrt(abs(r.B)))

    def test_classify_thresholds(self):
        assert classify(1e-9, np.zeros(2), 1e-10, 1e-8) is CausalClass.SPACELIKE
        assert classify(-1e-9, np.zeros(2), 1e-10, 1e-8) is CausalClass.TIMELIKE
        assert classify(1e-11, np.array([1e-9, 0]), 1e-10, 1e-8) is CausalClass.LIGHTLIKE_DEGENERATE
        assert classify(0.0, np.array([1e-7, 0]), 1e-10, 1e-8) is CausalClass.LIGHTLIKE_NONDEGENERATE

    def test_evaluation_failure(self):
        with pytest.raises(SurfaceError):
            point_report(graph("log(x)", 2), [-1.0, 0.0])
        with pytest.raises(SurfaceError):
            point_report(graph("x", 2), [0.0])

    def test_fast_path_needs_minkowski(self):
        with pytest.raises(PreconditionError):
            point_report(graph("y", 2, perturbed_metric()), [0.0, 0.0], path="minkowski")


class TestIdentities:
    """Pointwise identities over random polynomial graphs (500 points per metric)."""

    @pytest.fixture(scope="class")
    @classmethod
    def samples(cls):
        rng = np.random.default_rng(11)
        out = []
        for _ in range(50):
            n = int(rng.integers(2, 4))
            f = random_poly(rng, n)
            pts = rng.uniform(-0.7, 0.7, size=(10, n))
            out.append((f, n, pts))
        return out

    def test_normal_norm_minkowski(self, samples):
        for f, n, pts in samples:
            F = graph(f, n)
            for p in pts:
                for path in ("minkowski", "general"):
                    G = F if path == "minkowski" else graph(f, n, MetricChart.from_strings(n + 1, {}))
                    r = point_report(G, p, path=path)
                    g, _ = G.ambient.metric_at(G.point(p))
                    assert rel(r.nu @ g @ r.nu, -r.B) < 1e-10

    def test_normal_norm_general_metric(self, samples):
        # the determinant-expansion normal scales with det g; det g = -1 recovers g(nu, nu) = -B
        for f, n, pts in samples:
            if n != 2:
                continue
            F = graph(f, 2, GENERIC)
            for p in pts:
                r = point_report(F, p)
                g, _ = GENERIC.metric_at(F.point(p))
                assert rel(r.nu @ g @ r.nu, np.linalg.det(g) * r.B) < 1e-10

    def test_normal_norm_at_admissible_points(self):
        rng = np.random.default_rng(5)
        chart = perturbed_metric(0.1)
        for _ in range(20):
            F = graph(random_poly(rng, 2), 2, chart)
            p = np.array([0.0, rng.uniform(-0.7, 0.7)])
            r = point_report(F, p)
            g, _ = chart.metric_at(F.point(p))
            assert rel(r.nu @ g @ r.nu, -r.B) < 1e-10

    def test_cofactor_and_orthogonality(self, samples):
        for f, n, pts in samples:
            for chart in (minkowski(n), GENERIC if n == 2 else minkowski(n)):
                F = graph(f, n, chart)
                for p in pts[:4]:
                    r = point_report(F, p)
                    np.testing.assert_allclose(r.Scof @ r.S, r.B * np.eye(n), atol=1e-10 * (1 + np.abs(r.S).max() ** n))
                    np.testing.assert_array_equal(r.S, r.S.T)
                    g, _ = chart.metric_at(F.point(p))
                    assert np.max(np.abs(F.tangents(p) @ g @ r.nu)) < 1e-10

    def test_gradB_matches_differences(self, samples):
        h = 1e-6
        for f, n, pts in samples[:10]:
            for chart in (minkowski(n), GENERIC if n == 2 else minkowski(n)):
                F = graph(f, n, chart)
                p = pts[0]
                r = point_report(F, p)
                fd = [
                    (point_report(F, p + h * e).B - point_report(F, p - h * e).B) / (2 * h)
                    for e in np.eye(n)
                ]
                np.testing.assert_allclose(r.gradB, fd, atol=1e-7)

    def test_theta_rotation_invariant(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            f = random_poly(rng, 2, x="X{}")
            a = rng.uniform(0, 2 * np.pi)
            c, s = math.cos(a), math.sin(a)
            original = graph(f.replace("X1", "x").replace("X2", "y"), 2)
            # f_rot(u) = f(R u)
            rotated = graph(
                f.replace("X1", f"({c!r}*x - {s!r}*y)").replace("X2", f"({s!r}*x + {c!r}*y)"), 2
            )
            u = rng.uniform(-0.5, 0.5, size=2)
            Ru = np.array([c * u[0] - s * u[1], s * u[0] + c * u[1]])
            assert abs(point_report(rotated, u).theta - point_report(original, Ru).theta) < 1e-10

    def test_A_vanishes_at_degenerate_points(self):
        for f in (F1, F2, F3, "y + x^2*y^2", "y + (x + y^2)^3"):
            r = point_report(graph(f, 2), [0.0, 0.0])
            assert r.cls is CausalClass.LIGHTLIKE_DEGENERATE
            assert abs(r.A) < 1e-8


class TestConsistency:
    def test_f1(self):
        assert minkowski_consistency(graph(F1, 2), [0.3, -0.2]).max() < 1e-10

    def test_plane_exact(self):
        res = minkowski_consistency(graph("x3", 3), [0.2, -0.4, 0.9])
        assert res.max() == 0.0
        assert res.fast.B == 0.0 and res.general.B == 0.0

    def test_kobayashi_zero_mean_curvature(self):
        res = minkowski_consistency(graph(KOBAYASHI, 2), [0.5, 0.7])
        assert abs(res.fast.A) < 1e-10 and abs(res.general.A) < 1e-10

    def test_random_surfaces(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            n = int(rng.integers(2, 4))
            F = graph(random_poly(rng, n), n)
            assert minkowski_consistency(F, rng.uniform(-0.5, 0.5, size=n)).max() < 1e-10

    def test_requires_minkowski(self):
        with pytest.raises(PreconditionError):
            minkowski_consistency(graph("y", 2, perturbed_metric()), [0.0, 0.0])


class TestJetsOfAB:
    def test_closed_forms_f1(self):
        F = graph(F1, 2)
        A, B = minkowski_ab_jets(F.height.jet([0.0, 0.0], 14))
        for x, y in np.random.default_rng(0).uniform(-0.3, 0.3, size=(5, 2)):
            Ac, Bc = F1_AB(x, y)
            assert A.evaluate([x, y]) == pytest.approx(Ac, abs=1e-12)
            assert B.evaluate([x, y]) == pytest.approx(Bc, abs=1e-12)

    def test_b_data_general_metric(self):
        F = graph("0.2*x^2 + y + 0.1*x*y^2", 2, GENERIC)
        B, gB, HB = b_data(F, [0.1, 0.2])
        h = 1e-4
        fd = np.array(
            [[(point_report(F, [0.1 + h * (i == 0) + h * (j == 0), 0.2 + h * (i == 1) + h * (j == 1)]).B
               - point_report(F, [0.1 + h * (i == 0) - h * (j == 0), 0.2 + h * (i == 1) - h * (j == 1)]).B
               - point_report(F, [0.1 - h * (i == 0) + h * (j == 0), 0.2 - h * (i == 1) + h * (j == 1)]).B
               + point_report(F, [0.1 - h * (i == 0) - h * (j == 0), 0.2 - h * (i == 1) - h * (j == 1)]).B)
              / (4 * h * h) for j in range(2)] for i in range(2)]
        )
        np.testing.assert_allclose(HB, fd, atol=1e-5)


class TestAdmissibility:
    def test_f2_with_recovered_phi(self):
        F = graph(F2, 2)
        rng = np.random.default_rng(4)
        grid = rng.uniform(-0.4, 0.4, size=(60, 2))
        grid = grid[np.abs(grid[:, 0]) > 0.05]

        def phi(p):
            r = point_report(F, p)
            return r.A / r.B

        assert admissibility_residual(F, phi, 0, grid) < 1e-9

    def test_kobayashi_zero_phi(self):
        grid = np.random.default_rng(1).uniform(-0.5, 0.5, size=(40, 2))
        for alpha in (0, 1, 0.5):
            assert admissibility_residual(graph(KOBAYASHI, 2), None, alpha, grid) < 1e-10

    def test_plane(self):
        assert admissibility_residual(graph("y", 2), "0", 0, [[0.1, 0.2], [0.3, -0.4]]) == 0.0


class TestNormalisation:
    def test_rotates_gradient_to_last_axis(self):
        F = graph("x + y^2 + x*y", 2)
        G = normalize_at_lightlike(F, [0.0, 0.0])
        j = G.height.jet([0.0, 0.0], 1)
        np.testing.assert_allclose(j.gradient(), [0.0, 1.0], atol=1e-15)
        assert abs(j.constant) < 1e-15
        # the causal data is invariant under the rigid motion
        assert point_report(G, [0.0, 0.0]).B == pytest.approx(0.0, abs=1e-15)

    def test_translates_off_origin_points(self):
        # the cone is light-like everywhere
        G = normalize_at_lightlike(graph(CONE, 2), [0.3, 0.2])
        j = G.height.jet([0.0, 0.0], 1)
        np.testing.assert_allclose(j.gradient(), [0.0, 1.0], atol=1e-14)
        assert abs(j.constant) < 1e-14

    def test_f1_unchanged(self):
        F = graph(F1, 2)
        assert normalize_at_lightlike(F, [0.0, 0.0]) is F

    def test_spacelike_rejected(self):
        with pytest.raises(PreconditionError):
            normalize_at_lightlike(graph("0.5*y", 2), [0.1, 0.2])


class TestLemma23:
    def test_f1_degenerate(self):
        rep = lemma_2_3_check(graph(F1, 2))
        assert rep.max_residual() < 1e-12 and rep.degenerate

    def test_kobayashi_nondegenerate(self):
        rep = lemma_2_3_check(graph(KOBAYASHI, 2))
        assert rep.Bn < 1e-12 and rep.mixed[0] == pytest.approx(1.0) and not rep.degenerate

    def test_f3_degenerate(self):
        assert lemma_2_3_check(graph(F3, 2)).degenerate

    def test_requires_normalised_input(self):
        with pytest.raises(PreconditionError):
            lemma_2_3_check(graph("x + y^2", 2))
