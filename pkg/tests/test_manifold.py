import math

import numpy as np
import pytest

from covrank import AntipodalPairError, Euclidean, UnitSphere, rng_stream

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])


def random_sphere_points(n, count, seed=0):
    rng = rng_stream(seed)
    g = rng.standard_normal((count, n + 1))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


class TestDistance:
    def test_pythagorean(self):
        assert Euclidean(2).distance((0, 0), (3, 4)) == 5.0

    def test_antipodal(self):
        assert UnitSphere(2).distance(E1, -E1) == pytest.approx(math.pi)

    def test_orthogonal_unit_vectors(self):
        assert UnitSphere(2).distance(E1, E2) == pytest.approx(math.pi / 2)

    def test_symmetry_is_exact(self):
        sphere = UnitSphere(3)
        pts = random_sphere_points(3, 40, seed=5)
        for p, q in zip(pts[:20], pts[20:]):
            assert sphere.distance(p, q) == sphere.distance(q, p)
        eucl = Euclidean(3)
        rng = rng_stream(6)
        for _ in range(20):
            p, q = rng.random(3), rng.random(3)
            assert eucl.distance(p, q) == eucl.distance(q, p)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            Euclidean(2).distance((0, 0, 0), (1, 1))
        with pytest.raises(ValueError):
            UnitSphere(2).distance(E1, np.array([1.0, 0.0]))

    def test_triangle_inequality_on_sphere(self):
        sphere = UnitSphere(2)
        pts = random_sphere_points(2, 300, seed=11)
        for a, b, c in pts.reshape(100, 3, 3):
            assert sphere.distance(a, c) <= sphere.distance(a, b) + sphere.distance(b, c) + 1e-9


class TestLogExp:
    def test_euclidean_log(self):
        v = Euclidean(2).log_map((1, 1), (4, 5))
        assert np.array_equal(v, [3.0, 4.0])
        assert np.linalg.norm(v) == 5.0

    def test_sphere_log_at_same_point_is_zero(self):
        assert np.array_equal(UnitSphere(2).log_map(E1, E1), np.zeros(3))

    def test_sphere_log_quarter_turn(self):
        # by the log formula: theta = pi/2, sin theta = 1, cos theta = 0
        v = UnitSphere(2).log_map(E1, E2)
        np.testing.assert_allclose(v, [0.0, math.pi / 2, 0.0], atol=1e-15)
        assert np.linalg.norm(v) == pytest.approx(math.pi / 2)
        assert abs(v @ E1) <= 1e-10  # tangency

    def test_antipodal_log_refused(self):
        with pytest.raises(AntipodalPairError):
            UnitSphere(2).log_map(E1, -E1)

    def test_euclidean_exp(self):
        assert np.array_equal(Euclidean(2).exp_map((1, 1), (3, 4)), [4.0, 5.0])

    def test_sphere_exp_quarter_turn(self):
        sphere = UnitSphere(2)
        q = sphere.exp_map(E1, (math.pi / 2) * E2)
        np.testing.assert_allclose(q, E2, atol=1e-15)
        assert sphere.distance(E1, q) == pytest.approx(math.pi / 2)

    def test_exp_of_zero_is_base(self):
        assert np.array_equal(UnitSphere(2).exp_map(E1, np.zeros(3)), E1)
        assert np.array_equal(Euclidean(3).exp_map((1, 2, 3), np.zeros(3)), [1.0, 2.0, 3.0])

    def test_non_tangent_vector_refused(self):
        with pytest.raises(ValueError, match="tangent"):
            UnitSphere(2).exp_map(E1, np.array([0.5, 0.1, 0.0]))

    @pytest.mark.parametrize("seed", range(5))
    def test_log_exp_round_trip(self, seed):
        sphere = UnitSphere(2)
        pts = random_sphere_points(2, 40, seed=seed)
        for p, q in zip(pts[:20], pts[20:]):
            v = sphere.log_map(p, q)
            assert abs(np.linalg.norm(v) - sphere.distance(p, q)) <= 1e-10
            np.testing.assert_allclose(sphere.exp_map(p, v), q, atol=1e-10)


class TestSampling:
    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            UnitSphere(2).sample_uniform(0, seed=1)

    def test_degenerate_box_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            Euclidean(2).sample_uniform(5, seed=1, region=(1.0, 1.0))

    def test_sphere_region_rejected(self):
        with pytest.raises(ValueError):
            UnitSphere(2).sample_uniform(5, seed=1, region=(0.0, 1.0))

    def test_sphere_points_are_unit(self):
        pts = UnitSphere(2).sample_uniform(10, seed=7).points
        assert pts.shape == (10, 3)
        assert np.all(np.abs(np.linalg.norm(pts, axis=1) - 1.0) <= 1e-12)

    def test_determinism_is_bitwise(self):
        sphere = UnitSphere(2)
        a = sphere.sample_uniform(100, seed=42)
        b = sphere.sample_uniform(100, seed=42)
        assert np.array_equal(a.points, b.points)
        c = sphere.sample_uniform(100, seed=42, stream=1)
        assert not np.array_equal(a.points, c.points)

    def test_box_respected(self):
        pts = Euclidean(2).sample_uniform(200, seed=3, region=(-1.0, 2.0)).points
        assert np.all(pts >= -1.0) and np.all(pts <= 2.0)
        default = Euclidean(2).sample_uniform(200, seed=3).points
        assert np.all(default >= 0.0) and np.all(default <= 1.0)

    def test_hemisphere_balance(self):
        # fraction of positive entries per axis within a 4-sigma binomial band
        k = 4000
        pts = UnitSphere(2).sample_uniform(k, seed=17).points
        band = 4 * math.sqrt(0.25 / k)
        for axis in range(3):
            frac = np.mean(pts[:, axis] > 0)
            assert abs(frac - 0.5) <= band

    def test_points_are_read_only(self):
        ss = UnitSphere(2).sample_uniform(4, seed=1)
        with pytest.raises(ValueError):
            ss.points[0, 0] = 2.0


class TestExpectedDistance:
    def test_sphere_mean_is_half_pi(self):
        est = UnitSphere(2).expected_distance(10**5, seed=1)
        assert abs(est - math.pi / 2) <= 0.02

    def test_unit_interval_mean_is_one_third(self):
        # E |X - Y| for X, Y ~ Unif[0,1] integrates to 1/3
        est = Euclidean(1).expected_distance(10**5, seed=1)
        assert abs(est - 1 / 3) <= 0.01

    def test_single_trial_is_one_pair_distance(self):
        sphere = UnitSphere(2)
        pts = sphere.sample_uniform(2, seed=9).points
        assert sphere.expected_distance(1, seed=9) == sphere.distance(pts[0], pts[1])

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            UnitSphere(2).expected_distance(0, seed=1)


def test_rng_stream_rejects_negative():
    with pytest.raises(ValueError):
        rng_stream(-1)
    with pytest.raises(ValueError):
        rng_stream(1, -2)


def test_empirical_pairwise_mean_matches_expected_distance():
    # sampling-based cross-check of the pairwise-distance estimate
    sphere = UnitSphere(2)
    pts = sphere.sample_uniform(2 * 10**5, seed=13).points
    mean = np.mean(sphere.paired_distance(pts[: 10**5], pts[10**5 :]))
    assert abs(mean - math.pi / 2) <= 0.02
