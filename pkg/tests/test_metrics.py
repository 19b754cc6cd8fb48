import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from clrlr import DimensionError, DomainError, frob_error, kl_rowwise, sin_theta_sq, softmax_inv, top_k_svd
from clrlr.errors import ConfigError

from conftest import centered


def test_frob_error_examples(rng):
    z = rng.normal(size=(4, 5))
    assert frob_error(z, z) == 0.0
    assert frob_error(z + 0.3, z) == pytest.approx(5 * 0.09)
    with pytest.raises(DimensionError):
        frob_error(z, z[:, :4])


def test_kl_examples():
    assert kl_rowwise(np.zeros((2, 3)), np.zeros((2, 3))) == 0.0
    expected = 0.5 * np.log(2) + 0.5 * np.log(2 / 3)
    assert expected == pytest.approx(0.14384, abs=1e-5)
    z_hat = np.log([[0.25, 0.75]])
    assert kl_rowwise(np.zeros((1, 2)), z_hat) == pytest.approx(expected, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(arrays(float, (3, 4), elements=st.floats(-20, 20)), arrays(float, (3, 4), elements=st.floats(-20, 20)))
def test_kl_nonnegative(a, b):
    assert kl_rowwise(a, b) >= 0.0


def test_kl_zero_iff_equal_rows(rng):
    a = rng.normal(size=(3, 4))
    assert kl_rowwise(a, a + rng.normal(size=(3, 1))) <= 1e-12
    assert kl_rowwise(a, a + rng.normal(size=(3, 4)) * 0.1) > 1e-6


def test_sandwich_bound_standard_normal(rng):
    for _ in range(50):
        z_star, z_hat = centered(rng.normal(size=(5, 7))), centered(rng.normal(size=(5, 7)))
        x = softmax_inv(z_star)
        ratio = 5 * kl_rowwise(z_star, z_hat) / np.sum((z_star - z_hat) ** 2)
        assert x.min() - 1e-10 <= ratio <= x.max() + 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 3.0))
def test_sandwich_bound_with_exact_constants(seed, scale):
    # KL is half a quadratic form in the softmax Jacobian at a point on the
    # segment, whose nonzero eigenvalues lie between the smallest and largest
    # softmax entries there.
    rng = np.random.default_rng(seed)
    a, b = centered(rng.normal(size=(4, 6)) * scale), centered(rng.normal(size=(4, 6)) * scale)
    ts = np.linspace(0, 1, 401)
    path = np.stack([softmax_inv((1 - t) * a + t * b) for t in ts])
    kl_rows = np.array([kl_rowwise(a[i:i + 1], b[i:i + 1]) for i in range(4)])
    d2 = np.sum((a - b) ** 2, axis=1)
    for i in range(4):
        lo, hi = path[:, i].min(), path[:, i].max()
        ratio = kl_rows[i] / d2[i]
        assert 0.5 * lo * (1 - 1e-2) <= ratio <= 0.5 * hi * (1 + 1e-2)


class TestSinTheta:
    def test_identical(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(6, 3)))
        assert sin_theta_sq(q, q) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_lines(self):
        assert sin_theta_sq(np.array([1.0, 0, 0]), np.array([0, 1.0, 0])) == 1.0

    def test_45_degrees(self):
        v = np.array([1.0, 1.0, 0]) / np.sqrt(2)
        assert sin_theta_sq(v, np.array([1.0, 0, 0])) == pytest.approx(0.5, abs=1e-15)

    def test_symmetric_and_rotation_invariant(self, rng):
        for _ in range(20):
            a, _ = np.linalg.qr(rng.normal(size=(8, 3)))
            b, _ = np.linalg.qr(rng.normal(size=(8, 3)))
            rot, _ = np.linalg.qr(rng.normal(size=(3, 3)))
            d = sin_theta_sq(a, b)
            assert 0 <= d <= 3
            assert sin_theta_sq(b, a) == pytest.approx(d, abs=1e-10)
            assert sin_theta_sq(a @ rot, b) == pytest.approx(d, abs=1e-10)
            assert sin_theta_sq(a, b @ rot) == pytest.approx(d, abs=1e-10)

    def test_matches_principal_angles(self, rng):
        from scipy.linalg import subspace_angles
        a, _ = np.linalg.qr(rng.normal(size=(10, 4)))
        b, _ = np.linalg.qr(rng.normal(size=(10, 4)))
        assert sin_theta_sq(a, b) == pytest.approx(np.sum(np.sin(subspace_angles(a, b)) ** 2), abs=1e-10)

    def test_rejects_non_orthonormal(self):
        with pytest.raises(DomainError):
            sin_theta_sq(np.array([[1.0], [1.0]]), np.array([[1.0], [0.0]]))


class TestTopKSvd:
    def test_diag_sign_rule(self):
        out = top_k_svd(np.diag([3.0, 1.0]), 1)
        assert out.singular_values[0] == pytest.approx(3.0)
        np.testing.assert_allclose(out.right_vectors[:, 0], [1.0, 0.0])
        out = top_k_svd(-np.diag([3.0, 1.0]), 1)
        np.testing.assert_allclose(out.right_vectors[:, 0], [1.0, 0.0])
        np.testing.assert_allclose(out.left_vectors[:, 0], [-1.0, 0.0])

    def test_reconstruction_and_energy(self, rng):
        z = rng.normal(size=(7, 3)) @ rng.normal(size=(3, 5))
        out = top_k_svd(z, 3)
        np.testing.assert_allclose((out.left_vectors * out.singular_values) @ out.right_vectors.T, z, atol=1e-10)
        full = top_k_svd(z, 5)
        assert np.sum(full.singular_values ** 2) == pytest.approx(np.sum(z ** 2))
        np.testing.assert_allclose(full.right_vectors.T @ full.right_vectors, np.eye(5), atol=1e-8)
        assert np.all(np.diff(full.singular_values) <= 0)

    def test_k_out_of_range(self, rng):
        with pytest.raises(ConfigError):
            top_k_svd(rng.normal(size=(3, 4)), 4)
