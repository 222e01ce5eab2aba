"""Krylov extreme-pair routines against dense SVD / eigendecomposition."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchycgm import (
    CodedDiffractionOperator,
    EntrySamplingOperator,
    ImplicitGradientMatrix,
    NoConvergence,
    SpectralConfig,
    ZeroGradient,
    max_sing_vec,
    min_eig,
)
from helpers import random_mask


def _aligned(a, b, tol):
    """Equal up to a unit phase, checked after aligning on the inner product."""
    inner = np.vdot(a, b)
    assert abs(inner) > 0
    return np.linalg.norm(a * (inner / abs(inner)) - b) <= tol


class TestMaxSingVec:
    def test_matches_dense_svd_real(self):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((40, 30))
        u, v, sigma = max_sing_vec(M, SpectralConfig(tol=1e-10))
        U, s, Vh = np.linalg.svd(M)
        assert sigma == pytest.approx(s[0], rel=1e-10)
        assert _aligned(U[:, 0], u, 1e-7)
        assert _aligned(Vh[0].conj(), v, 1e-7)

    def test_matches_dense_svd_complex(self):
        rng = np.random.default_rng(1)
        M = rng.standard_normal((25, 35)) + 1j * rng.standard_normal((25, 35))
        u, v, sigma = max_sing_vec(M, SpectralConfig(tol=1e-10))
        s = np.linalg.svd(M, compute_uv=False)
        assert sigma == pytest.approx(s[0], rel=1e-10)
        # residuals certify the pair without fixing a phase convention
        assert np.linalg.norm(M @ v - sigma * u) <= 1e-9 * sigma
        assert np.linalg.norm(M.conj().T @ u - sigma * v) <= 1e-9 * sigma

    def test_diagonal_example(self):
        M = np.diag([1.0, 5.0, 3.0])
        u, v, sigma = max_sing_vec(M, SpectralConfig(tol=1e-12))
        assert sigma == pytest.approx(5.0, rel=1e-12)
        np.testing.assert_allclose(np.abs(u), [0, 1, 0], atol=1e-8)

    def test_phase_canonicalization(self):
        # largest-magnitude entry of u comes back real positive
        rng = np.random.default_rng(2)
        M = rng.standard_normal((12, 9)) + 1j * rng.standard_normal((12, 9))
        u, _, _ = max_sing_vec(M, SpectralConfig(tol=1e-10))
        top = u[np.argmax(np.abs(u))]
        assert abs(top.imag) <= 1e-10 * abs(top)
        assert top.real > 0

    def test_same_seed_same_output(self):
        rng = np.random.default_rng(3)
        M = rng.standard_normal((20, 15))
        out1 = max_sing_vec(M, SpectralConfig(tol=1e-10), start_seed=(4, 2))
        out2 = max_sing_vec(M, SpectralConfig(tol=1e-10), start_seed=(4, 2))
        np.testing.assert_array_equal(out1[0], out2[0])
        np.testing.assert_array_equal(out1[1], out2[1])
        assert out1[2] == out2[2]

    def test_implicit_equals_dense_route(self):
        rng = np.random.default_rng(4)
        rows, cols = random_mask(rng, 15, 11, 0.6)
        op = EntrySamplingOperator(15, 11, rows, cols)
        z = rng.standard_normal(op.d)
        G = np.zeros((15, 11))
        G[rows, cols] = z
        u_i, v_i, s_i = max_sing_vec(ImplicitGradientMatrix(op, z), SpectralConfig(tol=1e-10))
        u_d, v_d, s_d = max_sing_vec(G, SpectralConfig(tol=1e-10))
        assert s_i == pytest.approx(s_d, rel=1e-10)
        assert _aligned(u_i, u_d, 1e-7)

    def test_zero_gradient_raises(self):
        op = EntrySamplingOperator(4, 4, [0, 1], [0, 1])
        with pytest.raises(ZeroGradient):
            max_sing_vec(ImplicitGradientMatrix(op, np.zeros(2)))

    def test_budget_exhaustion_raises(self):
        rng = np.random.default_rng(5)
        M = rng.standard_normal((50, 50))
        with pytest.raises(NoConvergence):
            max_sing_vec(M, SpectralConfig(tol=1e-14, max_iters=2))

    def test_residual_certificate(self):
        rng = np.random.default_rng(6)
        M = rng.standard_normal((30, 30))
        tol = 1e-9
        u, v, sigma = max_sing_vec(M, SpectralConfig(tol=tol))
        assert np.linalg.norm(M @ v - sigma * u) <= tol * sigma
        assert np.linalg.norm(M.T @ u - sigma * v) <= tol * sigma

    @settings(deadline=None, max_examples=15)
    @given(seed=st.integers(0, 2**31 - 1), scale=st.floats(0.1, 100.0))
    def test_homogeneity(self, seed, scale):
        # scaling the matrix scales sigma and leaves the vectors unchanged
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((10, 8))
        u1, v1, s1 = max_sing_vec(M, SpectralConfig(tol=1e-10))
        u2, v2, s2 = max_sing_vec(scale * M, SpectralConfig(tol=1e-10))
        assert s2 == pytest.approx(scale * s1, rel=1e-7)
        assert _aligned(u1, u2, 1e-6)


class TestMinEig:
    def test_matches_dense_eigh(self):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((25, 25))
        H = 0.5 * (A + A.T)
        lam, u = min_eig(H, SpectralConfig(tol=1e-10))
        w, Q = np.linalg.eigh(H)
        assert lam == pytest.approx(w[0], rel=1e-9, abs=1e-9)
        assert _aligned(Q[:, 0], u, 1e-6)

    def test_complex_hermitian(self):
        rng = np.random.default_rng(8)
        A = rng.standard_normal((18, 18)) + 1j * rng.standard_normal((18, 18))
        H = 0.5 * (A + A.conj().T)
        lam, u = min_eig(H, SpectralConfig(tol=1e-10))
        w = np.linalg.eigvalsh(H)
        assert lam == pytest.approx(w[0], rel=1e-9)
        assert np.linalg.norm(H @ u - lam * u) <= 1e-8 * np.abs(w).max()

    def test_diagonal_example(self):
        H = np.diag([4.0, -2.0, 1.0])
        lam, u = min_eig(H, SpectralConfig(tol=1e-12))
        assert lam == pytest.approx(-2.0, rel=1e-12)
        np.testing.assert_allclose(np.abs(u), [0, 1, 0], atol=1e-8)

    def test_positive_definite_bottom(self):
        # bottom of a pd matrix is positive; the solver uses the sign to
        # decide whether the psd step direction is zero
        H = np.diag([1.0, 2.0, 3.0]) + 0.1
        lam, _ = min_eig(H, SpectralConfig(tol=1e-10))
        assert lam > 0

    def test_requires_square(self):
        rng = np.random.default_rng(9)
        with pytest.raises(Exception):
            min_eig(rng.standard_normal((4, 5)))

    def test_implicit_route(self):
        op = CodedDiffractionOperator(10, 3, seed=2)
        rng = np.random.default_rng(10)
        z = rng.standard_normal(op.d)
        G = ImplicitGradientMatrix(op, z)
        lam, u = min_eig(G, SpectralConfig(tol=1e-9))
        # adjoint of a real z under this family is Hermitian; check residual
        resid = G.matvec(u) - lam * u
        scale = max(abs(lam), np.linalg.norm(G.matvec(u)))
        assert np.linalg.norm(resid) <= 1e-7 * max(scale, 1e-30)
