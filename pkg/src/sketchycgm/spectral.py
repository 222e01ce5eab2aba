"""Extreme singular triples and eigenpairs of the implicit gradient matrix.

The matrix G = adjoint(z) built from a gradient vector z is reached only
through one-sided products G v and G* u supplied by a measurement operator;
it is never materialized. ``max_sing_vec`` runs restarted Golub-Kahan
bidiagonalization with full reorthogonalization. ``min_eig`` runs restarted
Hermitian Lanczos tridiagonalization and reads off the minimum Ritz pair;
because Krylov spaces are shift invariant this coincides with shifting by a
norm estimate and chasing the top of the shifted matrix, and the norm
estimate survives as the residual scale. Start vectors are drawn from a
seeded generator so that independent runs reproduce identical direction
sequences. Workspace is bounded by the Krylov cap, keeping storage linear
in m + n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, ZeroGradient
from .memory import ledger

__all__ = [
    "SpectralConfig",
    "ImplicitGradientMatrix",
    "max_sing_vec",
    "min_eig",
]

_BREAKDOWN = 1e-14
_CHECK_EVERY = 5


@dataclass(frozen=True)
class SpectralConfig:
    tol: float = 1e-8
    max_iters: int = 500
    seed: int = 0
    krylov_dim: int = 96

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1 or self.krylov_dim < 1:
            raise ValueError("iteration limits must be positive")


class ImplicitGradientMatrix:
    """The m-by-n matrix adjoint(z), applied through operator primitives."""

    def __init__(self, op, z):
        z = np.asarray(z)
        if z.shape != (op.d,):
            raise DimensionMismatch(f"z has shape {z.shape}, expected ({op.d},)")
        self.op = op
        self.g = z
        self.shape = (op.m, op.n)
        self.iscomplex = np.issubdtype(op.field, np.complexfloating) or np.iscomplexobj(z)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.op.right_apply_adjoint(self.g, v)

    def rmatvec(self, u: np.ndarray) -> np.ndarray:
        # rows of the conjugate transpose are conjugated left actions
        return np.conj(self.op.left_apply_adjoint(self.g, u))


class _DenseLinop:
    """Adapter so dense arrays can feed the same iterations in tests."""

    def __init__(self, M: np.ndarray):
        self.M = np.asarray(M)
        self.shape = self.M.shape
        self.iscomplex = np.iscomplexobj(self.M)

    def matvec(self, v):
        return self.M @ v

    def rmatvec(self, u):
        return self.M.conj().T @ u


def _as_linop(G):
    if isinstance(G, np.ndarray):
        return _DenseLinop(G)
    return G


def _start_vector(size: int, iscomplex: bool, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(size)
    if iscomplex:
        v = v + 1j * rng.standard_normal(size)
    return v / np.linalg.norm(v)


def _canonical_phase(u: np.ndarray):
    """Unit scalar that rotates u's largest-magnitude entry to the positive reals."""
    i = int(np.argmax(np.abs(u)))
    p = u[i]
    if p == 0:
        return 1.0
    return np.conj(p / abs(p))


def max_sing_vec(G, cfg: SpectralConfig | None = None, start_seed=None):
    """Top singular triple (u, v, sigma) of an implicit matrix.

    Parameters
    ----------
    G : object with shape, matvec, rmatvec, iscomplex (or a dense ndarray)
    cfg : SpectralConfig, residual tolerance and iteration budget
    start_seed : overrides cfg.seed for the start vector draw

    The returned pair satisfies ``max(|G v - sigma u|, |G* u - sigma v|)
    <= tol * sigma`` and u's largest-magnitude entry is real positive.
    Raises ``ZeroGradient`` on a numerically zero matrix and
    ``NoConvergence`` if the budget runs out.
    """
    cfg = cfg or SpectralConfig()
    G = _as_linop(G)
    m, n = G.shape
    g = getattr(G, "g", None)
    if g is not None and np.linalg.norm(g) == 0.0:
        raise ZeroGradient("gradient vector is identically zero")
    v0 = _start_vector(n, G.iscomplex, cfg.seed if start_seed is None else start_seed)
    width = 2 if G.iscomplex else 1
    used = 0
    while used < cfg.max_iters:
        cap = int(min(cfg.krylov_dim, cfg.max_iters - used, min(m, n)))
        with ledger.track("spectral", width * (m + n) * cap + 4 * cap):
            u, v, sigma, resid, steps = _gk_cycle(G, v0, cap, cfg.tol)
        used += steps
        if sigma > 0 and resid <= cfg.tol * sigma:
            ph = _canonical_phase(u)
            return u * ph, v * ph, float(sigma)
        v0 = v
    raise NoConvergence(f"top singular pair not resolved in {cfg.max_iters} Lanczos steps")


def _gk_cycle(G, v0, cap, tol):
    """One Golub-Kahan cycle from v0; returns the best Ritz triple found."""
    m, n = G.shape
    dt = np.complex128 if G.iscomplex else np.float64
    V = np.zeros((n, cap), dtype=dt)
    U = np.zeros((m, cap), dtype=dt)
    alphas = np.zeros(cap)
    betas = np.zeros(cap)
    V[:, 0] = v0
    p = G.matvec(v0)
    a = np.linalg.norm(p)
    if a == 0.0:
        raise ZeroGradient("start vector is annihilated; the matrix is numerically zero")
    U[:, 0] = p / a
    alphas[0] = a
    J = 1
    exhausted = False
    while True:
        if exhausted or J == cap or J % _CHECK_EVERY == 0:
            B = np.zeros((J, J))
            B[np.arange(J), np.arange(J)] = alphas[:J]
            if J > 1:
                B[np.arange(J - 1), np.arange(1, J)] = betas[: J - 1]
            P, svals, Qh = np.linalg.svd(B)
            sigma = svals[0]
            u = U[:, :J] @ P[:, 0]
            v = V[:, :J] @ Qh[0]
            ru = np.linalg.norm(G.matvec(v) - sigma * u)
            rv = np.linalg.norm(G.rmatvec(u) - sigma * v)
            resid = max(ru, rv)
            if exhausted or J == cap or (sigma > 0 and resid <= tol * sigma):
                return u, v, sigma, resid, J
        # expand the factorization by one pair
        r = G.rmatvec(U[:, J - 1]) - alphas[J - 1] * V[:, J - 1]
        for _ in range(2):
            r -= V[:, :J] @ (V[:, :J].conj().T @ r)
        b = np.linalg.norm(r)
        if b <= _BREAKDOWN * alphas[:J].max():
            exhausted = True
            continue
        betas[J - 1] = b
        V[:, J] = r / b
        s = G.matvec(V[:, J]) - b * U[:, J - 1]
        for _ in range(2):
            s -= U[:, :J] @ (U[:, :J].conj().T @ s)
        a = np.linalg.norm(s)
        if a <= _BREAKDOWN * alphas[:J].max():
            exhausted = True
            continue
        alphas[J] = a
        U[:, J] = s / a
        J += 1


def min_eig(G, cfg: SpectralConfig | None = None, start_seed=None):
    """Minimum eigenpair (lam, u) of an implicit Hermitian matrix.

    The caller guarantees G is Hermitian (matvec only is used). The result
    satisfies ``|G u - lam u| <= tol * norm_estimate`` with the norm
    estimated from the extreme Ritz values, and u's largest-magnitude entry
    is real positive.
    """
    cfg = cfg or SpectralConfig()
    G = _as_linop(G)
    n, n2 = G.shape
    if n != n2:
        raise DimensionMismatch("min_eig needs a square matrix")
    g = getattr(G, "g", None)
    if g is not None and np.linalg.norm(g) == 0.0:
        raise ZeroGradient("gradient vector is identically zero")
    q0 = _start_vector(n, G.iscomplex, cfg.seed if start_seed is None else start_seed)
    width = 2 if G.iscomplex else 1
    used = 0
    while used < cfg.max_iters:
        cap = int(min(cfg.krylov_dim, cfg.max_iters - used, n))
        with ledger.track("spectral", width * n * cap + 4 * cap):
            u, lam, resid, norm_est, steps, exact = _lanczos_cycle(G, q0, cap, cfg.tol)
        used += steps
        if exact or resid <= cfg.tol * max(norm_est, 1e-300):
            return float(lam), u * _canonical_phase(u)
        q0 = u / np.linalg.norm(u)
    raise NoConvergence(f"minimum eigenpair not resolved in {cfg.max_iters} Lanczos steps")


def _lanczos_cycle(G, q0, cap, tol):
    """One Hermitian Lanczos cycle from q0; returns the bottom Ritz pair."""
    n = G.shape[0]
    dt = np.complex128 if G.iscomplex else np.float64
    Q = np.zeros((n, cap), dtype=dt)
    alphas = np.zeros(cap)
    betas = np.zeros(cap)
    Q[:, 0] = q0
    j = 0
    exhausted = False
    while True:
        w = G.matvec(Q[:, j])
        alphas[j] = float(np.real(np.vdot(Q[:, j], w)))
        w = w - alphas[j] * Q[:, j]
        if j > 0:
            w = w - betas[j - 1] * Q[:, j - 1]
        for _ in range(2):
            w -= Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ w)
        J = j + 1
        b = np.linalg.norm(w)
        scale = max(float(np.abs(alphas[:J]).max()), float(betas[:J].max()), 1e-300)
        if b <= _BREAKDOWN * scale:
            exhausted = True
        if exhausted or J == cap or J % _CHECK_EVERY == 0:
            T = np.diag(alphas[:J])
            if J > 1:
                T += np.diag(betas[: J - 1], 1) + np.diag(betas[: J - 1], -1)
            evals, evecs = np.linalg.eigh(T)
            lam = evals[0]
            u = Q[:, :J] @ evecs[:, 0]
            resid = np.linalg.norm(G.matvec(u) - lam * u)
            norm_est = max(abs(float(evals[0])), abs(float(evals[-1])))
            if exhausted or J == cap or resid <= tol * max(norm_est, 1e-300):
                return u, lam, resid, norm_est, J, exhausted
        betas[j] = b
        Q[:, j + 1] = w / b
        j += 1
