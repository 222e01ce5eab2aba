"""Dense reference solver and evaluation metrics.

The reference solver runs the same conditional gradient iteration as the
sketched solver but carries the full matrix iterate, so tests can compare
the implicit state against ground truth. It is deliberately guarded to
small problems: its role is oracle, not production path. With
spectral_mode="lanczos" it consumes the exact same seeded extreme-pair
routine as the sketched solver, so both produce identical direction
sequences; spectral_mode="dense" swaps in full factorizations for runs
that must reach very small gaps without iterative-solver stalls.

Metrics: effective rank of a spectrum, phase-aligned relative error for
phase retrieval, PSNR, and held-out entrywise test error evaluated from
factors without densifying.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, TooLargeForDense, ZeroGradient, ZeroTruth
from .losses import LOSS_KINDS, Loss
from .memory import ledger
from .sketch import FactoredMatrix
from .solver import IterationRecord, ProblemSpec, duality_gap, learning_rate
from .spectral import ImplicitGradientMatrix, _canonical_phase, max_sing_vec, min_eig

__all__ = [
    "DENSE_GUARD",
    "DenseIterate",
    "EvalSpec",
    "measure_dense",
    "dense_adjoint",
    "cgm_dense_solve",
    "record_spectra",
    "save_spectra_csv",
    "eps_rank",
    "phase_aligned_error",
    "psnr",
    "test_error",
]

DENSE_GUARD = 1_000_000  # max m*n the dense oracle will touch


@dataclass
class DenseIterate:
    """Snapshot handed to solve callbacks; X is a live view, copy before storing."""

    X: np.ndarray
    t: int
    gap: float


@dataclass
class EvalSpec:
    """Held-out entries (rows, cols, values) plus metric knobs.

    loss_kind picks the entrywise penalty for test_error; eps feeds
    effective-rank counting. When the training index set is supplied the
    constructor enforces that the two sets are disjoint.
    """

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    loss_kind: str = "gauss"
    eps: float = 1e-2
    truth: np.ndarray | None = None
    train_rows: np.ndarray | None = None
    train_cols: np.ndarray | None = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.intp)
        self.cols = np.asarray(self.cols, dtype=np.intp)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.rows.size == 0:
            raise ValueError("test set is empty")
        if not (self.rows.shape == self.cols.shape == self.values.shape):
            raise DimensionMismatch("rows, cols, values must have equal length")
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.loss_kind!r}")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if (self.train_rows is None) != (self.train_cols is None):
            raise ValueError("supply both train index arrays or neither")
        if self.train_rows is not None:
            train = set(zip(np.asarray(self.train_rows).tolist(),
                            np.asarray(self.train_cols).tolist()))
            test = set(zip(self.rows.tolist(), self.cols.tolist()))
            if train & test:
                raise ValueError("test entries overlap the training set")


def measure_dense(op, X: np.ndarray) -> np.ndarray:
    """Apply the operator to a dense matrix using only its rank-one primitive."""
    X = np.asarray(X)
    if X.shape != (op.m, op.n):
        raise DimensionMismatch(f"X has shape {X.shape}, expected {(op.m, op.n)}")
    U, s, Vh = np.linalg.svd(X, full_matrices=False)
    z = np.zeros(op.d, dtype=np.result_type(op.field, np.float64))
    for j in range(s.size):
        if s[j] == 0.0:
            break
        z = z + s[j] * op.apply_rank_one(U[:, j], Vh[j].conj())
    return z


def dense_adjoint(op, z: np.ndarray) -> np.ndarray:
    """Materialize the adjoint image of z, one basis column at a time."""
    if op.m * op.n > DENSE_GUARD:
        raise TooLargeForDense(f"{op.m}x{op.n} exceeds the dense guard")
    G = np.zeros((op.m, op.n), dtype=np.result_type(op.field, np.float64))
    e = np.zeros(op.n, dtype=op.field)
    for j in range(op.n):
        e[j] = 1.0
        G[:, j] = op.right_apply_adjoint(z, e)
        e[j] = 0.0
    return G


def _dense_real(z: np.ndarray) -> np.ndarray:
    # measurement families here are real valued; imaginary residue is roundoff
    return z.real if np.iscomplexobj(z) else z


def _direction_dense_mode(spec: ProblemSpec, grad: np.ndarray):
    """Extreme pair via full factorization, canonicalized like the iterative path."""
    G = dense_adjoint(spec.op, grad)
    if spec.template == "psd":
        w, P = np.linalg.eigh(0.5 * (G + G.conj().T))
        u = P[:, 0]
        return float(w[0]), u * _canonical_phase(u), None
    U, s, Vh = np.linalg.svd(G)
    u, v = U[:, 0], Vh[0].conj()
    ph = _canonical_phase(u)
    return float(s[0]), u * ph, v * ph


def cgm_dense_solve(
    spec: ProblemSpec,
    max_iters: int | None = None,
    spectral_mode: str = "lanczos",
    trace_every: int = 1,
    callback=None,
):
    """Dense conditional gradient run; returns (X, trace).

    Stops when the duality gap reaches spec.eps or after max_iters updates
    (default spec.max_iters). callback(DenseIterate) fires at every recorded
    iterate, before the update is applied.
    """
    op, loss = spec.op, spec.loss
    if op.m * op.n > DENSE_GUARD:
        raise TooLargeForDense(f"{op.m}x{op.n} exceeds the dense guard {DENSE_GUARD}")
    if spectral_mode not in ("lanczos", "dense"):
        raise ValueError(f"unknown spectral_mode {spectral_mode!r}")
    if trace_every < 1:
        raise ValueError("trace_every must be at least 1")
    limit = spec.max_iters if max_iters is None else max_iters
    m, n, d = op.m, op.n, op.d
    width = 2 if np.issubdtype(np.dtype(op.field), np.complexfloating) else 1
    k = min(m, n)
    X = np.zeros((m, n), dtype=op.field)
    poisson = spec.variant == "poisson"
    z = np.full(d, 1.0 / np.sqrt(d)) if poisson else np.zeros(d)
    trace: list[IterationRecord] = []
    started = time.perf_counter()
    t = 0
    with ledger.track("dense_cgm", width * (2 * m * n + k * (m + n + 1))):
        while True:
            grad = loss.gradient(z)
            lam_or_sigma, u, v, h = _dense_direction(spec, grad, t, spectral_mode)
            gap = duality_gap(z, h, grad)
            hit_eps = gap <= spec.eps
            terminal = hit_eps or t >= limit
            if terminal or t % trace_every == 0:
                trace.append(
                    IterationRecord(
                        t=t,
                        eta=learning_rate(t, spec.variant),
                        gap=gap,
                        objective=float(loss.value(z)),
                        wall_ms=(time.perf_counter() - started) * 1e3,
                    )
                )
                if callback is not None:
                    callback(DenseIterate(X=X, t=t, gap=gap))
            if hit_eps or t >= limit:
                break
            eta = learning_rate(t, spec.variant)
            X *= 1.0 - eta
            if u is not None:
                if spec.template == "psd":
                    X += (eta * spec.alpha) * np.outer(u, u.conj())
                else:
                    X += (-eta * spec.alpha) * np.outer(u, v.conj())
            if poisson:
                z = (1.0 - eta) * z + eta * h
            else:
                z = _dense_real(measure_dense(op, X))
            t += 1
    return X, trace


def _dense_direction(spec: ProblemSpec, grad: np.ndarray, t: int, mode: str):
    """Vertex of the constraint set; returns (extreme value, u, v, h).

    u is None for the zero direction (psd template with positive bottom
    eigenvalue, or a zero gradient).
    """
    op = spec.op
    zero_h = np.zeros(op.d)
    try:
        if spec.template == "psd":
            if mode == "lanczos":
                lam, u = min_eig(
                    ImplicitGradientMatrix(op, grad), spec.spectral,
                    start_seed=(spec.spectral.seed, t),
                )
            else:
                lam, u, _ = _direction_dense_mode(spec, grad)
            if lam > 0:
                return lam, None, None, zero_h
            h = op.psd_measure(u[:, None], np.array([spec.alpha]))
            return lam, u, u, h
        if mode == "lanczos":
            u, v, sigma = max_sing_vec(
                ImplicitGradientMatrix(op, grad), spec.spectral,
                start_seed=(spec.spectral.seed, t),
            )
        else:
            sigma, u, v = _direction_dense_mode(spec, grad)
        h = -spec.alpha * _dense_real(op.apply_rank_one(u, v))
        return sigma, u, v, h
    except ZeroGradient:
        return 0.0, None, None, zero_h


def record_spectra(spec: ProblemSpec, max_iters=None, every=1, spectral_mode="lanczos"):
    """Dense run that also collects the iterate's singular spectrum."""
    rows: list[tuple[int, np.ndarray]] = []

    def grab(it: DenseIterate):
        rows.append((it.t, np.linalg.svd(it.X, compute_uv=False)))

    X, trace = cgm_dense_solve(
        spec, max_iters, spectral_mode=spectral_mode, trace_every=every, callback=grab
    )
    return X, trace, rows


def save_spectra_csv(path, rows) -> None:
    """Write (iteration, sigma1..sigmak) rows as CSV."""
    k = len(rows[0][1]) if rows else 0
    with open(path, "w", encoding="utf-8") as f:
        f.write("iteration," + ",".join(f"sigma{j + 1}" for j in range(k)) + "\n")
        for t, s in rows:
            f.write(f"{t}," + ",".join(f"{x:.17g}" for x in s) + "\n")


def eps_rank(singular_values, eps: float) -> int:
    """Count of singular values exceeding eps times the largest."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    s = np.asarray(singular_values, dtype=np.float64)
    if s.size == 0:
        return 0
    if np.any(s < 0) or np.any(np.diff(s) > 0):
        raise ValueError("singular values must be nonnegative and sorted descending")
    return int(np.count_nonzero(s > eps * s[0]))


def phase_aligned_error(xhat, x) -> float:
    """Relative error minimized over a global phase rotation of xhat."""
    xhat = np.asarray(xhat)
    x = np.asarray(x)
    if xhat.shape != x.shape:
        raise DimensionMismatch(f"shapes {xhat.shape} and {x.shape} differ")
    nx = np.linalg.norm(x)
    if nx == 0.0:
        raise ZeroTruth("reference signal is zero")
    gap = np.linalg.norm(xhat) ** 2 + nx**2 - 2.0 * abs(np.vdot(xhat, x))
    return float(np.sqrt(max(gap, 0.0)) / nx)


def psnr(xhat, x, peak: float) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give +inf."""
    xhat = np.asarray(xhat)
    x = np.asarray(x)
    if xhat.shape != x.shape:
        raise DimensionMismatch(f"shapes {xhat.shape} and {x.shape} differ")
    if not peak > 0:
        raise ValueError("peak must be positive")
    rmse = np.linalg.norm((xhat - x).ravel()) / np.sqrt(x.size)
    if rmse == 0.0:
        return float("inf")
    return float(20.0 * np.log10(peak / rmse))


def test_error(factors: FactoredMatrix, spec: EvalSpec) -> float:
    """Mean entrywise penalty on held-out entries, straight from factors."""
    m, n = factors.shape
    if spec.rows.size and (spec.rows.max() >= m or spec.cols.max() >= n):
        raise DimensionMismatch("test indices exceed the factor shape")
    pred = factors.entries(spec.rows, spec.cols)
    if np.iscomplexobj(pred):
        pred = pred.real
    probe = Loss(spec.loss_kind, spec.values, normalization=1.0 / spec.values.size)
    return float(probe.value(pred))
