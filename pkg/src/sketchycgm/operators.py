"""Measurement operators behind a three-primitive black-box interface.

A measurement operator takes m-by-n matrices to d scalars. Solvers never
touch a dense matrix: every interaction goes through the image of a rank-one
matrix and the two one-sided actions of the adjoint,

    apply_rank_one(u, v)       the d measurements of the matrix u v*
    left_apply_adjoint(z, u)   the n-vector  u* (adjoint of z)
    right_apply_adjoint(z, v)  the m-vector  (adjoint of z) v

so that, writing ip(a, b) for the inner product conjugating the first slot,

    ip(apply_rank_one(u, v), z) == left_apply_adjoint(z, u) @ v
                                == ip(u, right_apply_adjoint(z, v)).

Three families are provided: entry sampling (matrix completion over the
reals), coded diffraction (random modulations followed by unitary DFTs),
and synthetic bandpass windows (one low-pass Fourier view per illumination).
The Fourier families measure quadratic forms diag(A X A*) for a tall sensing
matrix A applied by FFT; A is never built densely. Operators are immutable
after construction and store Theta(d) parameters.

DFTs are unitary throughout. Entry indices in text files are 1-based; in
memory everything is 0-based.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatch,
    ImaginaryLeakage,
    IndexOutOfRange,
    NonFiniteInput,
    ParseError,
)
from .memory import ledger, nscalars

__all__ = [
    "MeasurementOperator",
    "EntrySamplingOperator",
    "RowMeasurementOperator",
    "CodedDiffractionOperator",
    "PtychographyBandpassOperator",
    "build_coded_diffraction",
    "build_ptychography_bandpass",
    "build_entry_sampling",
    "entry_sampling_from_file",
    "read_triples",
    "write_triples",
]


def _check_vector(x, size: int, name: str, finite: bool = True) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (size,):
        raise DimensionMismatch(f"{name} has shape {x.shape}, expected ({size},)")
    if finite and not np.all(np.isfinite(x)):
        raise NonFiniteInput(f"{name} contains non-finite entries")
    return x


def _bincount(idx: np.ndarray, weights: np.ndarray, size: int) -> np.ndarray:
    # np.bincount only takes real weights
    if np.iscomplexobj(weights):
        return np.bincount(idx, weights.real, size) + 1j * np.bincount(
            idx, weights.imag, size
        )
    return np.bincount(idx, weights, size)


class MeasurementOperator:
    """Linear map from m-by-n matrices to d measurements.

    Subclasses implement the three primitives. ``psd_measure`` is derived:
    it measures a Hermitian psd matrix given by its eigenpairs, asserts that
    the result is real up to roundoff, and returns the real part.
    """

    def __init__(self, m: int, n: int, d: int, field: np.dtype, kind: str):
        if min(m, n, d) < 1:
            raise ValueError("operator dimensions must be positive")
        self.m = int(m)
        self.n = int(n)
        self.d = int(d)
        self.field = np.dtype(field)
        self.kind = kind

    def apply_rank_one(self, u, v) -> np.ndarray:
        """Measurements of the rank-one matrix with entries u_i * conj(v_j)."""
        raise NotImplementedError

    def left_apply_adjoint(self, z, u) -> np.ndarray:
        """Row vector u*(adjoint of z), returned as an n-vector."""
        raise NotImplementedError

    def right_apply_adjoint(self, z, v) -> np.ndarray:
        """Column vector (adjoint of z) v, an m-vector."""
        raise NotImplementedError

    def psd_measure(self, eigvecs, eigvals, rtol: float = 1e-8) -> np.ndarray:
        """Measure the psd matrix sum_j lam_j * w_j w_j* given by its factors.

        ``eigvecs`` holds the columns w_j, ``eigvals`` the nonnegative
        weights lam_j. Requires a square matrix domain. Raises
        ``ImaginaryLeakage`` if the imaginary residue of the result exceeds
        ``rtol`` times its norm.
        """
        if self.m != self.n:
            raise DimensionMismatch("psd measurement needs a square matrix domain")
        W = np.asarray(eigvecs)
        if W.ndim == 1:
            W = W.reshape(-1, 1)
        lam = np.asarray(eigvals, dtype=float).ravel()
        if W.shape != (self.n, lam.size):
            raise DimensionMismatch(
                f"eigvecs has shape {W.shape}, expected ({self.n}, {lam.size})"
            )
        if np.any(lam < 0):
            raise ValueError("psd weights must be nonnegative")
        out = np.zeros(self.d, dtype=np.result_type(self.field, W.dtype))
        for j in range(lam.size):
            if lam[j] == 0.0:
                continue
            out = out + lam[j] * self.apply_rank_one(W[:, j], W[:, j])
        if np.iscomplexobj(out):
            scale = np.linalg.norm(out)
            residue = np.linalg.norm(out.imag)
            if scale > 0 and residue > rtol * scale:
                raise ImaginaryLeakage(
                    f"imaginary residue {residue:.3e} exceeds {rtol:.1e} * {scale:.3e}"
                )
            out = out.real.copy()
        return out

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(m={self.m}, n={self.n}, d={self.d}, "
            f"field={self.field.name})"
        )


class EntrySamplingOperator(MeasurementOperator):
    """Picks individual matrix entries at a fixed, duplicate-free index set."""

    def __init__(self, m: int, n: int, rows, cols):
        rows = np.asarray(rows, dtype=np.intp).ravel()
        cols = np.asarray(cols, dtype=np.intp).ravel()
        if rows.size != cols.size:
            raise DimensionMismatch("rows and cols must have the same length")
        if rows.size == 0:
            raise ValueError("the sampled index set is empty")
        if rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n:
            raise IndexOutOfRange("entry index outside the m-by-n grid")
        flat = rows * np.intp(n) + cols
        if np.unique(flat).size != flat.size:
            raise ValueError("duplicate (row, col) pairs are not allowed")
        super().__init__(m, n, rows.size, np.float64, "entry_sampling")
        self.rows = rows
        self.cols = cols
        ledger.add("operators", nscalars(rows, cols))

    def apply_rank_one(self, u, v) -> np.ndarray:
        u = _check_vector(u, self.m, "u")
        v = _check_vector(v, self.n, "v")
        return u[self.rows] * np.conj(v[self.cols])

    def left_apply_adjoint(self, z, u) -> np.ndarray:
        z = _check_vector(z, self.d, "z", finite=False)
        u = _check_vector(u, self.m, "u", finite=False)
        return _bincount(self.cols, z * np.conj(u[self.rows]), self.n)

    def right_apply_adjoint(self, z, v) -> np.ndarray:
        z = _check_vector(z, self.d, "z", finite=False)
        v = _check_vector(v, self.n, "v", finite=False)
        return _bincount(self.rows, z * v[self.cols], self.m)


class RowMeasurementOperator(MeasurementOperator):
    """Quadratic family: measurements are diag(A X A*) for a tall sensing
    matrix A reachable only through products A x and A* y.

    The matrix domain is square (n by n). Rows of A are the measurement
    vectors, so a rank-one input u v* measures to (A u) .* conj(A v).
    """

    def _sense(self, x: np.ndarray) -> np.ndarray:
        """A x, a d-vector."""
        raise NotImplementedError

    def _sense_adjoint(self, y: np.ndarray) -> np.ndarray:
        """A* y, an n-vector."""
        raise NotImplementedError

    def apply_rank_one(self, u, v) -> np.ndarray:
        u = _check_vector(u, self.m, "u")
        v = _check_vector(v, self.n, "v")
        return self._sense(u) * np.conj(self._sense(v))

    def left_apply_adjoint(self, z, u) -> np.ndarray:
        z = _check_vector(z, self.d, "z", finite=False)
        u = _check_vector(u, self.m, "u", finite=False)
        # u*(A* diag(z) A) row vector equals A^T (z .* conj(A u)); the
        # transpose action is the conjugated adjoint of conjugated input.
        return np.conj(self._sense_adjoint(np.conj(z) * self._sense(u)))

    def right_apply_adjoint(self, z, v) -> np.ndarray:
        z = _check_vector(z, self.d, "z", finite=False)
        v = _check_vector(v, self.n, "v", finite=False)
        return self._sense_adjoint(z * self._sense(v))


class CodedDiffractionOperator(RowMeasurementOperator):
    """``views`` modulated unitary-DFT snapshots of length-n signals; d = views * n.

    Each modulation entry is the product of a phase uniform on the fourth
    roots of unity and a magnitude equal to sqrt(2)/2 with probability 0.8
    or sqrt(3) with probability 0.2.
    """

    def __init__(self, n: int, views: int, seed=0):
        if n < 1 or views < 1:
            raise ValueError("n and views must be positive")
        rng = np.random.default_rng(seed)
        phases = rng.choice(np.array([1.0, 1.0j, -1.0, -1.0j]), size=(views, n))
        mags = np.where(rng.random((views, n)) < 0.8, np.sqrt(2.0) / 2.0, np.sqrt(3.0))
        super().__init__(n, n, views * n, np.complex128, "coded_diffraction")
        self.views = views
        self.modulations = phases * mags
        self.modulations.setflags(write=False)
        ledger.add("operators", nscalars(self.modulations))

    def _sense(self, x: np.ndarray) -> np.ndarray:
        return np.fft.fft(self.modulations * x[None, :], axis=1, norm="ortho").ravel()

    def _sense_adjoint(self, y: np.ndarray) -> np.ndarray:
        blocks = np.fft.ifft(y.reshape(self.views, self.n), axis=1, norm="ortho")
        return (np.conj(self.modulations) * blocks).sum(axis=0)


class PtychographyBandpassOperator(RowMeasurementOperator):
    """Bandpass Fourier views: each of ``views`` illuminations selects a
    window of ``q`` Fourier coefficients and returns their small inverse
    DFT; d = views * q.

    Windows default to contiguous circularly-shifted index ranges whose
    offsets stride the spectrum so the views jointly cover all n
    coefficients. Custom windows may be supplied as an integer array of
    shape (views, q) with per-view distinct indices in [0, n).
    """

    def __init__(self, n: int, q: int, views: int, masks=None):
        if n < 1 or views < 1:
            raise ValueError("n and views must be positive")
        if not 1 <= q <= n:
            raise ValueError("window width q must satisfy 1 <= q <= n")
        if masks is None:
            if q * views < n:
                raise ValueError(
                    "windows cannot cover the spectrum: need q * views >= n"
                )
            offsets = (np.arange(views) * n) // views
            masks = (offsets[:, None] + np.arange(q)[None, :]) % n
        else:
            masks = np.asarray(masks, dtype=np.intp)
            if masks.shape != (views, q):
                raise DimensionMismatch(
                    f"masks has shape {masks.shape}, expected ({views}, {q})"
                )
            if masks.min() < 0 or masks.max() >= n:
                raise IndexOutOfRange("mask entry outside the Fourier grid")
            for i in range(views):
                if np.unique(masks[i]).size != q:
                    raise ValueError(
                        "each view must select distinct Fourier coefficients"
                    )
        super().__init__(n, n, views * q, np.complex128, "ptychography_bandpass")
        self.views = views
        self.q = int(q)
        self.masks = masks
        self.masks.setflags(write=False)
        ledger.add("operators", nscalars(masks))

    def _sense(self, x: np.ndarray) -> np.ndarray:
        xhat = np.fft.fft(x, norm="ortho")
        return np.fft.ifft(xhat[self.masks], axis=1, norm="ortho").ravel()

    def _sense_adjoint(self, y: np.ndarray) -> np.ndarray:
        blocks = np.fft.fft(y.reshape(self.views, self.q), axis=1, norm="ortho")
        acc = np.zeros(self.n, dtype=np.complex128)
        np.add.at(acc, self.masks.ravel(), blocks.ravel())
        return np.fft.ifft(acc, norm="ortho")


def build_coded_diffraction(n: int, views: int, seed=0) -> CodedDiffractionOperator:
    return CodedDiffractionOperator(n, views, seed)


def build_ptychography_bandpass(
    n: int, q: int, views: int, masks=None
) -> PtychographyBandpassOperator:
    return PtychographyBandpassOperator(n, q, views, masks)


def build_entry_sampling(m: int, n: int, rows, cols) -> EntrySamplingOperator:
    return EntrySamplingOperator(m, n, rows, cols)


def read_triples(path):
    """Parse whitespace-separated ``i j value`` lines with 1-based indices.

    Blank lines and ``#`` comments are skipped. Returns 0-based index
    arrays and the float values. Raises ``ParseError`` with the offending
    line number, or ``IndexOutOfRange`` for indices below 1.
    """
    rows, cols, vals = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(lineno, f"expected 'i j value', got {line!r}")
            try:
                i, j, val = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from exc
            if i < 1 or j < 1:
                raise IndexOutOfRange(f"line {lineno}: indices are 1-based, got ({i}, {j})")
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(val)
    if not rows:
        raise ParseError(0, "file contains no data rows")
    return (
        np.asarray(rows, dtype=np.intp),
        np.asarray(cols, dtype=np.intp),
        np.asarray(vals, dtype=float),
    )


def write_triples(path, rows, cols, values) -> None:
    """Write ``i j value`` lines, converting 0-based indices to 1-based."""
    rows = np.asarray(rows, dtype=np.intp).ravel()
    cols = np.asarray(cols, dtype=np.intp).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if not rows.size == cols.size == values.size:
        raise DimensionMismatch("rows, cols and values must have the same length")
    with open(path, "w", encoding="utf-8") as fh:
        for i, j, val in zip(rows, cols, values):
            fh.write(f"{i + 1} {j + 1} {val:.17g}\n")


def entry_sampling_from_file(path, m: int | None = None, n: int | None = None):
    """Load an entry-sampling operator from a triples file.

    Values are returned alongside the operator; they are consumed by losses
    and evaluation, not by the operator itself. Dimensions default to the
    largest index seen.
    """
    rows, cols, values = read_triples(path)
    m = int(rows.max()) + 1 if m is None else int(m)
    n = int(cols.max()) + 1 if n is None else int(n)
    if rows.max() >= m or cols.max() >= n:
        raise IndexOutOfRange("triple index outside the declared dimensions")
    return EntrySamplingOperator(m, n, rows, cols), values
