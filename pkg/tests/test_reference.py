"""Dense reference path and evaluation metrics."""

import numpy as np
import pytest

from sketchycgm import (
    DimensionMismatch,
    EvalSpec,
    FactoredMatrix,
    TooLargeForDense,
    ZeroTruth,
    cgm_dense_solve,
    dense_adjoint,
    eps_rank,
    measure_dense,
    phase_aligned_error,
    psnr,
    record_spectra,
    save_spectra_csv,
    solve,
)
from sketchycgm import test_error as heldout_error
from sketchycgm import CodedDiffractionOperator, EntrySamplingOperator, Loss, ProblemSpec
from helpers import adjoint_via_dense, measure_via_dense, random_mask, spiked_completion_problem


def test_measure_dense_matches_sensing_matrix():
    rng = np.random.default_rng(0)
    rows, cols = random_mask(rng, 9, 7, 0.5)
    op = EntrySamplingOperator(9, 7, rows, cols)
    X = rng.standard_normal((9, 7))
    np.testing.assert_allclose(measure_dense(op, X), measure_via_dense(op, X), atol=1e-12)


def test_measure_dense_complex_family():
    rng = np.random.default_rng(1)
    op = CodedDiffractionOperator(6, 2, seed=3)
    X = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    np.testing.assert_allclose(measure_dense(op, X), measure_via_dense(op, X), atol=1e-12)


def test_dense_adjoint_matches_sensing_matrix():
    rng = np.random.default_rng(2)
    op = CodedDiffractionOperator(5, 3, seed=4)
    z = rng.standard_normal(op.d) + 1j * rng.standard_normal(op.d)
    np.testing.assert_allclose(dense_adjoint(op, z), adjoint_via_dense(op, z), atol=1e-12)


def test_dense_solve_agrees_with_sketchy_on_pinned_instance():
    # vertex-dominated data keeps both trajectories on the same extreme
    # point, so the independent runs must agree to roundoff accumulation
    prob = spiked_completion_problem(5, m=16, n=12, max_iters=50)
    _, trace = solve(prob, trace_every=1)
    prob2 = spiked_completion_problem(5, m=16, n=12, max_iters=50)
    X, dtrace = cgm_dense_solve(prob2, max_iters=50)
    zs = np.array([r.gap for r in trace])
    zd = np.array([r.gap for r in dtrace])
    np.testing.assert_allclose(zs, zd, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(
        prob2.op.apply_rank_one(np.ones(16), np.ones(12)) * 0.0,
        measure_dense(prob2.op, X) - measure_dense(prob2.op, X),
    )


def test_dense_solve_guard():
    op = EntrySamplingOperator(2000, 600, [0], [0])
    loss = Loss("gauss", [1.0])
    prob = ProblemSpec(op=op, loss=loss, alpha=1.0, rank=1, max_iters=1)
    with pytest.raises(TooLargeForDense):
        cgm_dense_solve(prob)


def test_dense_solve_poisson_variant_descends():
    rng = np.random.default_rng(6)
    op = CodedDiffractionOperator(6, 3, seed=2)
    x = (rng.standard_normal(6) + 1j * rng.standard_normal(6)) / np.sqrt(2)
    counts = rng.poisson(40.0 * op.psd_measure(x.reshape(-1, 1), [1.0])).astype(float)
    prob = ProblemSpec(
        op=op,
        loss=Loss("poisson", counts),
        alpha=float(np.mean(counts / 40.0) * op.n),
        rank=1,
        template="psd",
        variant="poisson",
        eps=1e-300,
        max_iters=25,
    )
    _, trace = cgm_dense_solve(prob, trace_every=1)
    assert trace[-1].objective < trace[0].objective


def test_dense_callback_sees_live_iterates():
    prob = spiked_completion_problem(7, m=10, n=8, max_iters=10, eps=1e-300)
    seen = []
    cgm_dense_solve(prob, trace_every=1, callback=lambda it: seen.append((it.t, it.X.copy())))
    assert [t for t, _ in seen] == list(range(11))
    assert np.linalg.norm(seen[0][1]) == 0.0
    assert np.linalg.norm(seen[-1][1]) > 0.0


def test_record_spectra_and_csv(tmp_path):
    prob = spiked_completion_problem(8, m=10, n=8, max_iters=6, eps=1e-300)
    X, trace, rows = record_spectra(prob, every=2)
    assert [t for t, _ in rows] == [0, 2, 4, 6]
    assert all(s.size == 8 for _, s in rows)
    path = tmp_path / "spectra.csv"
    save_spectra_csv(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration," + ",".join(f"sigma{j+1}" for j in range(8))
    assert len(lines) == 5


class TestEpsRank:
    def test_examples(self):
        assert eps_rank([10.0, 5.0, 0.01], 0.01) == 2
        assert eps_rank([10.0, 5.0, 0.2], 0.01) == 3
        assert eps_rank([3.0], 0.5) == 1
        assert eps_rank([], 0.5) == 0

    def test_eps_domain(self):
        with pytest.raises(ValueError):
            eps_rank([1.0], 0.0)
        with pytest.raises(ValueError):
            eps_rank([1.0], 1.0)

    def test_order_enforced(self):
        with pytest.raises(ValueError):
            eps_rank([1.0, 2.0], 0.1)


class TestPhaseAlignedError:
    def test_matches_grid_search_oracle(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        xhat = x * np.exp(0.77j) + 0.1 * (
            rng.standard_normal(12) + 1j * rng.standard_normal(12)
        )
        thetas = np.linspace(0, 2 * np.pi, 20001)
        grid = min(
            np.linalg.norm(xhat * np.exp(1j * th) - x) for th in thetas
        ) / np.linalg.norm(x)
        assert phase_aligned_error(xhat, x) == pytest.approx(grid, abs=1e-6)

    def test_exact_alignment_is_zero(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        # roundoff in the inner product surfaces under a square root
        assert phase_aligned_error(x * np.exp(1.3j), x) <= 1e-6

    def test_zero_truth_rejected(self):
        with pytest.raises(ZeroTruth):
            phase_aligned_error(np.ones(3), np.zeros(3))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            phase_aligned_error(np.ones(3), np.ones(4))


class TestPsnr:
    def test_identical_inputs_infinite(self):
        x = np.arange(4.0)
        assert psnr(x, x, peak=1.0) == float("inf")

    def test_known_value(self):
        x = np.zeros(4)
        xhat = np.full(4, 0.5)  # rmse = 0.5
        assert psnr(xhat, x, peak=1.0) == pytest.approx(20.0 * np.log10(2.0))

    def test_peak_domain(self):
        with pytest.raises(ValueError):
            psnr(np.ones(2), np.zeros(2), peak=0.0)


class TestTestError:
    def test_matches_dense_evaluation(self):
        rng = np.random.default_rng(11)
        U = np.linalg.qr(rng.standard_normal((8, 2)))[0]
        V = np.linalg.qr(rng.standard_normal((6, 2)))[0]
        f = FactoredMatrix(U, [2.0, 1.0], V)
        rows = np.array([0, 3, 7])
        cols = np.array([5, 2, 0])
        vals = rng.standard_normal(3)
        spec = EvalSpec(rows=rows, cols=cols, values=vals)
        pred = f.dense()[rows, cols]
        want = 0.5 * np.mean((pred - vals) ** 2)
        assert heldout_error(f, spec) == pytest.approx(want, rel=1e-12)

    def test_index_range_checked(self):
        f = FactoredMatrix(np.eye(4, 1), [1.0], np.eye(4, 1))
        spec = EvalSpec(rows=[5], cols=[0], values=[1.0])
        with pytest.raises(DimensionMismatch):
            heldout_error(f, spec)

    def test_train_test_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            EvalSpec(
                rows=[0, 1],
                cols=[0, 1],
                values=[1.0, 2.0],
                train_rows=[1, 2],
                train_cols=[1, 2],
            )
