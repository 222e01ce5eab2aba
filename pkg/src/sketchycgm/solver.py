"""Conditional gradient driver working in the measurement domain.

The primal matrix variable is never formed. State is the d-vector z that
tracks the measurements of the implicit iterate, plus a two-sided
randomized sketch updated with the same rank-one directions, from which a
rank-r factorization is recovered on demand. Each iteration costs one
extreme singular pair (schatten1 template) or one extreme eigenpair (psd
template) of the implicit gradient matrix, plus O((m+n)r) sketch work.

Stopping uses the duality gap of the linear minimization step, evaluated
before the update, so a converged iterate is returned untouched. The
poisson variant changes only the starting point (a strictly positive
vector, keeping the log-domain safe) and the step-size schedule.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoConvergence, ZeroGradient
from .losses import Loss
from .memory import ledger
from .operators import MeasurementOperator
from .sketch import FactoredMatrix, Sketch
from .spectral import ImplicitGradientMatrix, SpectralConfig, max_sing_vec, min_eig

__all__ = [
    "ProblemSpec",
    "SolverState",
    "IterationRecord",
    "Direction",
    "learning_rate",
    "init_state",
    "update_direction",
    "duality_gap",
    "step",
    "solve",
    "select_alpha_phase",
]

TEMPLATES = ("schatten1", "psd")
VARIANTS = ("standard", "poisson")


@dataclass
class ProblemSpec:
    """One convex problem instance: minimize loss(measure(X)) over a norm ball.

    template "schatten1" constrains the Schatten-1 norm of X by alpha;
    "psd" constrains to the positive semidefinite cone with trace at most
    alpha (requires a square domain). rank sets the reconstruction rank of
    the sketch. The poisson variant pairs with the poisson loss only.
    """

    op: MeasurementOperator
    loss: Loss
    alpha: float
    rank: int
    template: str = "schatten1"
    variant: str = "standard"
    eps: float = 1e-6
    max_iters: int = 1000
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    sketch_seed: int = 0

    def __post_init__(self):
        if self.template not in TEMPLATES:
            raise ValueError(f"unknown template {self.template!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be positive and finite")
        if not (np.isfinite(self.eps) and self.eps > 0):
            raise ValueError("eps must be positive and finite")
        if self.rank < 1:
            raise ValueError("rank must be at least 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.loss.d != self.op.d:
            raise DimensionMismatch(
                f"loss holds {self.loss.d} measurements, operator yields {self.op.d}"
            )
        if self.template == "psd" and self.op.m != self.op.n:
            raise ValueError("psd template needs a square matrix domain")
        if self.variant == "poisson" and self.loss.kind != "poisson":
            raise ValueError("poisson variant requires the poisson loss")


@dataclass
class SolverState:
    z: np.ndarray
    sketch: Sketch
    t: int = 0
    last_gap: float = np.inf
    eta: float = 0.0


@dataclass
class IterationRecord:
    t: int
    eta: float
    gap: float
    objective: float
    wall_ms: float = 0.0
    metrics: dict | None = None


@dataclass(frozen=True)
class Direction:
    """Rank-one update left @ right^H (scaling folded into left) and its measurements h."""

    left: np.ndarray
    right: np.ndarray
    h: np.ndarray


def learning_rate(t: int, variant: str = "standard") -> float:
    """Step size at iteration t: 2/(t+2), or 2/(t+3) for the poisson variant."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if variant == "poisson":
        return 2.0 / (t + 3.0)
    if variant == "standard":
        return 2.0 / (t + 2.0)
    raise ValueError(f"unknown variant {variant!r}")


def init_state(spec: ProblemSpec) -> SolverState:
    d = spec.op.d
    if spec.variant == "poisson":
        # start strictly positive so the log-domain loss is defined at t=0
        z0 = np.full(d, 1.0 / np.sqrt(d))
    else:
        z0 = np.zeros(d)
    sk = Sketch(spec.op.m, spec.op.n, spec.rank, field=spec.op.field, seed=spec.sketch_seed)
    return SolverState(z=z0, sketch=sk)


def _zero_direction(spec: ProblemSpec) -> Direction:
    op = spec.op
    return Direction(
        left=np.zeros(op.m, dtype=op.field),
        right=np.zeros(op.n, dtype=op.field),
        h=np.zeros(op.d),
    )


def update_direction(state: SolverState, spec: ProblemSpec, grad=None) -> Direction:
    """Linear minimization over the constraint set at the current iterate.

    schatten1: the vertex is -alpha times the top singular dyad of the
    implicit gradient matrix. psd: alpha times the bottom eigvector dyad
    when the bottom eigenvalue is nonpositive, else the zero matrix. A zero
    gradient yields the zero direction (the iterate is already optimal).
    """
    if grad is None:
        grad = spec.loss.gradient(state.z)
    op = spec.op
    G = ImplicitGradientMatrix(op, grad)
    seed = (spec.spectral.seed, state.t)
    try:
        if spec.template == "psd":
            lam, u = min_eig(G, spec.spectral, start_seed=seed)
            if lam > 0:
                return _zero_direction(spec)
            h = op.psd_measure(u[:, None], np.array([spec.alpha]))
            return Direction(left=spec.alpha * u, right=u, h=h)
        u, v, _sigma = max_sing_vec(G, spec.spectral, start_seed=seed)
        h = -spec.alpha * op.apply_rank_one(u, v)
        return Direction(left=-spec.alpha * u, right=v, h=h)
    except ZeroGradient:
        return _zero_direction(spec)


def duality_gap(z, h, grad) -> float:
    """Suboptimality certificate <z - h, grad>, real part over complex fields."""
    return float(np.real(np.vdot(z - h, grad)))


def step(state: SolverState, spec: ProblemSpec, started_at: float | None = None) -> IterationRecord:
    """One compute-and-update pass; the record reflects the iterate before the update."""
    t0 = time.perf_counter() if started_at is None else started_at
    grad = spec.loss.gradient(state.z)
    direction = update_direction(state, spec, grad=grad)
    gap = duality_gap(state.z, direction.h, grad)
    objective = float(spec.loss.value(state.z))
    eta = learning_rate(state.t, spec.variant)
    record = IterationRecord(t=state.t, eta=eta, gap=gap, objective=objective)
    _apply_update(state, spec, direction)
    record.wall_ms = (time.perf_counter() - t0) * 1e3
    return record


def _apply_update(state: SolverState, spec: ProblemSpec, direction: Direction) -> None:
    eta = learning_rate(state.t, spec.variant)
    state.z = (1.0 - eta) * state.z + eta * direction.h
    state.sketch.cgm_update(direction.left, direction.right, eta)
    state.eta = eta
    state.t += 1


def solve(
    spec: ProblemSpec,
    trace_every: int = 1,
    eval_fn=None,
    callback=None,
    strict: bool = False,
):
    """Run until the duality gap falls to eps or max_iters updates elapse.

    Returns (factors, trace): the rank-r reconstruction from the sketch and
    the list of IterationRecord. Records are kept every trace_every
    iterations plus always at the terminal iterate; when eval_fn is given
    it receives the current reconstruction at each recorded iterate and its
    dict lands in record.metrics. callback(record, state) fires after each
    record. Hitting max_iters is non-fatal by default: partial results are
    first-class. With strict=True it raises NoConvergence whose .result
    holds the same (factors, trace) pair.
    """
    if trace_every < 1:
        raise ValueError("trace_every must be at least 1")
    state = init_state(spec)
    started = time.perf_counter()
    trace: list[IterationRecord] = []
    converged = False
    psd = spec.template == "psd"
    with ledger.track("solver", 3 * spec.op.d):
        while True:
            grad = spec.loss.gradient(state.z)
            direction = update_direction(state, spec, grad=grad)
            gap = duality_gap(state.z, direction.h, grad)
            state.last_gap = gap
            hit_eps = gap <= spec.eps
            terminal = hit_eps or state.t >= spec.max_iters
            if terminal or state.t % trace_every == 0:
                record = IterationRecord(
                    t=state.t,
                    eta=learning_rate(state.t, spec.variant),
                    gap=gap,
                    objective=float(spec.loss.value(state.z)),
                    wall_ms=(time.perf_counter() - started) * 1e3,
                )
                if eval_fn is not None:
                    record.metrics = eval_fn(state.sketch.reconstruct(psd=psd))
                trace.append(record)
                if callback is not None:
                    callback(record, state)
            if hit_eps:
                converged = True
                break
            if state.t >= spec.max_iters:
                break
            _apply_update(state, spec, direction)
    factors = state.sketch.reconstruct(psd=psd)
    if not converged and strict:
        raise NoConvergence(
            f"gap {state.last_gap:.3e} above eps {spec.eps:.3e} after {state.t} iterations",
            result=(factors, trace),
        )
    return factors, trace


def select_alpha_phase(b) -> float:
    """Constraint radius heuristic for phase problems: the measurement mean."""
    b = np.asarray(b, dtype=float)
    if b.size == 0:
        raise ValueError("b must be nonempty")
    return float(np.mean(b))
