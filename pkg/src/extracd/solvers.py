"""Solver drivers: (proximal) coordinate descent with online Anderson
extrapolation, plus first-order and Krylov baselines.

All solvers start from ``x = 0``, record a trace row per epoch (epoch 0
is the starting point) and stop once the convergence measure (duality
gap when available, stationarity violation otherwise) drops below
``cfg.tol`` or the epoch budget runs out.  Wall-clock accounting uses a
monotonic clock and covers solver work only; objective/gap evaluation
for the trace is not timed.  The extrapolation guard *is* timed since
it is part of the algorithm.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels, problems
from .anderson import ExtrapolationWindow
from .errors import ArgumentError
from .problems import (ElasticNet, GroupLasso, Lasso, LogRegL1, LogRegL2,
                       Quadratic, duality_gap, objective_value,
                       stopping_measure)

__all__ = [
    "SolverConfig",
    "Trace",
    "ResidualState",
    "cd_epoch_quadratic",
    "cdsym_epoch_quadratic",
    "pcd_epoch",
    "anderson_pcd",
    "anderson_gd",
    "baseline_gd",
    "baseline_pgd",
    "baseline_fista",
    "baseline_prcd",
    "conjugate_gradient",
    "global_lipschitz",
    "power_iteration",
    "solve",
    "epochs_to_target",
    "SOLVERS",
]


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by every solver; unused fields are ignored."""

    algorithm: str = "pcd_anderson"
    K: int = 5
    lambda_reg: float = 0.0
    max_epochs: int = 1000
    tol: float = 1e-10
    seed: int = 0
    use_guard: bool = True

    def __post_init__(self):
        if self.K < 1:
            raise ArgumentError("K must be >= 1")
        if self.lambda_reg < 0:
            raise ArgumentError("lambda_reg must be nonnegative")
        if self.max_epochs < 0:
            raise ArgumentError("max_epochs must be nonnegative")
        if self.tol < 0:
            raise ArgumentError("tol must be nonnegative")


@dataclass
class Trace:
    """Per-epoch records plus the final iterate and extrapolation events."""

    solver: str
    epochs: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    events: list = field(default_factory=list)
    x: np.ndarray = None

    def record(self, epoch, seconds, objective, gap):
        self.epochs.append(int(epoch))
        self.seconds.append(float(seconds))
        self.objectives.append(float(objective))
        self.gaps.append(None if gap is None else float(gap))


def epochs_to_target(trace, f_star, tol):
    """First recorded epoch with objective within ``tol`` of ``f_star``."""
    for epoch, obj in zip(trace.epochs, trace.objectives):
        if obj - f_star <= tol:
            return epoch
    return None


class ResidualState:
    """Incrementally maintained predictions ``Ax`` for sparse problems.

    The invariant ``||Ax - A x||_inf <= 1e-8 (1 + ||Ax||_inf)`` is kept
    by recomputing the product every ``REFRESH_EVERY`` epochs.
    """

    REFRESH_EVERY = 100

    def __init__(self, A, x):
        self.A = A
        self.Ax = A.matvec(x)
        self._epochs_since = 0

    def refresh(self, x):
        self.Ax = self.A.matvec(x)
        self._epochs_since = 0

    def after_epoch(self, x):
        self._epochs_since += 1
        if self._epochs_since >= self.REFRESH_EVERY:
            self.refresh(x)

    def drift(self, x):
        return float(np.abs(self.Ax - self.A.matvec(x)).max() or 0.0)


# ---------------------------------------------------------------------------
# epochs
# ---------------------------------------------------------------------------

def cd_epoch_quadratic(quad, x, order=None):
    """One in-place cyclic coordinate-descent epoch on a quadratic."""
    if order is None:
        order = np.arange(quad.dim, dtype=np.int64)
    kernels.cd_dense_epoch(quad.H, quad.b, x, order)
    return x

def cdsym_epoch_quadratic(quad, x):
    """One double-sweep epoch (coordinates 1..p then p..1)."""
    fwd = np.arange(quad.dim, dtype=np.int64)
    kernels.cd_dense_epoch(quad.H, quad.b, x, fwd)
    kernels.cd_dense_epoch(quad.H, quad.b, x, fwd[::-1].copy())
    return x


def _slot_count(prob):
    if isinstance(prob, Quadratic):
        return prob.dim
    if isinstance(prob, GroupLasso):
        return prob.n_groups
    return prob.A.n_cols


def _epoch_runner(prob):
    """Returns ``run(x, Ax, order)`` applying one epoch in place."""
    if isinstance(prob, Quadratic):
        H, b = prob.H, prob.b

        def run(x, Ax, order):
            kernels.cd_dense_epoch(H, b, x, order)
        return run

    A, y, lam = prob.A, prob.y, prob.lam
    lip = problems.coordinate_lipschitz(prob)
    vals, rows, ptr = A.values, A.row_idx, A.col_ptr
    if isinstance(prob, Lasso):
        def run(x, Ax, order):
            kernels.lasso_epoch(vals, rows, ptr, y, x, Ax, lip, lam, order)
    elif isinstance(prob, ElasticNet):
        rho, n = prob.rho, A.n_rows

        def run(x, Ax, order):
            kernels.enet_epoch(vals, rows, ptr, y, x, Ax, lip, lam, rho, n,
                               order)
    elif isinstance(prob, LogRegL1):
        def run(x, Ax, order):
            kernels.logreg_l1_epoch(vals, rows, ptr, y, x, Ax, lip, lam,
                                    order)
    elif isinstance(prob, LogRegL2):
        def run(x, Ax, order):
            kernels.logreg_l2_epoch(vals, rows, ptr, y, x, Ax, lip, lam,
                                    order)
    elif isinstance(prob, GroupLasso):
        grp_cols, grp_ptr = prob.grp_cols, prob.grp_ptr

        def run(x, Ax, order):
            kernels.group_epoch(vals, rows, ptr, y, x, Ax, grp_cols, grp_ptr,
                                lip, lam, order)
    else:
        raise ArgumentError(f"unsupported problem type {type(prob).__name__}")
    return run


def pcd_epoch(prob, x, state=None, order=None):
    """One proximal coordinate-descent epoch in place.

    ``state`` carries the maintained predictions for problems with a
    design matrix; it is ignored for quadratics.
    """
    if order is None:
        order = np.arange(_slot_count(prob), dtype=np.int64)
    run = _epoch_runner(prob)
    if isinstance(prob, Quadratic):
        run(x, None, order)
    else:
        if state is None:
            raise ArgumentError("sparse problems need a ResidualState")
        run(x, state.Ax, order)
    return x


# ---------------------------------------------------------------------------
# shared driver
# ---------------------------------------------------------------------------

def _instrument(prob, x, Ax):
    report = duality_gap(prob, x, Ax)
    if report is not None:
        return report.gap, report.gap
    return None, stopping_measure(prob, x, Ax)


def _extrapolation_step(window, prob, x, Ax, use_guard):
    """Try replacing ``(x, Ax)`` by the window extrapolation.

    Returns ``(x, Ax, status)`` with status in accepted/rejected/singular.
    The guard compares full objectives and vetoes any increase.
    """
    res = window.extrapolate()
    if not res.solved:
        return x, Ax, "singular"
    cand = res.point
    Ax_cand = None if isinstance(prob, Quadratic) else prob.A.matvec(cand)
    if use_guard:
        if objective_value(prob, cand, Ax_cand) > objective_value(prob, x, Ax):
            return x, Ax, "rejected"
    return cand, Ax_cand, "accepted"


def _run_epoch_driver(prob, cfg, solver_name, *, extrapolate, epoch_fn=None,
                      order_fn=None, slots=None):
    p = prob.dim if isinstance(prob, Quadratic) else prob.A.n_cols
    x = np.zeros(p)
    quadratic = isinstance(prob, Quadratic)
    state = None if quadratic else ResidualState(prob.A, x)
    Ax0 = None if quadratic else state.Ax
    if epoch_fn is None:
        run = _epoch_runner(prob)
        n_slots = _slot_count(prob)
        cyclic = np.arange(n_slots, dtype=np.int64)

        def epoch_fn(x, state, order):
            run(x, None if quadratic else state.Ax, order)
    else:
        n_slots = slots if slots is not None else p
        cyclic = np.arange(n_slots, dtype=np.int64)

    rng = np.random.default_rng(cfg.seed)
    window = None
    if extrapolate:
        window = ExtrapolationWindow(cfg.K, cfg.lambda_reg)
        window.push(x)

    trace = Trace(solver=solver_name)
    gap, measure = _instrument(prob, x, Ax0)
    trace.record(0, 0.0, objective_value(prob, x, Ax0), gap)
    elapsed = 0.0
    if measure <= cfg.tol:
        trace.x = x
        return trace

    for epoch in range(1, cfg.max_epochs + 1):
        t0 = time.perf_counter()
        order = order_fn(rng, n_slots) if order_fn is not None else cyclic
        epoch_fn(x, state, order)
        if window is not None:
            window.push(x)
            if epoch % cfg.K == 0:
                Ax = None if quadratic else state.Ax
                x_new, Ax_new, status = _extrapolation_step(
                    window, prob, x, Ax, cfg.use_guard)
                if status == "accepted":
                    x = x_new
                    if not quadratic:
                        state.Ax = Ax_new
                trace.events.append((epoch, status))
                window.reset(x)
        if state is not None:
            state.after_epoch(x)
        elapsed += time.perf_counter() - t0

        Ax = None if quadratic else state.Ax
        gap, measure = _instrument(prob, x, Ax)
        trace.record(epoch, elapsed, objective_value(prob, x, Ax), gap)
        if measure <= cfg.tol:
            break
    trace.x = x
    return trace


def _random_order(rng, n):
    return rng.integers(0, n, size=n, dtype=np.int64)


# ---------------------------------------------------------------------------
# coordinate-descent solvers
# ---------------------------------------------------------------------------

def anderson_pcd(prob, cfg):
    """Proximal coordinate descent with guarded online extrapolation.

    Every ``cfg.K`` epochs the window of the last ``K+1`` epoch iterates
    is extrapolated; the candidate replaces the iterate only if it does
    not increase the objective.  After an accepted extrapolation the
    maintained predictions are recomputed exactly.
    """
    return _run_epoch_driver(prob, cfg, "pcd_anderson", extrapolate=True)


def baseline_pcd(prob, cfg):
    """Plain cyclic proximal coordinate descent."""
    return _run_epoch_driver(prob, cfg, "pcd", extrapolate=False)


def baseline_prcd(prob, cfg):
    """Proximal coordinate descent with uniformly random coordinate picks.

    One epoch draws ``p`` indices with replacement; runs are
    bit-reproducible for a fixed ``cfg.seed``.
    """
    return _run_epoch_driver(prob, cfg, "prcd", extrapolate=False,
                             order_fn=_random_order)


def _require_quadratic(prob, who):
    if not isinstance(prob, Quadratic):
        raise ArgumentError(f"{who} supports quadratic problems only")


def baseline_cdsym(prob, cfg):
    """Double-sweep coordinate descent (one epoch = both sweeps)."""
    _require_quadratic(prob, "cdsym")

    def epoch_fn(x, state, order):
        cdsym_epoch_quadratic(prob, x)

    return _run_epoch_driver(prob, cfg, "cdsym", extrapolate=False,
                             epoch_fn=epoch_fn)


def anderson_cdsym(prob, cfg):
    """Double-sweep coordinate descent with guarded online extrapolation."""
    _require_quadratic(prob, "cdsym_anderson")

    def epoch_fn(x, state, order):
        cdsym_epoch_quadratic(prob, x)

    return _run_epoch_driver(prob, cfg, "cdsym_anderson", extrapolate=True,
                             epoch_fn=epoch_fn)


# ---------------------------------------------------------------------------
# full-gradient baselines
# ---------------------------------------------------------------------------

def power_iteration(matvec, dim, tol=1e-10, max_iter=1000, seed=0):
    """Largest eigenvalue of a symmetric PSD operator by power iteration."""
    if dim == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    eig = 0.0
    for _ in range(max_iter):
        w = matvec(v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        new = float(v @ matvec(v))
        if abs(new - eig) <= tol * max(1.0, abs(new)):
            return new
        eig = new
    return eig


def global_lipschitz(prob):
    """Lipschitz constant of the smooth datafit gradient (full-vector step)."""
    if isinstance(prob, Quadratic):
        return power_iteration(lambda v: prob.H @ v, prob.dim)
    A = prob.A
    top = power_iteration(lambda v: A.rmatvec(A.matvec(v)), A.n_cols)
    if isinstance(prob, (Lasso, GroupLasso)):
        return top
    if isinstance(prob, ElasticNet):
        return top / A.n_rows
    if isinstance(prob, (LogRegL1, LogRegL2)):
        return top / 4.0
    raise ArgumentError(f"unsupported problem type {type(prob).__name__}")


def _smooth_gradient(prob, x, Ax):
    if isinstance(prob, Quadratic):
        return prob.gradient(x)
    return prob.A.rmatvec(problems.datafit_gradient(prob, Ax))


def _prox_full(prob, v, step):
    if isinstance(prob, Quadratic):
        return v
    lam = prob.lam
    if isinstance(prob, (Lasso, LogRegL1)):
        return np.sign(v) * np.maximum(np.abs(v) - step * lam, 0.0)
    if isinstance(prob, ElasticNet):
        st = np.sign(v) * np.maximum(np.abs(v) - step * lam, 0.0)
        return st / (1.0 + step * prob.rho)
    if isinstance(prob, LogRegL2):
        return v / (1.0 + step * lam)
    if isinstance(prob, GroupLasso):
        out = np.empty_like(v)
        for idx in prob.groups:
            out[idx] = problems.prox_group(v[idx], step * lam)
        return out
    raise ArgumentError(f"unsupported problem type {type(prob).__name__}")


def _gd_step_map(prob):
    """Full gradient step for problems whose objective is smooth."""
    if isinstance(prob, Quadratic):
        L = global_lipschitz(prob)

        def step(x):
            return x - prob.gradient(x) / L
        return step
    if isinstance(prob, LogRegL2):
        L = global_lipschitz(prob) + prob.lam

        def step(x):
            g = prob.A.rmatvec(problems.datafit_gradient(prob, prob.A.matvec(x)))
            return x - (g + prob.lam * x) / L
        return step
    raise ArgumentError("gradient descent needs a smooth objective "
                        "(quadratic or LogRegL2)")


def baseline_gd(prob, cfg):
    """Plain gradient descent with step ``1/L`` (smooth objectives only)."""
    step = _gd_step_map(prob)

    def epoch_fn(x, state, order):
        x[:] = step(x)
        if state is not None:
            state.Ax = prob.A.matvec(x)

    return _run_epoch_driver(prob, cfg, "gd", extrapolate=False,
                             epoch_fn=epoch_fn, slots=1)


def anderson_gd(prob, cfg):
    """Gradient descent with guarded online extrapolation every K steps."""
    step = _gd_step_map(prob)

    def epoch_fn(x, state, order):
        x[:] = step(x)
        if state is not None:
            state.Ax = prob.A.matvec(x)

    return _run_epoch_driver(prob, cfg, "gd_anderson", extrapolate=True,
                             epoch_fn=epoch_fn, slots=1)


def _pg_trace_loop(prob, cfg, solver_name, update):
    """Shared stop/record loop for full-vector methods."""
    p = prob.dim if isinstance(prob, Quadratic) else prob.A.n_cols
    quadratic = isinstance(prob, Quadratic)
    x = np.zeros(p)
    Ax = None if quadratic else np.zeros(prob.A.n_rows)
    trace = Trace(solver=solver_name)
    gap, measure = _instrument(prob, x, Ax)
    trace.record(0, 0.0, objective_value(prob, x, Ax), gap)
    if measure <= cfg.tol:
        trace.x = x
        return trace
    elapsed = 0.0
    carry = None
    for epoch in range(1, cfg.max_epochs + 1):
        t0 = time.perf_counter()
        x, Ax, carry = update(x, Ax, carry)
        elapsed += time.perf_counter() - t0
        gap, measure = _instrument(prob, x, Ax)
        trace.record(epoch, elapsed, objective_value(prob, x, Ax), gap)
        if measure <= cfg.tol:
            break
    trace.x = x
    return trace


def baseline_pgd(prob, cfg):
    """Proximal gradient descent with the global step ``1/L``."""
    L = global_lipschitz(prob)
    if L <= 0:
        raise ArgumentError("datafit curvature is zero; nothing to solve")
    step = 1.0 / L
    quadratic = isinstance(prob, Quadratic)

    def update(x, Ax, carry):
        g = _smooth_gradient(prob, x, Ax)
        x_new = _prox_full(prob, x - step * g, step)
        Ax_new = None if quadratic else prob.A.matvec(x_new)
        return x_new, Ax_new, None

    return _pg_trace_loop(prob, cfg, "pgd", update)


def baseline_fista(prob, cfg):
    """Accelerated proximal gradient with the standard momentum recursion."""
    L = global_lipschitz(prob)
    if L <= 0:
        raise ArgumentError("datafit curvature is zero; nothing to solve")
    step = 1.0 / L
    quadratic = isinstance(prob, Quadratic)

    def update(x, Ax, carry):
        if carry is None:
            z, Az, t = x.copy(), (None if quadratic else Ax.copy()), 1.0
        else:
            z, Az, t = carry
        g = _smooth_gradient(prob, z, Az)
        x_new = _prox_full(prob, z - step * g, step)
        Ax_new = None if quadratic else prob.A.matvec(x_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_new
        z_new = x_new + beta * (x_new - x)
        Az_new = None
        if not quadratic:
            Az_new = Ax_new + beta * (Ax_new - Ax)
        return x_new, Ax_new, (z_new, Az_new, t_new)

    return _pg_trace_loop(prob, cfg, "fista", update)


def conjugate_gradient(prob, cfg):
    """Conjugate gradient on ``Hx = -b`` (quadratics only)."""
    _require_quadratic(prob, "conjugate_gradient")
    H, b = prob.H, prob.b
    state = {"r": None, "d": None}

    def update(x, Ax, carry):
        if carry is None:
            r = -b - H @ x
            d = r.copy()
        else:
            r, d = carry
        Hd = H @ d
        dHd = d @ Hd
        if dHd <= 0:
            return x, None, (r, d)
        alpha = (r @ r) / dHd
        x_new = x + alpha * d
        r_new = r - alpha * Hd
        beta = (r_new @ r_new) / (r @ r) if r @ r > 0 else 0.0
        d_new = r_new + beta * d
        return x_new, None, (r_new, d_new)

    return _pg_trace_loop(prob, cfg, "cg", update)


SOLVERS = {
    "pcd": baseline_pcd,
    "pcd_anderson": anderson_pcd,
    "prcd": baseline_prcd,
    "cdsym": baseline_cdsym,
    "cdsym_anderson": anderson_cdsym,
    "gd": baseline_gd,
    "gd_anderson": anderson_gd,
    "pgd": baseline_pgd,
    "fista": baseline_fista,
    "cg": conjugate_gradient,
}


def solve(prob, cfg):
    """Dispatch on ``cfg.algorithm`` (see ``SOLVERS`` for the registry)."""
    try:
        fn = SOLVERS[cfg.algorithm]
    except KeyError:
        raise ArgumentError(
            f"unknown algorithm {cfg.algorithm!r}; "
            f"choose from {sorted(SOLVERS)}") from None
    return fn(prob, cfg)
