"""Problem definitions: objectives, gradients, curvatures, proxes, gaps.

Supported objectives (``A`` is n x p, labels ``y`` length n):

- Quadratic:   0.5 x'Hx + b'x
- Lasso:       0.5 ||y - Ax||^2 + lam ||x||_1
- ElasticNet:  ||y - Ax||^2 / (2n) + lam ||x||_1 + rho/2 ||x||^2
- LogRegL1:    sum log(1 + exp(-y A x)) + lam ||x||_1
- LogRegL2:    sum log(1 + exp(-y A x)) + lam/2 ||x||^2
- GroupLasso:  0.5 ||y - Ax||^2 + lam sum_g ||x_g||_2

Duality gaps exist for Lasso, ElasticNet and LogRegL1 and are built from
the datafit gradient rescaled into the dual feasible set; the remaining
problems report a stationarity measure instead.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import CscMatrix
from .errors import ArgumentError
from .fixedpoint import Quadratic

__all__ = [
    "Quadratic",
    "Lasso",
    "ElasticNet",
    "LogRegL1",
    "LogRegL2",
    "GroupLasso",
    "GapReport",
    "groups_from_size",
    "objective_value",
    "datafit_value",
    "penalty_value",
    "datafit_gradient",
    "coordinate_lipschitz",
    "prox_coordinate",
    "prox_group",
    "lambda_max",
    "duality_gap",
    "stopping_measure",
    "tikhonov_for_condition",
    "ridge_quadratic",
]


def _check_data(A, y, lam):
    if not isinstance(A, CscMatrix):
        raise ArgumentError("A must be a CscMatrix")
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (A.n_rows,):
        raise ArgumentError("y must have one entry per row of A")
    if not (np.isfinite(lam) and lam > 0):
        raise ArgumentError("lam must be positive")
    y.setflags(write=False)
    return y


def _check_binary(y):
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ArgumentError("logistic labels must be -1/+1")


@dataclass(frozen=True)
class Lasso:
    A: CscMatrix
    y: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "y", _check_data(self.A, self.y, self.lam))


@dataclass(frozen=True)
class ElasticNet:
    A: CscMatrix
    y: np.ndarray
    lam: float
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "y", _check_data(self.A, self.y, self.lam))
        if not (np.isfinite(self.rho) and self.rho >= 0):
            raise ArgumentError("rho must be nonnegative")


@dataclass(frozen=True)
class LogRegL1:
    A: CscMatrix
    y: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "y", _check_data(self.A, self.y, self.lam))
        _check_binary(self.y)


@dataclass(frozen=True)
class LogRegL2:
    A: CscMatrix
    y: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "y", _check_data(self.A, self.y, self.lam))
        _check_binary(self.y)


@dataclass(frozen=True)
class GroupLasso:
    """Least squares with a sum of Euclidean norms over a column partition."""

    A: CscMatrix
    y: np.ndarray
    lam: float
    groups: tuple

    def __post_init__(self):
        object.__setattr__(self, "y", _check_data(self.A, self.y, self.lam))
        groups = tuple(np.ascontiguousarray(g, dtype=np.int64)
                       for g in self.groups)
        if not groups:
            raise ArgumentError("groups must be nonempty")
        flat = np.concatenate(groups)
        if np.sort(flat).tolist() != list(range(self.A.n_cols)):
            raise ArgumentError("groups must partition the columns exactly")
        object.__setattr__(self, "groups", groups)
        grp_ptr = np.zeros(len(groups) + 1, dtype=np.int64)
        for g, idx in enumerate(groups):
            grp_ptr[g + 1] = grp_ptr[g] + idx.size
        object.__setattr__(self, "grp_cols", flat)
        object.__setattr__(self, "grp_ptr", grp_ptr)

    @property
    def n_groups(self):
        return len(self.groups)


def groups_from_size(p, size):
    """Consecutive blocks of ``size`` columns (last block may be shorter)."""
    if size < 1:
        raise ArgumentError("group size must be >= 1")
    return tuple(np.arange(s, min(s + size, p), dtype=np.int64)
                 for s in range(0, p, size))


def _sigmoid_neg(t):
    out = np.empty_like(t)
    pos = t >= 0.0
    e = np.exp(-t[pos])
    out[pos] = e / (1.0 + e)
    out[~pos] = 1.0 / (1.0 + np.exp(t[~pos]))
    return out


def _require_Ax(prob, x, Ax):
    if Ax is None:
        Ax = prob.A.matvec(np.asarray(x, dtype=np.float64))
    return Ax


def datafit_value(prob, x, Ax=None):
    """Smooth data-fitting term of the objective."""
    if isinstance(prob, Quadratic):
        x = np.asarray(x, dtype=np.float64)
        return float(0.5 * x @ (prob.H @ x) + prob.b @ x)
    Ax = _require_Ax(prob, x, Ax)
    r = prob.y - Ax
    if isinstance(prob, (Lasso, GroupLasso)):
        return float(0.5 * (r @ r))
    if isinstance(prob, ElasticNet):
        return float((r @ r) / (2.0 * prob.A.n_rows))
    if isinstance(prob, (LogRegL1, LogRegL2)):
        return float(np.logaddexp(0.0, -prob.y * Ax).sum())
    raise ArgumentError(f"unsupported problem type {type(prob).__name__}")


def penalty_value(prob, x):
    """Penalty term of the objective (0 for quadratics)."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(prob, Quadratic):
        return 0.0
    if isinstance(prob, (Lasso, LogRegL1)):
        return float(prob.lam * np.abs(x).sum())
    if isinstance(prob, ElasticNet):
        return float(prob.lam * np.abs(x).sum() + 0.5 * prob.rho * (x @ x))
    if isinstance(prob, LogRegL2):
        return float(0.5 * prob.lam * (x @ x))
    if isinstance(prob, GroupLasso):
        return float(prob.lam * sum(np.linalg.norm(x[g]) for g in prob.groups))
    raise ArgumentError(f"unsupported problem type {type(prob).__name__}")


def objective_value(prob, x, Ax=None):
    """Full objective at ``x`` (pass ``Ax`` to avoid recomputing it)."""
    return datafit_value(prob, x, Ax) + penalty_value(prob, x)


def datafit_gradient(prob, Ax):
    """Gradient of the datafit with respect to the predictions ``Ax``."""
    Ax = np.asarray(Ax, dtype=np.float64)
    if isinstance(prob, (Lasso, GroupLasso)):
        return Ax - prob.y
    if isinstance(prob, ElasticNet):
        return (Ax - prob.y) / prob.A.n_rows
    if isinstance(prob, (LogRegL1, LogRegL2)):
        return -prob.y * _sigmoid_neg(prob.y * Ax)
    raise ArgumentError(
        "datafit_gradient needs a problem with a design matrix")


def coordinate_lipschitz(prob):
    """Curvature bound per coordinate (per group for GroupLasso).

    Zero entries mark coordinates that solvers must skip (frozen at
    their initial value).
    """
    if isinstance(prob, Quadratic):
        return np.diag(prob.H).copy()
    norms = prob.A.col_norms_sq()
    if isinstance(prob, Lasso):
        return norms
    if isinstance(prob, ElasticNet):
        return norms / prob.A.n_rows + prob.rho
    if isinstance(prob, (LogRegL1, LogRegL2)):
        return norms / 4.0
    if isinstance(prob, GroupLasso):
        dense = prob.A.toarray()
        out = np.empty(prob.n_groups)
        for g, idx in enumerate(prob.groups):
            sub = dense[:, idx]
            out[g] = 0.0 if sub.size == 0 else np.linalg.norm(sub, 2) ** 2
        return out
    raise ArgumentError(f"unsupported problem type {type(prob).__name__}")


def _soft_threshold(v, t):
    if v > t:
        return v - t
    if v < -t:
        return v + t
    return 0.0


def prox_coordinate(prob, j, v, step):
    """Proximal map of coordinate ``j``'s penalty with scale ``step = lam/L_j``."""
    if step < 0:
        raise ArgumentError("step must be nonnegative")
    if isinstance(prob, Quadratic):
        return float(v)
    if isinstance(prob, (Lasso, LogRegL1)):
        return _soft_threshold(v, step)
    if isinstance(prob, ElasticNet):
        # penalty lam|u| + rho/2 u^2 handled jointly: threshold then shrink
        return _soft_threshold(v, step) / (1.0 + step * prob.rho / prob.lam)
    if isinstance(prob, LogRegL2):
        return float(v) / (1.0 + step)
    if isinstance(prob, GroupLasso):
        raise ArgumentError("GroupLasso coordinates move per block; "
                            "use prox_group")
    raise ArgumentError(f"unsupported problem type {type(prob).__name__}")


def prox_group(v, threshold):
    """Block soft threshold: shrink the Euclidean norm of ``v`` by ``threshold``."""
    if threshold < 0:
        raise ArgumentError("threshold must be nonnegative")
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v)
    if norm <= threshold:
        return np.zeros_like(v)
    return (1.0 - threshold / norm) * v


def lambda_max(prob):
    """Smallest penalty strength for which 0 is optimal."""
    if isinstance(prob, (Quadratic, LogRegL2)):
        raise ArgumentError(
            "lambda_max requires a sparsity-inducing penalty")
    aty = prob.A.rmatvec(prob.y)
    if isinstance(prob, Lasso):
        return float(np.abs(aty).max())
    if isinstance(prob, ElasticNet):
        return float(np.abs(aty).max() / prob.A.n_rows)
    if isinstance(prob, LogRegL1):
        return float(np.abs(aty).max() / 2.0)
    if isinstance(prob, GroupLasso):
        return float(max(np.linalg.norm(aty[g]) for g in prob.groups))
    raise ArgumentError(f"unsupported problem type {type(prob).__name__}")


@dataclass(frozen=True)
class GapReport:
    """Primal value, best dual value and their clamped difference."""

    primal: float
    dual: float
    gap: float


def _xlogx(t):
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = t[pos] * np.log(t[pos])
    return out


def duality_gap(prob, x, Ax=None) -> Optional[GapReport]:
    """Duality gap from a rescaled-gradient dual candidate.

    Returns ``None`` for problems without an implemented dual (the gap
    is then unavailable and solvers fall back to a stationarity
    measure).  The reported gap is clamped at zero.
    """
    if not isinstance(prob, (Lasso, ElasticNet, LogRegL1)):
        return None
    x = np.asarray(x, dtype=np.float64)
    Ax = _require_Ax(prob, x, Ax)
    primal = objective_value(prob, x, Ax)
    y = prob.y
    lam = prob.lam

    if isinstance(prob, Lasso):
        r = y - Ax
        scale = max(lam, float(np.abs(prob.A.rmatvec(r)).max() or 0.0))
        theta = r / scale
        resid = y - lam * theta
        dual = 0.5 * (y @ y) - 0.5 * (resid @ resid)
    elif isinstance(prob, ElasticNet):
        n = prob.A.n_rows
        theta = (Ax - y) / n

        def dual_at(th):
            at = prob.A.rmatvec(th)
            val = -(th @ y) - 0.5 * n * (th @ th)
            if prob.rho > 0:
                sq = np.maximum(np.abs(at) - lam, 0.0) ** 2
                val -= sq.sum() / (2.0 * prob.rho)
            return val

        cands = []
        at = prob.A.rmatvec(theta)
        inf_norm = float(np.abs(at).max() if at.size else 0.0)
        if prob.rho > 0:
            cands.append(dual_at(theta))
        if inf_norm > lam:
            cands.append(dual_at(theta * (lam / inf_norm)))
        else:
            cands.append(dual_at(theta))
        dual = max(cands)
    else:  # LogRegL1
        theta = datafit_gradient(prob, Ax)
        at = prob.A.rmatvec(theta)
        inf_norm = float(np.abs(at).max() if at.size else 0.0)
        if inf_norm > lam:
            theta = theta * (lam / inf_norm)
        s = -theta * y
        s = np.clip(s, 0.0, 1.0)
        dual = -float((_xlogx(s) + _xlogx(1.0 - s)).sum())

    gap = max(float(primal - dual), 0.0)
    return GapReport(primal=float(primal), dual=float(dual), gap=gap)


def stopping_measure(prob, x, Ax=None):
    """Convergence measure: the duality gap when defined, else a
    stationarity violation in the same units as the objective scale."""
    x = np.asarray(x, dtype=np.float64)
    report = duality_gap(prob, x, Ax)
    if report is not None:
        return report.gap
    if isinstance(prob, Quadratic):
        return float(np.abs(prob.gradient(x)).max() if x.size else 0.0)
    Ax = _require_Ax(prob, x, Ax)
    g = prob.A.rmatvec(datafit_gradient(prob, Ax))
    if isinstance(prob, LogRegL2):
        return float(np.abs(g + prob.lam * x).max())
    if isinstance(prob, GroupLasso):
        worst = 0.0
        for idx in prob.groups:
            cg = g[idx]
            xg = x[idx]
            nx = np.linalg.norm(xg)
            if nx == 0.0:
                viol = max(np.linalg.norm(cg) - prob.lam, 0.0)
            else:
                viol = np.linalg.norm(cg + prob.lam * xg / nx)
            worst = max(worst, float(viol))
        return worst
    raise ArgumentError(f"unsupported problem type {type(prob).__name__}")


def tikhonov_for_condition(gram_eigs, kappa):
    """Diagonal shift bringing a PSD spectrum to condition number ``kappa``."""
    if kappa <= 1:
        raise ArgumentError("kappa must exceed 1")
    gmax = float(np.max(gram_eigs))
    gmin = float(max(np.min(gram_eigs), 0.0))
    if gmax <= 0:
        raise ArgumentError("spectrum must contain a positive eigenvalue")
    shift = (gmax - kappa * gmin) / (kappa - 1.0)
    return max(shift, 0.0)


def ridge_quadratic(dataset, kappa=None):
    """Quadratic ``0.5||y - Ax||^2 + 0.5*shift*||x||^2`` as an (H, b) pair.

    With ``kappa`` given, the ridge shift is chosen so that H has that
    condition number.
    """
    A = dataset.A.toarray()
    H = A.T @ A
    if kappa is not None:
        shift = tikhonov_for_condition(np.linalg.eigvalsh(H), kappa)
        H = H + shift * np.eye(H.shape[0])
    return Quadratic(H, -A.T @ dataset.y)
