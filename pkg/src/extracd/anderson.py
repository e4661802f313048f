"""Anderson extrapolation of fixed-point sequences.

Given consecutive iterates ``x0..xk`` of a fixed-point map, the
extrapolation weights solve a least-squares problem on the matrix ``U``
of successive differences: minimize ``||U c||`` subject to the weights
summing to one.  The closed form is ``(U'U + reg*I)^{-1} 1`` normalized
by its sum.  Weights are applied to the *later* iterate of each
difference, so the extrapolated point is ``sum_i c_i x_i`` over the last
``k`` iterates.

Two driving modes exist: the offline mode extrapolates a growing prefix
of a fixed base sequence without touching it; the online mode
extrapolates every ``K`` steps and restarts the base sequence from the
extrapolated point (optionally vetoed by a guard functional).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError

__all__ = [
    "ExtrapolationResult",
    "ExtrapolationWindow",
    "extrapolation_coefficients",
    "offline_anderson",
    "online_anderson",
    "OfflineTrace",
    "OnlineTrace",
]

def extrapolation_coefficients(U, lambda_reg=0.0):
    """Normalized extrapolation weights for a difference matrix.

    The weights minimize ``||U c||^2 + reg * ||c||^2`` subject to the
    entries summing to one; the closed form is ``(U'U + reg*I)^{-1} 1``
    normalized by its sum.  To avoid squaring the conditioning of ``U``
    the solve eliminates the constraint (pivot on the last weight) and
    runs a rank-revealing least squares on ``U`` itself, which yields
    the same weights whenever the regularized Gram matrix is invertible.

    Parameters
    ----------
    U : ndarray, shape (p, k)
        Columns are consecutive iterate differences.
    lambda_reg : float
        Tikhonov term added to ``U'U`` (0 disables regularization).

    Returns
    -------
    (ndarray or None, bool)
        The weight vector (sums to one) and a solved flag.  The flag is
        false when the solve breaks down (non-finite input or output);
        the weights are ``None`` in that case.
    """
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[1] < 1:
        raise ArgumentError("U must be a p x k matrix with k >= 1")
    if lambda_reg < 0:
        raise ArgumentError("lambda_reg must be nonnegative")
    k = U.shape[1]
    if not np.all(np.isfinite(U)):
        return None, False
    if k == 1:
        # sum constraint pins the single weight
        return np.ones(1), True
    if lambda_reg:
        U = np.vstack([U, math.sqrt(lambda_reg) * np.eye(k)])
    # c = e_k + sum_i w_i (e_i - e_k) keeps sum(c) = 1 exactly
    rhs = -U[:, -1]
    cols = U[:, :-1] - U[:, -1:]
    try:
        w = np.linalg.lstsq(cols, rhs, rcond=None)[0]
    except np.linalg.LinAlgError:
        return None, False
    c = np.empty(k)
    c[:-1] = w
    c[-1] = 1.0 - w.sum()
    if not np.all(np.isfinite(c)):
        return None, False
    return c, True


@dataclass(frozen=True)
class ExtrapolationResult:
    """Outcome of one extrapolation attempt."""

    coefficients: np.ndarray
    point: np.ndarray
    solved: bool


class ExtrapolationWindow:
    """Ring buffer of the last ``K + 1`` iterates feeding extrapolation."""

    def __init__(self, K, lambda_reg=0.0):
        if K < 1:
            raise ArgumentError("window size K must be >= 1")
        if lambda_reg < 0:
            raise ArgumentError("lambda_reg must be nonnegative")
        self.K = K
        self.lambda_reg = lambda_reg
        self._points = []

    def __len__(self):
        return len(self._points)

    @property
    def ready(self):
        return len(self._points) == self.K + 1

    def push(self, x):
        self._points.append(np.array(x, dtype=np.float64, copy=True))
        if len(self._points) > self.K + 1:
            self._points.pop(0)

    def reset(self, anchor):
        self._points = []
        self.push(anchor)

    def extrapolate(self):
        """Extrapolate from the stored window (requires K+1 points).

        On a singular coefficient solve the last base iterate is
        returned with ``solved=False``.
        """
        if not self.ready:
            raise ArgumentError(
                f"window holds {len(self._points)} points, needs {self.K + 1}")
        pts = self._points
        U = np.column_stack([pts[i + 1] - pts[i] for i in range(self.K)])
        c, solved = extrapolation_coefficients(U, self.lambda_reg)
        if not solved:
            return ExtrapolationResult(None, pts[-1].copy(), False)
        x_e = np.zeros_like(pts[-1])
        for i in range(self.K):
            x_e += c[i] * pts[i + 1]
        return ExtrapolationResult(c, x_e, True)


@dataclass(frozen=True)
class OfflineTrace:
    """Base sequence plus the extrapolated point for every prefix length."""

    base: list
    extrapolated: list
    solved: list


def offline_anderson(step, x0, k_max, lambda_reg=0.0):
    """Extrapolate every prefix of a base sequence without altering it.

    For each ``k = 1..k_max`` the weights are computed from the first
    ``k`` differences and applied to iterates ``x1..xk``.  A failed
    coefficient solve emits the last base iterate for that ``k``.

    ``k_max`` above 1000 is refused (cost grows cubically).
    """
    if k_max < 1:
        raise ArgumentError("k_max must be >= 1")
    if k_max > 1000:
        raise ArgumentError("offline extrapolation refuses k_max > 1000")
    x0 = np.array(x0, dtype=np.float64, copy=True)
    base = [x0]
    for _ in range(k_max):
        base.append(np.asarray(step(base[-1]), dtype=np.float64))
    diffs = np.column_stack([base[i + 1] - base[i] for i in range(k_max)])
    extrapolated = []
    solved_flags = []
    for k in range(1, k_max + 1):
        c, solved = extrapolation_coefficients(diffs[:, :k], lambda_reg)
        if solved:
            x_e = np.zeros_like(x0)
            for i in range(k):
                x_e += c[i] * base[i + 1]
        else:
            x_e = base[k].copy()
        extrapolated.append(x_e)
        solved_flags.append(solved)
    return OfflineTrace(base=base, extrapolated=extrapolated,
                        solved=solved_flags)


@dataclass(frozen=True)
class OnlineTrace:
    """Iterates of the online scheme and the outcome of each attempt."""

    final: np.ndarray
    iterates: list
    events: list = field(default_factory=list)


def online_anderson(step, x0, K, k_max, lambda_reg=0.0, guard=None):
    """Run ``step`` and extrapolate in place every ``K`` iterations.

    Every ``K`` steps the window of the last ``K+1`` points (anchor
    included) is extrapolated and the current iterate is replaced by the
    result.  When ``guard`` is given, the replacement only happens if
    ``guard(x_e) <= guard(x)``.  Events record ``(k, status)`` with
    status in ``{"accepted", "rejected", "singular"}``.
    """
    if k_max < 0:
        raise ArgumentError("k_max must be nonnegative")
    window = ExtrapolationWindow(K, lambda_reg)
    x = np.array(x0, dtype=np.float64, copy=True)
    window.push(x)
    iterates = []
    events = []
    for k in range(1, k_max + 1):
        x = np.asarray(step(x), dtype=np.float64)
        window.push(x)
        if k % K == 0:
            res = window.extrapolate()
            if not res.solved:
                events.append((k, "singular"))
            elif guard is None or guard(res.point) <= guard(x):
                x = res.point
                events.append((k, "accepted"))
            else:
                events.append((k, "rejected"))
            window.reset(x)
        iterates.append(x.copy())
    return OnlineTrace(final=x, iterates=iterates, events=events)
