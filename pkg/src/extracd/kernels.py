"""Hot numerical kernels with two interchangeable backends.

Every kernel exists twice: an explicit-loop version compiled with numba
(``@njit(cache=True)``) and a per-column vectorized pure-numpy version.
The backend is chosen at import time: set the environment variable
``EXTRACD_NUMBA=0`` to force the numpy fallback; otherwise numba is used
whenever it imports.  ``IMPLS`` keeps both tables alive so tests and the
kernel benchmark can compare them.

All sparse kernels operate on raw CSC arrays (values, row indices,
column pointers) and update ``x`` / ``Ax`` in place.  Coordinates whose
curvature bound is zero are skipped, which freezes them at their initial
value.
"""

import math
import os

import numpy as np

_env = os.environ.get("EXTRACD_NUMBA", "1").strip().lower()
_want_numba = _env not in ("0", "false", "off", "no")

HAVE_NUMBA = False
if _want_numba:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a hard dependency
        HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# scalar helpers (compiled when the numba backend is active)
# ---------------------------------------------------------------------------

def _st(v, t):
    # soft threshold: sign(v) * max(|v| - t, 0)
    if v > t:
        return v - t
    if v < -t:
        return v + t
    return 0.0


def _sig_neg(t):
    # sigma(-t) = 1 / (1 + e^t), overflow-safe on both sides
    if t >= 0.0:
        e = math.exp(-t)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(t))


def _sig_neg_vec(t):
    out = np.empty_like(t)
    pos = t >= 0.0
    e = np.exp(-t[pos])
    out[pos] = e / (1.0 + e)
    out[~pos] = 1.0 / (1.0 + np.exp(t[~pos]))
    return out


# ---------------------------------------------------------------------------
# explicit-loop sources (numba)
# ---------------------------------------------------------------------------

def _csc_matvec_loops(data, indices, indptr, n_rows, x):
    out = np.zeros(n_rows)
    for j in range(indptr.size - 1):
        xj = x[j]
        if xj != 0.0:
            for k in range(indptr[j], indptr[j + 1]):
                out[indices[k]] += data[k] * xj
    return out


def _csc_rmatvec_loops(data, indices, indptr, v):
    p = indptr.size - 1
    out = np.empty(p)
    for j in range(p):
        acc = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            acc += data[k] * v[indices[k]]
        out[j] = acc
    return out


def _csc_col_norms_sq_loops(data, indptr):
    p = indptr.size - 1
    out = np.empty(p)
    for j in range(p):
        acc = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            acc += data[k] * data[k]
        out[j] = acc
    return out


def _cd_dense_epoch_loops(H, b, x, order):
    for idx in range(order.size):
        j = order[idx]
        r = np.dot(H[j], x) + b[j]
        x[j] -= r / H[j, j]


def _lasso_epoch_loops(data, indices, indptr, y, x, Ax, lip, lam, order):
    for idx in range(order.size):
        j = order[idx]
        lj = lip[j]
        if lj <= 0.0:
            continue
        start, end = indptr[j], indptr[j + 1]
        grad = 0.0
        for k in range(start, end):
            i = indices[k]
            grad += data[k] * (Ax[i] - y[i])
        new = _st(x[j] - grad / lj, lam / lj)
        d = new - x[j]
        if d != 0.0:
            for k in range(start, end):
                Ax[indices[k]] += d * data[k]
            x[j] = new


def _enet_epoch_loops(data, indices, indptr, y, x, Ax, lip, lam, rho,
                      n_samples, order):
    for idx in range(order.size):
        j = order[idx]
        lj = lip[j]
        if lj <= 0.0:
            continue
        start, end = indptr[j], indptr[j + 1]
        grad = 0.0
        for k in range(start, end):
            i = indices[k]
            grad += data[k] * (Ax[i] - y[i])
        grad /= n_samples
        new = _st(x[j] - grad / lj, lam / lj) / (1.0 + rho / lj)
        d = new - x[j]
        if d != 0.0:
            for k in range(start, end):
                Ax[indices[k]] += d * data[k]
            x[j] = new


def _logreg_l1_epoch_loops(data, indices, indptr, y, x, Ax, lip, lam, order):
    for idx in range(order.size):
        j = order[idx]
        lj = lip[j]
        if lj <= 0.0:
            continue
        start, end = indptr[j], indptr[j + 1]
        grad = 0.0
        for k in range(start, end):
            i = indices[k]
            grad += data[k] * (-y[i] * _sig_neg(y[i] * Ax[i]))
        new = _st(x[j] - grad / lj, lam / lj)
        d = new - x[j]
        if d != 0.0:
            for k in range(start, end):
                Ax[indices[k]] += d * data[k]
            x[j] = new


def _logreg_l2_epoch_loops(data, indices, indptr, y, x, Ax, lip, lam, order):
    for idx in range(order.size):
        j = order[idx]
        lj = lip[j]
        if lj <= 0.0:
            continue
        start, end = indptr[j], indptr[j + 1]
        grad = 0.0
        for k in range(start, end):
            i = indices[k]
            grad += data[k] * (-y[i] * _sig_neg(y[i] * Ax[i]))
        new = (x[j] - grad / lj) / (1.0 + lam / lj)
        d = new - x[j]
        if d != 0.0:
            for k in range(start, end):
                Ax[indices[k]] += d * data[k]
            x[j] = new


def _group_epoch_loops(data, indices, indptr, y, x, Ax, grp_cols, grp_ptr,
                       lip_g, lam, order_g):
    for idx in range(order_g.size):
        g = order_g[idx]
        lg = lip_g[g]
        if lg <= 0.0:
            continue
        gs, ge = grp_ptr[g], grp_ptr[g + 1]
        m = ge - gs
        v = np.empty(m)
        sq = 0.0
        for t in range(m):
            j = grp_cols[gs + t]
            grad = 0.0
            for k in range(indptr[j], indptr[j + 1]):
                i = indices[k]
                grad += data[k] * (Ax[i] - y[i])
            vt = x[j] - grad / lg
            v[t] = vt
            sq += vt * vt
        norm = math.sqrt(sq)
        thr = lam / lg
        scale = 0.0 if norm <= thr else 1.0 - thr / norm
        for t in range(m):
            j = grp_cols[gs + t]
            new = scale * v[t]
            d = new - x[j]
            if d != 0.0:
                for k in range(indptr[j], indptr[j + 1]):
                    Ax[indices[k]] += d * data[k]
                x[j] = new


# ---------------------------------------------------------------------------
# per-column vectorized numpy fallback
# ---------------------------------------------------------------------------

def _csc_matvec_numpy(data, indices, indptr, n_rows, x):
    out = np.zeros(n_rows)
    for j in range(indptr.size - 1):
        if x[j] != 0.0:
            sl = slice(indptr[j], indptr[j + 1])
            out[indices[sl]] += data[sl] * x[j]
    return out


def _csc_rmatvec_numpy(data, indices, indptr, v):
    p = indptr.size - 1
    out = np.empty(p)
    for j in range(p):
        sl = slice(indptr[j], indptr[j + 1])
        out[j] = data[sl] @ v[indices[sl]]
    return out


def _csc_col_norms_sq_numpy(data, indptr):
    p = indptr.size - 1
    out = np.empty(p)
    for j in range(p):
        sl = slice(indptr[j], indptr[j + 1])
        out[j] = data[sl] @ data[sl]
    return out


def _cd_dense_epoch_numpy(H, b, x, order):
    for j in order:
        r = H[j] @ x + b[j]
        x[j] -= r / H[j, j]


def _lasso_epoch_numpy(data, indices, indptr, y, x, Ax, lip, lam, order):
    for j in order:
        lj = lip[j]
        if lj <= 0.0:
            continue
        sl = slice(indptr[j], indptr[j + 1])
        rows = indices[sl]
        vals = data[sl]
        grad = vals @ (Ax[rows] - y[rows])
        new = _st(x[j] - grad / lj, lam / lj)
        d = new - x[j]
        if d != 0.0:
            Ax[rows] += d * vals
            x[j] = new


def _enet_epoch_numpy(data, indices, indptr, y, x, Ax, lip, lam, rho,
                      n_samples, order):
    for j in order:
        lj = lip[j]
        if lj <= 0.0:
            continue
        sl = slice(indptr[j], indptr[j + 1])
        rows = indices[sl]
        vals = data[sl]
        grad = (vals @ (Ax[rows] - y[rows])) / n_samples
        new = _st(x[j] - grad / lj, lam / lj) / (1.0 + rho / lj)
        d = new - x[j]
        if d != 0.0:
            Ax[rows] += d * vals
            x[j] = new


def _logreg_l1_epoch_numpy(data, indices, indptr, y, x, Ax, lip, lam, order):
    for j in order:
        lj = lip[j]
        if lj <= 0.0:
            continue
        sl = slice(indptr[j], indptr[j + 1])
        rows = indices[sl]
        vals = data[sl]
        yr = y[rows]
        grad = vals @ (-yr * _sig_neg_vec(yr * Ax[rows]))
        new = _st(x[j] - grad / lj, lam / lj)
        d = new - x[j]
        if d != 0.0:
            Ax[rows] += d * vals
            x[j] = new


def _logreg_l2_epoch_numpy(data, indices, indptr, y, x, Ax, lip, lam, order):
    for j in order:
        lj = lip[j]
        if lj <= 0.0:
            continue
        sl = slice(indptr[j], indptr[j + 1])
        rows = indices[sl]
        vals = data[sl]
        yr = y[rows]
        grad = vals @ (-yr * _sig_neg_vec(yr * Ax[rows]))
        new = (x[j] - grad / lj) / (1.0 + lam / lj)
        d = new - x[j]
        if d != 0.0:
            Ax[rows] += d * vals
            x[j] = new


def _group_epoch_numpy(data, indices, indptr, y, x, Ax, grp_cols, grp_ptr,
                       lip_g, lam, order_g):
    for g in order_g:
        lg = lip_g[g]
        if lg <= 0.0:
            continue
        cols = grp_cols[grp_ptr[g]:grp_ptr[g + 1]]
        v = np.empty(cols.size)
        for t, j in enumerate(cols):
            sl = slice(indptr[j], indptr[j + 1])
            grad = data[sl] @ (Ax[indices[sl]] - y[indices[sl]])
            v[t] = x[j] - grad / lg
        norm = math.sqrt(v @ v)
        thr = lam / lg
        scale = 0.0 if norm <= thr else 1.0 - thr / norm
        for t, j in enumerate(cols):
            new = scale * v[t]
            d = new - x[j]
            if d != 0.0:
                sl = slice(indptr[j], indptr[j + 1])
                Ax[indices[sl]] += d * data[sl]
                x[j] = new


_NUMPY_IMPLS = {
    "csc_matvec": _csc_matvec_numpy,
    "csc_rmatvec": _csc_rmatvec_numpy,
    "csc_col_norms_sq": _csc_col_norms_sq_numpy,
    "cd_dense_epoch": _cd_dense_epoch_numpy,
    "lasso_epoch": _lasso_epoch_numpy,
    "enet_epoch": _enet_epoch_numpy,
    "logreg_l1_epoch": _logreg_l1_epoch_numpy,
    "logreg_l2_epoch": _logreg_l2_epoch_numpy,
    "group_epoch": _group_epoch_numpy,
}

IMPLS = {"numpy": _NUMPY_IMPLS}

if HAVE_NUMBA:
    _st = njit(cache=True, inline="always")(_st)
    _sig_neg = njit(cache=True, inline="always")(_sig_neg)
    IMPLS["numba"] = {
        "csc_matvec": njit(cache=True)(_csc_matvec_loops),
        "csc_rmatvec": njit(cache=True)(_csc_rmatvec_loops),
        "csc_col_norms_sq": njit(cache=True)(_csc_col_norms_sq_loops),
        "cd_dense_epoch": njit(cache=True)(_cd_dense_epoch_loops),
        "lasso_epoch": njit(cache=True)(_lasso_epoch_loops),
        "enet_epoch": njit(cache=True)(_enet_epoch_loops),
        "logreg_l1_epoch": njit(cache=True)(_logreg_l1_epoch_loops),
        "logreg_l2_epoch": njit(cache=True)(_logreg_l2_epoch_loops),
        "group_epoch": njit(cache=True)(_group_epoch_loops),
    }

_ACTIVE = IMPLS[BACKEND]

csc_matvec = _ACTIVE["csc_matvec"]
csc_rmatvec = _ACTIVE["csc_rmatvec"]
csc_col_norms_sq = _ACTIVE["csc_col_norms_sq"]
cd_dense_epoch = _ACTIVE["cd_dense_epoch"]
lasso_epoch = _ACTIVE["lasso_epoch"]
enet_epoch = _ACTIVE["enet_epoch"]
logreg_l1_epoch = _ACTIVE["logreg_l1_epoch"]
logreg_l2_epoch = _ACTIVE["logreg_l2_epoch"]
group_epoch = _ACTIVE["group_epoch"]


def warmup():
    """Compile (numba backend) or touch every kernel on a tiny instance."""
    data = np.array([1.0, 2.0])
    indices = np.array([0, 1], dtype=np.int64)
    indptr = np.array([0, 1, 2], dtype=np.int64)
    y = np.array([1.0, -1.0])
    order = np.arange(2, dtype=np.int64)
    ones = np.ones(2)
    csc_matvec(data, indices, indptr, 2, ones.copy())
    csc_rmatvec(data, indices, indptr, ones.copy())
    csc_col_norms_sq(data, indptr)
    cd_dense_epoch(np.eye(2), np.zeros(2), np.zeros(2), order)
    lasso_epoch(data, indices, indptr, y, np.zeros(2), np.zeros(2),
                ones.copy(), 0.1, order)
    enet_epoch(data, indices, indptr, y, np.zeros(2), np.zeros(2),
               ones.copy(), 0.1, 0.1, 2, order)
    logreg_l1_epoch(data, indices, indptr, y, np.zeros(2), np.zeros(2),
                    ones.copy(), 0.1, order)
    logreg_l2_epoch(data, indices, indptr, y, np.zeros(2), np.zeros(2),
                    ones.copy(), 0.1, order)
    group_epoch(data, indices, indptr, y, np.zeros(2), np.zeros(2),
                order.copy(), np.array([0, 2], dtype=np.int64),
                ones.copy(), 0.1, np.zeros(1, dtype=np.int64))
