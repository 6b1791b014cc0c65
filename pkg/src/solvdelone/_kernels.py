"""Hot numeric kernels: SOL quasi-metric scans over large point arrays.

Points are passed as flat float64 arrays (x, y, t) plus the precomputed
height factors u = e^{-t/2} and w = e^{t/2}, so the inner loops are pure
multiply/add:

    d(i, j) = u_i*u_j*|x_i-x_j| + w_i*w_j*|y_i-y_j| + |t_i-t_j|

Each kernel has a numba @njit implementation and a chunked pure-numpy
fallback.  Selection: numba is used when importable unless the environment
variable SOLVDELONE_NO_NUMBA is set to a non-empty value other than "0".
``active_backend()`` reports which path is live; both implementations stay
importable for the benchmark in benchmarks/bench_kernels.py.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "active_backend",
    "height_factors",
    "min_pairwise_dist",
    "covering_radius",
    "within_r_of_set",
    "membership_counts",
]

_CHUNK = 4096


def _env_disabled() -> bool:
    v = os.environ.get("SOLVDELONE_NO_NUMBA", "")
    return v not in ("", "0")


# ---------------------------------------------------------------------------
# pure-numpy implementations (always available)
# ---------------------------------------------------------------------------

def _np_min_pairwise_dist(x, y, t, u, w):
    n = x.shape[0]
    best = np.inf
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        dx = np.abs(x[lo:hi, None] - x[None, :])
        dy = np.abs(y[lo:hi, None] - y[None, :])
        dt = np.abs(t[lo:hi, None] - t[None, :])
        d = u[lo:hi, None] * u[None, :] * dx + w[lo:hi, None] * w[None, :] * dy + dt
        # mask the diagonal block
        for i in range(lo, hi):
            d[i - lo, i] = np.inf
        m = d.min()
        if m < best:
            best = m
    return float(best)


def _np_covering_radius(qx, qy, qt, qu, qw, px, py, pt, pu, pw):
    worst = 0.0
    for lo in range(0, qx.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, qx.shape[0])
        dx = np.abs(qx[lo:hi, None] - px[None, :])
        dy = np.abs(qy[lo:hi, None] - py[None, :])
        dt = np.abs(qt[lo:hi, None] - pt[None, :])
        d = qu[lo:hi, None] * pu[None, :] * dx + qw[lo:hi, None] * pw[None, :] * dy + dt
        m = d.min(axis=1).max()
        if m > worst:
            worst = float(m)
    return worst


def _np_within_r_of_set(qx, qy, qt, qu, qw, px, py, pt, pu, pw, R):
    out = np.zeros(qx.shape[0], dtype=np.bool_)
    for lo in range(0, qx.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, qx.shape[0])
        dx = np.abs(qx[lo:hi, None] - px[None, :])
        dy = np.abs(qy[lo:hi, None] - py[None, :])
        dt = np.abs(qt[lo:hi, None] - pt[None, :])
        d = qu[lo:hi, None] * pu[None, :] * dx + qw[lo:hi, None] * pw[None, :] * dy + dt
        out[lo:hi] = (d <= R).any(axis=1)
    return out


def _np_membership_counts(x, y, t, boxes):
    counts = np.zeros(x.shape[0], dtype=np.int64)
    for b in boxes:
        inside = (
            (x >= b[0]) & (x < b[1])
            & (y >= b[2]) & (y < b[3])
            & (t >= b[4]) & (t < b[5])
        )
        counts += inside
    return counts


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

_NUMBA_OK = False
if not _env_disabled():
    try:
        from numba import njit, prange

        @njit(cache=True, parallel=True)
        def _nb_min_pairwise_dist(x, y, t, u, w):
            n = x.shape[0]
            best = np.inf
            for i in prange(n):
                local = np.inf
                for j in range(n):
                    if j == i:
                        continue
                    d = (
                        u[i] * u[j] * abs(x[i] - x[j])
                        + w[i] * w[j] * abs(y[i] - y[j])
                        + abs(t[i] - t[j])
                    )
                    if d < local:
                        local = d
                best = min(best, local)
            return best

        @njit(cache=True, parallel=True)
        def _nb_covering_radius(qx, qy, qt, qu, qw, px, py, pt, pu, pw):
            nq = qx.shape[0]
            np_ = px.shape[0]
            worst = 0.0
            for i in prange(nq):
                local = np.inf
                for j in range(np_):
                    d = (
                        qu[i] * pu[j] * abs(qx[i] - px[j])
                        + qw[i] * pw[j] * abs(qy[i] - py[j])
                        + abs(qt[i] - pt[j])
                    )
                    if d < local:
                        local = d
                worst = max(worst, local)
            return worst

        @njit(cache=True, parallel=True)
        def _nb_within_r_of_set(qx, qy, qt, qu, qw, px, py, pt, pu, pw, R):
            nq = qx.shape[0]
            np_ = px.shape[0]
            out = np.zeros(nq, dtype=np.bool_)
            for i in prange(nq):
                for j in range(np_):
                    d = (
                        qu[i] * pu[j] * abs(qx[i] - px[j])
                        + qw[i] * pw[j] * abs(qy[i] - py[j])
                        + abs(qt[i] - pt[j])
                    )
                    if d <= R:
                        out[i] = True
                        break
            return out

        @njit(cache=True, parallel=True)
        def _nb_membership_counts(x, y, t, boxes):
            n = x.shape[0]
            nb = boxes.shape[0]
            counts = np.zeros(n, dtype=np.int64)
            for i in prange(n):
                c = 0
                for b in range(nb):
                    if (
                        boxes[b, 0] <= x[i] < boxes[b, 1]
                        and boxes[b, 2] <= y[i] < boxes[b, 3]
                        and boxes[b, 4] <= t[i] < boxes[b, 5]
                    ):
                        c += 1
                counts[i] = c
            return counts

        _NUMBA_OK = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        _NUMBA_OK = False


def active_backend() -> str:
    """'numba' when the jit kernels are live, else 'numpy'."""
    return "numba" if _NUMBA_OK else "numpy"


def height_factors(t):
    """(u, w) = (e^{-t/2}, e^{t/2}) for a height array."""
    t = np.asarray(t, dtype=np.float64)
    return np.exp(-0.5 * t), np.exp(0.5 * t)


def _cols(pts):
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    x, y, t = pts[:, 0].copy(), pts[:, 1].copy(), pts[:, 2].copy()
    u, w = height_factors(t)
    return x, y, t, u, w


def min_pairwise_dist(points) -> float:
    """Minimum pairwise quasi-distance of an (n,3) point array (n >= 2)."""
    x, y, t, u, w = _cols(points)
    if x.shape[0] < 2:
        raise ValueError("need at least two points")
    if _NUMBA_OK:
        return float(_nb_min_pairwise_dist(x, y, t, u, w))
    return _np_min_pairwise_dist(x, y, t, u, w)


def covering_radius(queries, points) -> float:
    """max over queries of the min quasi-distance to ``points``."""
    qx, qy, qt, qu, qw = _cols(queries)
    px, py, pt, pu, pw = _cols(points)
    if px.shape[0] == 0:
        raise ValueError("empty reference set")
    if qx.shape[0] == 0:
        return 0.0
    if _NUMBA_OK:
        return float(_nb_covering_radius(qx, qy, qt, qu, qw, px, py, pt, pu, pw))
    return _np_covering_radius(qx, qy, qt, qu, qw, px, py, pt, pu, pw)


def within_r_of_set(queries, points, R: float):
    """Boolean array: query i lies within quasi-distance R of some point."""
    qx, qy, qt, qu, qw = _cols(queries)
    px, py, pt, pu, pw = _cols(points)
    if qx.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    if px.shape[0] == 0:
        return np.zeros(qx.shape[0], dtype=bool)
    if _NUMBA_OK:
        return np.asarray(_nb_within_r_of_set(qx, qy, qt, qu, qw, px, py, pt, pu, pw, float(R)))
    return _np_within_r_of_set(qx, qy, qt, qu, qw, px, py, pt, pu, pw, float(R))


def membership_counts(points, boxes):
    """For each point, in how many half-open boxes (x0,x1,y0,y1,t0,t1) it lies."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    x, y, t = pts[:, 0].copy(), pts[:, 1].copy(), pts[:, 2].copy()
    boxes = np.ascontiguousarray(boxes, dtype=np.float64)
    if boxes.ndim != 2 or boxes.shape[1] != 6:
        raise ValueError("boxes must be (k, 6)")
    if _NUMBA_OK:
        return np.asarray(_nb_membership_counts(x, y, t, boxes))
    return _np_membership_counts(x, y, t, boxes)
