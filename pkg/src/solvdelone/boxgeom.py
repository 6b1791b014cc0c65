"""Quasi-metric distance computations against coordinate boxes in SOL.

Distances to a box face are realized by sliding the comparison height: the
horizontal gap dx costs min over s of e^{-(t+s)/2} dx + |t-s|, which is the
gap itself while it is < 2 at the query height and 2 + 2 log(gap/2) beyond
(the standard horocyclic shortcut).  These closed forms make margin tests
and neighborhood windows O(1) per point, with everything vectorized.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np

from .lattice import SolBox

__all__ = [
    "face_gap_cost",
    "face_gap_inverse",
    "interior_margin",
    "dist_to_box",
    "window_halfwidths",
]


def face_gap_cost(v):
    """min_h [ v e^{-h/2} + h ] over h >= 0 for a height-rescaled gap v >= 0."""
    v = np.asarray(v, dtype=float)
    out = np.where(v <= 2.0, v, 2.0 + 2.0 * np.log(np.maximum(v, 2.0) / 2.0))
    return out if out.ndim else float(out)


def face_gap_inverse(R: float) -> float:
    """Largest rescaled gap with face_gap_cost(gap) <= R."""
    if R < 0:
        return 0.0
    return R if R <= 2.0 else 2.0 * math.exp((R - 2.0) / 2.0)


def interior_margin(x, y, t, box: SolBox):
    """Quasi-distance from interior points to the complement of the box.

    Exact: the complement is a union of six face regions and the infimum
    against each region is the closed-form face cost (x/y faces allow the
    height slide in the cheap direction, t faces do not).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    emt = np.exp(-t)
    ept = np.exp(t)
    m = np.minimum.reduce(
        [
            face_gap_cost((x - box.x0) * emt),
            face_gap_cost((box.x1 - x) * emt),
            face_gap_cost((y - box.y0) * ept),
            face_gap_cost((box.y1 - y) * ept),
            t - box.t0,
            box.t1 - t,
        ]
    )
    return m if m.ndim else float(m)


def _min_slide(A, B, t, lo, hi):
    """min over s in [lo, hi] of A e^{-s/2} + B e^{s/2} + |t - s| (convex)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    t = np.asarray(t, dtype=float)
    cands = [np.full_like(A, lo), np.full_like(A, hi), np.clip(t, lo, hi)]
    # stationary points of each smooth branch: B z^2 -+ 2 z - A = 0, z = e^{s/2}
    with np.errstate(divide="ignore", invalid="ignore"):
        for sign in (+1.0, -1.0):
            disc = np.sqrt(np.maximum(1.0 + A * B, 0.0))
            z = np.where(B > 0, (sign + disc) / np.maximum(B, 1e-300), np.inf)
            s = 2.0 * np.log(np.maximum(z, 1e-300))
            cands.append(np.clip(s, lo, hi))
        # B == 0 branch: A e^{-s/2} = 2 at the kink of the upward slide
        zA = np.where(A > 0, A / 2.0, 1.0)
        cands.append(np.clip(2.0 * np.log(np.maximum(zA, 1e-300)), lo, hi))
    best = np.full_like(A, np.inf)
    for s in cands:
        val = A * np.exp(-0.5 * s) + B * np.exp(0.5 * s) + np.abs(t - s)
        best = np.minimum(best, val)
    return best


def dist_to_box(x, y, t, box: SolBox):
    """Quasi-distance from arbitrary points to the (closed) box, 0 inside."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    dx = np.maximum(np.maximum(box.x0 - x, x - box.x1), 0.0)
    dy = np.maximum(np.maximum(box.y0 - y, y - box.y1), 0.0)
    A = dx * np.exp(-0.5 * t)
    B = dy * np.exp(0.5 * t)
    d = _min_slide(A, B, t, box.t0, box.t1)
    return d if d.ndim else float(d)


def window_halfwidths(t: float, box: SolBox, R: float) -> Tuple[float, float]:
    """(wx, wy): any point at height t within R of the box satisfies
    dist(x, [x0,x1]) <= wx and dist(y, [y0,y1]) <= wy.  Used to build
    enumeration windows; conservative but tight up to the slide formula."""
    hgap = max(box.t0 - t, t - box.t1, 0.0)
    if R - hgap < 0:
        return -1.0, -1.0

    def fmax(sgn: float) -> float:
        # max over s in [t0, t1] of (R - |t-s|) e^{sgn (t+s)/2}; the smooth
        # branches are maximized at s = t +- (R - 2/|..|) style kinks, so the
        # exact max is attained at one of four candidate heights
        cands = [box.t0, box.t1, min(max(t, box.t0), box.t1)]
        cands.append(min(max(t + sgn * (R - 2.0), box.t0), box.t1))
        cands.append(min(max(t - sgn * (R - 2.0), box.t0), box.t1))
        best = 0.0
        for s in cands:
            rem = R - abs(t - s)
            if rem > 0:
                best = max(best, rem * math.exp(sgn * 0.5 * (t + s)))
        return best

    return fmax(+1.0), fmax(-1.0)
