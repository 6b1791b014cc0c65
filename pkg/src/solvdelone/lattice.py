"""Lattices in SOL and BS(1,m) point enumeration, snapping, Delone constants.

Gamma = Z^2 x|_A Z embeds in SOL by writing (a, b) in the expanding /
contracting unit eigenbasis of A and placing the Z-factor at heights
k * log(lambda).  The embedding is an exact group homomorphism into the SOL
multiplication law.  Enumeration over a coordinate box walks height slabs
and, inside each slab, scans the integer strip cut out by the (thin)
contracting constraint, so wide boxes stay O(points) instead of
O(bounding box).

The coarse-density constant C and the fundamental-domain diameter D are not
pinned by theory here, only asserted to exist; both are estimated by
deterministic sampling over a fundamental box and inflated by 10%.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .geometry import SolPoint, sol_dist, sol_mul
from .madic import BsPoint, MadicBall, MadicRational

__all__ = [
    "LatticeSpec",
    "LatticePoint",
    "LatticePointSet",
    "SolBox",
    "BsBox",
    "DeloneSet",
    "ResourceLimitError",
    "ConstantViolationError",
    "embed",
    "enumerate_sol_lattice",
    "snap",
    "enumerate_bs",
    "bs_box_count",
    "count_congruent_in_range",
    "delone_constants",
]

ENUMERATION_LIMIT = 10**8


class ResourceLimitError(RuntimeError):
    """Requested enumeration exceeds the configured point budget."""


class ConstantViolationError(RuntimeError):
    """A claimed lattice constant (C) failed on explicit data."""


@dataclass(frozen=True)
class SolBox:
    """Half-open coordinate box [x0,x1) x [y0,y1) x [t0,t1) in SOL."""

    x0: float
    x1: float
    y0: float
    y1: float
    t0: float
    t1: float

    def volume(self) -> float:
        return max(0.0, self.x1 - self.x0) * max(0.0, self.y1 - self.y0) * max(
            0.0, self.t1 - self.t0
        )

    def contains(self, p: SolPoint) -> bool:
        return (
            self.x0 <= p.x < self.x1
            and self.y0 <= p.y < self.y1
            and self.t0 <= p.t < self.t1
        )

    @classmethod
    def s_n(cls, N: float) -> "SolBox":
        """The set S_N = [0,N) x [0,1) x [0, log N)."""
        return cls(0.0, float(N), 0.0, 1.0, 0.0, math.log(N))

    @classmethod
    def standard(cls, r: float, s: float) -> "SolBox":
        """Standard Folner box U_r x U_s x [-log s, log r)."""
        return cls(0.0, r, 0.0, s, -math.log(s), math.log(r))

    def translate(self, g: SolPoint) -> "SolBox":
        """Image under left multiplication by g (boxes map to boxes)."""
        et = math.exp(g.t)
        return SolBox(
            g.x + et * self.x0,
            g.x + et * self.x1,
            g.y + self.y0 / et,
            g.y + self.y1 / et,
            g.t + self.t0,
            g.t + self.t1,
        )


class LatticeSpec:
    """Z^2 x|_A Z with its eigen-embedding data and measured constants."""

    def __init__(self, A: Sequence[Sequence[int]] = ((2, 1), (1, 1))):
        A = np.array(A, dtype=np.int64)
        if A.shape != (2, 2):
            raise ValueError("A must be 2x2")
        if int(round(np.linalg.det(A.astype(float)))) != 1:
            raise ValueError(f"det A must be 1, got {np.linalg.det(A.astype(float))}")
        if A[0, 0] + A[1, 1] < 3:
            raise ValueError("trace A must be >= 3 (hyperbolic with norm != 1 eigenvalues)")
        self.A = A
        evals, evecs = np.linalg.eig(A.astype(float))
        order = np.argsort(evals)[::-1]
        self.lam = float(evals[order[0]])
        self.loglam = math.log(self.lam)
        vp = evecs[:, order[0]]
        vm = evecs[:, order[1]]
        if vp[0] < 0:
            vp = -vp
        if vm[0] < 0:
            vm = -vm
        self.eigenbasis = np.column_stack([vp, vm])  # columns: expanding, contracting
        self.eigenbasis_inv = np.linalg.inv(self.eigenbasis)
        # Haar measure of SOL in (x,y,t) coordinates is dx dy dt
        self.covolume = abs(np.linalg.det(self.eigenbasis_inv)) * self.loglam
        self._C: Optional[float] = None
        self._D: Optional[float] = None

    # -- embedding -----------------------------------------------------------

    def embed(self, a: int, b: int, k: int) -> SolPoint:
        xy = self.eigenbasis_inv @ np.array([a, b], dtype=float)
        return SolPoint(float(xy[0]), float(xy[1]), k * self.loglam)

    def _local_lattice(self, ab_range: int = 8, k_range: int = 2) -> np.ndarray:
        pts = []
        for a in range(-ab_range, ab_range + 1):
            for b in range(-ab_range, ab_range + 1):
                xy = self.eigenbasis_inv @ np.array([a, b], dtype=float)
                for k in range(-k_range, k_range + 1):
                    pts.append((xy[0], xy[1], k * self.loglam))
        return np.array(pts)

    def _fundamental_samples(self, nu: int, nv: int, nt: int) -> np.ndarray:
        """Deterministic grid over one xy cell times [0, log lambda)."""
        us = (np.arange(nu) + 0.5) / nu
        vs = (np.arange(nv) + 0.5) / nv
        ts = (np.arange(nt) + 0.5) / nt * self.loglam
        cell = self.eigenbasis_inv  # columns span the xy cell
        out = []
        for u in us:
            for v in vs:
                xy = cell @ np.array([u, v])
                for t in ts:
                    out.append((xy[0], xy[1], t))
        return np.array(out)

    @property
    def C(self) -> float:
        """Coarse density constant: sampled covering radius, inflated 10%."""
        if self._C is None:
            samples = self._fundamental_samples(36, 36, 24)
            lat = self._local_lattice()
            self._C = 1.1 * _kernels.covering_radius(samples, lat)
        return self._C

    @property
    def D(self) -> float:
        """diam(G/Gamma) estimate: sampled quotient diameter, inflated 10%,
        floored at the covering radius (a diameter can never be smaller)."""
        if self._D is None:
            ps = self._fundamental_samples(11, 11, 9)
            lat = self._local_lattice()
            worst = 0.0
            # min over gamma of d(p, gamma * q), vectorized over gamma
            gx, gy, gt = lat[:, 0], lat[:, 1], lat[:, 2]
            egt = np.exp(gt)
            for q in ps[:: max(1, len(ps) // 140)]:
                hx = gx + egt * q[0]
                hy = gy + q[1] / egt
                ht = gt + q[2]
                eh = np.exp(-0.5 * ht)
                wh = np.exp(0.5 * ht)
                for p in ps[:: max(1, len(ps) // 140)]:
                    d = (
                        math.exp(-0.5 * p[2]) * eh * np.abs(p[0] - hx)
                        + math.exp(0.5 * p[2]) * wh * np.abs(p[1] - hy)
                        + np.abs(p[2] - ht)
                    )
                    worst = max(worst, float(d.min()))
            self._D = 1.1 * max(worst, self.C / 1.1)
        return self._D


@dataclass(frozen=True)
class LatticePoint:
    a: int
    b: int
    k: int
    embedded: SolPoint


@dataclass
class LatticePointSet:
    """Array view of an enumerated set: abk integer rows, xyz float rows."""

    abk: np.ndarray
    points: np.ndarray
    spec: LatticeSpec

    def __len__(self) -> int:
        return self.abk.shape[0]

    def __iter__(self):
        for (a, b, k), (x, y, t) in zip(self.abk, self.points):
            yield LatticePoint(int(a), int(b), int(k), SolPoint(float(x), float(y), float(t)))

    def sorted_by_abk(self) -> "LatticePointSet":
        order = np.lexsort((self.abk[:, 1], self.abk[:, 0], self.abk[:, 2]))
        return LatticePointSet(self.abk[order], self.points[order], self.spec)


def embed(a: int, b: int, k: int, spec: LatticeSpec) -> SolPoint:
    return spec.embed(a, b, k)


def _slab_strip_scan(spec: LatticeSpec, k: int, x0, x1, y0, y1):
    """Integer (a,b) with eigen-coordinates in [x0,x1) x [y0,y1).

    b is solved per a from the y-constraint; the a-range comes from the
    bounding interval of the window corners.  Complexity is O(x-extent),
    not O(x-extent * y-extent).
    """
    M = spec.eigenbasis
    Minv = spec.eigenbasis_inv
    corners = [M @ np.array([xx, yy]) for xx in (x0, x1) for yy in (y0, y1)]
    corners = np.array(corners)
    alo = int(math.floor(corners[:, 0].min())) - 1
    ahi = int(math.ceil(corners[:, 0].max())) + 1
    if ahi < alo:
        return np.zeros((0, 2), dtype=np.int64)
    avals = np.arange(alo, ahi + 1, dtype=np.int64)
    q1, q2 = Minv[1, 0], Minv[1, 1]  # y = q1 a + q2 b
    if q2 == 0:
        raise ValueError("degenerate eigenbasis")
    lo = (y0 - q1 * avals) / q2
    hi = (y1 - q1 * avals) / q2
    blo = np.ceil(np.minimum(lo, hi) - 1e-12).astype(np.int64)
    bhi = np.floor(np.maximum(lo, hi) + 1e-12).astype(np.int64)
    width = int(max(0, (bhi - blo).max() + 1)) if len(avals) else 0
    out = []
    p1, p2 = Minv[0, 0], Minv[0, 1]  # x = p1 a + p2 b
    for off in range(width):
        bs = blo + off
        ok = bs <= bhi
        if not ok.any():
            continue
        aa, bb = avals[ok], bs[ok]
        xs = p1 * aa + p2 * bb
        ys = q1 * aa + q2 * bb
        keep = (xs >= x0) & (xs < x1) & (ys >= y0) & (ys < y1)
        if keep.any():
            out.append(np.column_stack([aa[keep], bb[keep]]))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(out, axis=0)


def enumerate_sol_lattice(box: SolBox, spec: LatticeSpec) -> LatticePointSet:
    """All lattice points whose embedding lies in the half-open box."""
    expected = box.volume() / spec.covolume
    if expected > ENUMERATION_LIMIT:
        raise ResourceLimitError(
            f"box holds ~{expected:.3g} lattice points (> {ENUMERATION_LIMIT:g})"
        )
    klo = int(math.ceil(box.t0 / spec.loglam - 1e-12))
    khi = int(math.floor((box.t1 - 1e-12) / spec.loglam))
    rows_abk = []
    rows_xyz = []
    Minv = spec.eigenbasis_inv
    for k in range(klo, khi + 1):
        t = k * spec.loglam
        if not (box.t0 <= t < box.t1):
            continue
        ab = _slab_strip_scan(spec, k, box.x0, box.x1, box.y0, box.y1)
        if len(ab) == 0:
            continue
        xy = ab @ Minv.T
        rows_abk.append(np.column_stack([ab, np.full(len(ab), k, dtype=np.int64)]))
        rows_xyz.append(np.column_stack([xy, np.full(len(ab), t)]))
    if not rows_abk:
        return LatticePointSet(
            np.zeros((0, 3), dtype=np.int64), np.zeros((0, 3)), spec
        )
    abk = np.concatenate(rows_abk, axis=0)
    xyz = np.concatenate(rows_xyz, axis=0)
    return LatticePointSet(abk, xyz, spec).sorted_by_abk()


def snap(g: SolPoint, spec: LatticeSpec, radius: Optional[float] = None) -> LatticePoint:
    """Nearest lattice point (ties broken by lexicographic (k, a, b)).

    The search window is the set of lattice points within ``radius``
    (default spec.C) of g, which is exhaustive for the minimizer whenever a
    candidate within the radius exists; otherwise the coarse-density claim
    failed and a ConstantViolationError is raised.
    """
    R = spec.C if radius is None else radius
    klo = int(math.ceil((g.t - R) / spec.loglam - 1e-12))
    khi = int(math.floor((g.t + R) / spec.loglam + 1e-12))
    best = None
    for k in range(klo, khi + 1):
        t = k * spec.loglam
        half = 0.5 * (g.t + t)
        wx = R * math.exp(half)
        wy = R * math.exp(-half)
        ab = _slab_strip_scan(spec, k, g.x - wx, g.x + wx, g.y - wy, g.y + wy)
        for a, b in ab:
            p = spec.embed(int(a), int(b), k)
            d = sol_dist(p, g)
            key = (d, k, int(a), int(b))
            if best is None or key < best[0:1] + best[1]:
                best = (d, (k, int(a), int(b)), p)
    if best is None or best[0] > R + 1e-12:
        raise ConstantViolationError(
            f"no lattice point within {R} of {tuple(g)}; C underestimated?"
        )
    d, (k, a, b), p = best
    return LatticePoint(a, b, k, p)


# ---------------------------------------------------------------------------
# BS(1,m) enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BsBox:
    """Half-open box interval x ball x height range in the BS coordinate model."""

    x0: Fraction
    x1: Fraction
    ball: MadicBall
    t0: int
    t1: int

    @classmethod
    def s_n(cls, N: int, m: int) -> "BsBox":
        j = _exact_log(N, m)
        return cls(Fraction(0), Fraction(N), MadicBall(MadicRational.zero(m), 0), 0, j)


def _exact_log(N: int, m: int) -> int:
    j = round(math.log(N) / math.log(m))
    if m**j != N:
        raise ValueError(f"{N} is not a power of {m}")
    return j


def count_congruent_in_range(x0: Fraction, x1: Fraction, offset: Fraction, modulus: Fraction) -> int:
    """#{ z = offset + modulus*s, s integer, z in [x0, x1) } exactly."""
    if modulus <= 0:
        raise ValueError("modulus must be positive")
    lo = (x0 - offset) / modulus
    hi = (x1 - offset) / modulus
    s_lo = -((-lo.numerator) // lo.denominator)  # ceil(lo)
    s_hi = -((-hi.numerator) // hi.denominator)  # ceil(hi)
    return max(0, s_hi - s_lo)


def _height_congruence(ball: MadicBall, t: int):
    """(offset, modulus) of the x-congruence at height t, or None if empty.

    A model point (z, t) lies over the ball iff its truncated y coordinate
    z mod m^t lands in the ball; for t >= j this is z = c (mod m^j), for
    t < j it forces the single class z = (c mod m^j) (mod m^t), feasible
    only when the reduced center fits below m^t.
    """
    m = ball.m
    gamma = ball.center.reduce_mod(ball.j).as_fraction()
    if t >= ball.j:
        return gamma, Fraction(m) ** ball.j
    if gamma >= Fraction(m) ** t:
        return None
    return gamma, Fraction(m) ** t


def bs_box_count(box: BsBox, m: int) -> int:
    """Exact |BS(1,m) ∩ box| via per-height congruence counting."""
    if box.ball.m != m:
        raise ValueError(f"ball base {box.ball.m} != m={m}")
    total = 0
    for t in range(box.t0, box.t1):
        cong = _height_congruence(box.ball, t)
        if cong is None:
            continue
        offset, modulus = cong
        total += count_congruent_in_range(box.x0, box.x1, offset, modulus)
    return total


def enumerate_bs(box: BsBox, m: int, limit: int = ENUMERATION_LIMIT) -> List[BsPoint]:
    """Materialize the BS(1,m) points of a box (canonical y truncation)."""
    n = bs_box_count(box, m)
    if n > limit:
        raise ResourceLimitError(f"box holds {n} BS points (> {limit})")
    out: List[BsPoint] = []
    for t in range(box.t0, box.t1):
        cong = _height_congruence(box.ball, t)
        if cong is None:
            continue
        offset, modulus = cong
        lo = (box.x0 - offset) / modulus
        s_lo = -((-lo.numerator) // lo.denominator)
        s = s_lo
        while offset + modulus * s < box.x1:
            z = MadicRational.from_fraction(offset + modulus * s, m)
            out.append(BsPoint.from_group(z, t))
            s += 1
    return out


# ---------------------------------------------------------------------------
# Delone constants
# ---------------------------------------------------------------------------


@dataclass
class DeloneSet:
    """Finite window of a candidate Delone set with its verified constants."""

    points: np.ndarray
    provenance: list
    discreteness: float
    covering_radius: float
    region: Optional[SolBox] = None
    snap_moves: Optional[np.ndarray] = None


def delone_constants(
    points: np.ndarray,
    region: SolBox,
    ambient: np.ndarray,
    interior_margin: Optional[float] = None,
) -> Tuple[float, float]:
    """(discreteness, covering radius) of a point set on a bounded region.

    covering radius = max over ambient points in the region of the distance
    to the set; discreteness = min pairwise distance among set points in the
    region shrunk by ``interior_margin`` (default: the covering radius, so
    edge effects of the finite window cannot fake a large minimum).
    """
    points = np.asarray(points, dtype=float)
    if points.shape[0] < 2:
        raise ValueError("degenerate input: need at least two points")
    amb = np.asarray(ambient, dtype=float)
    inside = (
        (amb[:, 0] >= region.x0) & (amb[:, 0] < region.x1)
        & (amb[:, 1] >= region.y0) & (amb[:, 1] < region.y1)
        & (amb[:, 2] >= region.t0) & (amb[:, 2] < region.t1)
    )
    if not inside.any():
        raise ValueError("no ambient points in region")
    cover = _kernels.covering_radius(amb[inside], points)
    margin = cover if interior_margin is None else interior_margin
    # interior restriction: keep points that stay in the region under the
    # margin in each coordinate at their own height scale
    ex = np.exp(points[:, 2])
    keep = (
        (points[:, 0] >= region.x0 + margin * np.minimum(ex, (region.x1 - region.x0) / 4))
        & (points[:, 0] <= region.x1 - margin * np.minimum(ex, (region.x1 - region.x0) / 4))
        & (points[:, 2] >= region.t0)
        & (points[:, 2] < region.t1)
    )
    pool = points[keep] if keep.sum() >= 2 else points
    disc = _kernels.min_pairwise_dist(pool)
    return float(disc), float(cover)
