"""Ambient geometries: the SOL group, higher-rank analogues and their constants.

SOL is R^2 x| R with coordinates (x, y, t); the R-action expands x by e^t and
contracts y by e^{-t}.  All distance computations in the package use the
horospherical quasi-metric

    d(p, q) = e^{-(t1+t2)/2} |x1-x2| + e^{(t1+t2)/2} |y1-y2| + |t1-t2|

which is quasi-isometric to the left-invariant Riemannian metric.  It is
symmetric and vanishes exactly on the diagonal, but it is *not* a metric:
the triangle inequality fails once intermediate points may change height
(see tests for an explicit witness).  On a fixed-height slice it restricts
to a weighted L1 metric.

Higher-rank group data is carried by :class:`HRSpec`: n positive roots
a_1..a_n acting diagonally on R^{n+1}, with the forced last root
a_{n+1} = 0 in box coordinates (the determinant-one condition is absorbed
into the coordinate normalization, matching the box volume formulas).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

__all__ = [
    "SolPoint",
    "SOL_IDENTITY",
    "sol_mul",
    "sol_inv",
    "sol_dist",
    "SolSpec",
    "HRSpec",
    "BSSpec",
    "QIParams",
    "even_scaling_witness",
]

#: global tolerance for geometric predicates (counting stays exact elsewhere)
GEOM_TOL = 1e-9


@dataclass(frozen=True)
class SolPoint:
    """A point of SOL in (x, y, t) coordinates."""

    x: float
    y: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.t)):
            raise ValueError(f"non-finite SOL coordinates: {(self.x, self.y, self.t)}")

    def __iter__(self):
        yield self.x
        yield self.y
        yield self.t


SOL_IDENTITY = SolPoint(0.0, 0.0, 0.0)


def sol_mul(p: SolPoint, q: SolPoint) -> SolPoint:
    """Group law: (x1,y1,t1)*(x2,y2,t2) = (x1 + e^{t1} x2, y1 + e^{-t1} y2, t1+t2)."""
    et = math.exp(p.t)
    return SolPoint(p.x + et * q.x, p.y + q.y / et, p.t + q.t)


def sol_inv(p: SolPoint) -> SolPoint:
    """Group inverse: the unique q with p*q = identity."""
    et = math.exp(p.t)
    return SolPoint(-p.x / et, -p.y * et, -p.t)


def sol_dist(p: SolPoint, q: SolPoint) -> float:
    """Horospherical quasi-metric on SOL (symmetric, zero iff equal)."""
    half = 0.5 * (p.t + q.t)
    return (
        math.exp(-half) * abs(p.x - q.x)
        + math.exp(half) * abs(p.y - q.y)
        + abs(p.t - q.t)
    )


@dataclass(frozen=True)
class SolSpec:
    """Marker spec for the rank-one SOL geometry."""

    kind: str = field(default="SOL", init=False)


@dataclass(frozen=True)
class HRSpec:
    """Higher-rank abelian-by-abelian group R^{n+1} x| R^n.

    roots holds the n positive weights a_i (root i acts on coordinate x_i as
    e^{a_i t_i}); the last coordinate x_{n+1} carries the balancing root
    -(a_1 t_1 + ... + a_n t_n), which in box coordinates contributes weight
    a_{n+1} = 0.

    Even-scaling specs are built through :meth:`from_even_integers`, which
    stores a_i = log(N_i)/tstar so that e^{a_i tstar} = N_i holds exactly at
    the integer level.  Specs built from free reals have no witness and are
    accepted for volume formulas only.
    """

    roots: tuple
    even_integers: Optional[tuple] = None
    tstar: Optional[float] = None

    def __post_init__(self):
        if len(self.roots) == 0:
            raise ValueError("HR spec needs at least one root")
        if any(a <= 0 for a in self.roots):
            raise ValueError(f"HR roots must be positive: {self.roots}")
        if self.even_integers is not None:
            if self.tstar is None or self.tstar <= 0:
                raise ValueError("even-scaling witness requires tstar > 0")
            for N in self.even_integers:
                if N < 2 or N % 2 != 0:
                    raise ValueError(f"even-scaling integers must be even and >= 2: {N}")

    @property
    def kind(self) -> str:
        return "HR"

    @property
    def n(self) -> int:
        return len(self.roots)

    @classmethod
    def from_even_integers(cls, even_integers: Sequence[int], tstar: float = 1.0) -> "HRSpec":
        """Build an even-scaling spec with a_i = log(N_i)/tstar (N_i even)."""
        Ns = tuple(int(N) for N in even_integers)
        roots = tuple(math.log(N) / tstar for N in Ns)
        return cls(roots=roots, even_integers=Ns, tstar=float(tstar))

    @classmethod
    def from_roots(cls, roots: Sequence[float]) -> "HRSpec":
        """Free-real roots, no even-scaling witness (volume formulas only)."""
        return cls(roots=tuple(float(a) for a in roots))

    def alpha(self, j: int, tvec: Sequence[float]) -> float:
        """Root functional alpha_j(t); j is 1-based, j = n+1 gives -sum a_i t_i."""
        if 1 <= j <= self.n:
            return self.roots[j - 1] * tvec[j - 1]
        if j == self.n + 1:
            return -sum(a * t for a, t in zip(self.roots, tvec))
        raise IndexError(f"root index {j} out of range 1..{self.n + 1}")

    def box_weights(self, r: float) -> list:
        """Edge lengths e^{r a_j} of the box B(r*Omega), j = 1..n+1 (a_{n+1} = 0)."""
        return [math.exp(r * a) for a in self.roots] + [1.0]

    def scale_factors(self, t: float) -> list:
        """Integer tile multiplicities e^{a_i t} when t is a multiple of tstar."""
        if self.even_integers is None:
            raise ValueError("spec has no even-scaling witness")
        k = t / self.tstar
        ki = round(k)
        if abs(k - ki) > GEOM_TOL:
            raise ValueError(f"t={t} is not a multiple of the witness tstar={self.tstar}")
        return [N ** ki for N in self.even_integers]


@dataclass(frozen=True)
class BSSpec:
    """Solvable Baumslag-Solitar group BS(1,m) = <t,a | tat^-1 = a^m>."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"BS(1,m) requires m >= 2, got {self.m}")

    @property
    def kind(self) -> str:
        return "BS"


@dataclass(frozen=True)
class QIParams:
    """Quasi-isometry constants: K-biLipschitz map, additive C, companion
    biLipschitz constant L, companion distance A, and D = diam(G/Gamma)."""

    K: float = 1.0
    C: float = 0.0
    L: float = 1.0
    A: float = 0.0
    D: float = 0.0

    def __post_init__(self):
        if self.K < 1 or self.L < 1:
            raise ValueError("K and L must be >= 1")
        if self.C < 0 or self.A < 0 or self.D < 0:
            raise ValueError("C, A, D must be nonnegative")


# beyond this magnitude float spacing exceeds the witness tolerance, so a
# "hit" would be indistinguishable from rounding; such values are rejected
_WITNESS_VALUE_CAP = 2.0**20


def _near_even_integer(v: float, tol: float) -> bool:
    if v < 2.0 - tol or v > _WITNESS_VALUE_CAP:
        return False
    k = 2.0 * round(v / 2.0)
    return abs(v - k) <= tol


def even_scaling_witness(
    roots: Sequence[float],
    t_max: float,
    tol: float = GEOM_TOL,
    max_candidates: int = 200_000,
) -> Optional[float]:
    """Smallest t <= t_max with e^{a_i t} an even integer for every root.

    Candidates are generated from the first root (t = log(2k)/a_1) and checked
    against the others within ``tol``; values beyond 2^52 are rejected as not
    exactly representable.  Returns None when no witness is found among the
    first ``max_candidates`` candidates -- absence is a value, not an error.
    """
    roots = [float(a) for a in roots]
    if not roots or any(a <= 0 for a in roots):
        raise ValueError("roots must be positive")
    a1 = roots[0]
    # candidate count limited both by t_max and by the enumeration cap
    k_hi = math.floor(math.exp(a1 * t_max) / 2.0)
    k_hi = min(k_hi, max_candidates)
    for k in range(1, k_hi + 1):
        t = math.log(2 * k) / a1
        if t > t_max + tol:
            break
        if all(_near_even_integer(math.exp(a * t), tol) for a in roots):
            return t
    return None
