"""Exact arithmetic in Z[1/m], m-adic balls, and the BS(1,m) coordinate model.

A MadicRational is mantissa * m^exponent in canonical form (m does not divide
the mantissa unless the value is zero), so the m-adic valuation is literally
the stored exponent and all arithmetic stays in exact integers.  The same
rational is read two ways on the coordinate model R x Q_m x R of BS(1,m):
as a real in the first factor and m-adically in the second.

BiLipschitz self-maps of Q_m are modelled by :class:`CylinderMap`: the unit
ball splits into its depth-d cylinders and each cylinder maps affinely
y -> b_c + u_c m^{k_c} (y - c) with u_c a unit mod m.  This family is closed
under the ball-image decomposition used by the volume-stretch estimates and
covers every map the test-suite needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

__all__ = [
    "MadicRational",
    "BsPoint",
    "MadicBall",
    "unit_ball",
    "CylinderMap",
    "BaseMismatchError",
    "ModelViolationError",
    "madic_valuation",
    "madic_dist",
    "bs_dist",
    "ball_decompose_image",
]


class BaseMismatchError(ValueError):
    """Mixed m-adic bases in one computation (inconsistent model)."""


class ModelViolationError(RuntimeError):
    """A claimed cylinder-map property failed on explicit data."""


@dataclass(frozen=True)
class MadicRational:
    """Canonical mantissa * m^exponent element of Z[1/m]."""

    mantissa: int
    exponent: int
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"base must be >= 2, got {self.m}")
        mant, exp = self.mantissa, self.exponent
        if mant == 0:
            mant, exp = 0, 0
        else:
            while mant % self.m == 0:
                mant //= self.m
                exp += 1
        object.__setattr__(self, "mantissa", mant)
        object.__setattr__(self, "exponent", exp)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_int(cls, value: int, m: int) -> "MadicRational":
        return cls(value, 0, m)

    @classmethod
    def from_fraction(cls, value: Fraction, m: int) -> "MadicRational":
        """Exact conversion; the denominator must divide a power of m."""
        value = Fraction(value)
        den = value.denominator
        k = 0
        rest = den
        while rest > 1:
            g = math.gcd(rest, m)
            if g == 1:
                raise ValueError(f"{value} is not in Z[1/{m}]")
            while rest % g == 0:
                rest //= g
        while (m**k) % den != 0:
            k += 1
        return cls(value.numerator * ((m**k) // den), -k, m)

    @classmethod
    def zero(cls, m: int) -> "MadicRational":
        return cls(0, 0, m)

    # -- views -------------------------------------------------------------

    def as_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa * self.m**self.exponent)
        return Fraction(self.mantissa, self.m ** (-self.exponent))

    def as_float(self) -> float:
        return float(self.as_fraction())

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    def __str__(self) -> str:
        return f"{self.mantissa}*{self.m}^{self.exponent}"

    @classmethod
    def parse(cls, text: str, m: Optional[int] = None) -> "MadicRational":
        """Inverse of str(): 'mantissa*m^exponent'."""
        mant_s, rest = text.split("*")
        base_s, exp_s = rest.split("^")
        base = int(base_s)
        if m is not None and base != m:
            raise BaseMismatchError(f"expected base {m}, got {base}")
        return cls(int(mant_s), int(exp_s), base)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "MadicRational"):
        if self.m != other.m:
            raise BaseMismatchError(f"bases differ: {self.m} vs {other.m}")

    def __add__(self, other: "MadicRational") -> "MadicRational":
        self._check(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        e = min(self.exponent, other.exponent)
        mant = self.mantissa * self.m ** (self.exponent - e) + other.mantissa * self.m ** (
            other.exponent - e
        )
        return MadicRational(mant, e, self.m)

    def __neg__(self) -> "MadicRational":
        return MadicRational(-self.mantissa, self.exponent, self.m)

    def __sub__(self, other: "MadicRational") -> "MadicRational":
        return self + (-other)

    def __mul__(self, other: "MadicRational") -> "MadicRational":
        self._check(other)
        return MadicRational(self.mantissa * other.mantissa, self.exponent + other.exponent, self.m)

    def reduce_mod(self, j: int) -> "MadicRational":
        """Representative in [0, m^j) congruent to self modulo m^j (digits < j)."""
        q = self.as_fraction() / Fraction(self.m) ** j
        r = self.as_fraction() - (q.numerator // q.denominator) * Fraction(self.m) ** j
        return MadicRational.from_fraction(r, self.m)


def madic_valuation(q: MadicRational) -> float:
    """Canonical-form exponent; +inf for zero."""
    return math.inf if q.is_zero else float(q.exponent)


def madic_dist(y1: MadicRational, y2: MadicRational) -> float:
    """Ultrametric m^{-v(y1-y2)} on Q_m."""
    if y1.m != y2.m:
        raise BaseMismatchError(f"bases differ: {y1.m} vs {y2.m}")
    diff = y1 - y2
    if diff.is_zero:
        return 0.0
    return float(y1.m) ** (-diff.exponent)


@dataclass(frozen=True)
class BsPoint:
    """Point of the coordinate model: x read as a real, y m-adically, t integer."""

    x: MadicRational
    y: MadicRational
    t: int

    def __post_init__(self):
        if self.x.m != self.y.m:
            raise BaseMismatchError(f"bases differ: {self.x.m} vs {self.y.m}")

    @property
    def m(self) -> int:
        return self.x.m

    @classmethod
    def from_group(cls, z: MadicRational, t: int) -> "BsPoint":
        """Image of the group element (z, t) under the canonical section:
        the y coordinate keeps only the digits of z below height t."""
        return cls(z, z.reduce_mod(t), t)


def bs_dist(p: BsPoint, q: BsPoint) -> float:
    """Quasi-metric on the coordinate model of BS(1,m)."""
    if p.m != q.m:
        raise BaseMismatchError(f"bases differ: {p.m} vs {q.m}")
    m = float(p.m)
    half = 0.5 * (p.t + q.t)
    dx = abs((p.x - q.x).as_float())
    return m ** (-half) * dx + m**half * madic_dist(p.y, q.y) + abs(p.t - q.t)


@dataclass(frozen=True)
class MadicBall:
    """Ball of radius exactly m^{-j} around center in Q_m."""

    center: MadicRational
    j: int

    @property
    def m(self) -> int:
        return self.center.m

    @property
    def radius(self) -> float:
        return float(self.m) ** (-self.j)

    def canonical(self) -> "MadicBall":
        return MadicBall(self.center.reduce_mod(self.j), self.j)

    def contains(self, y: MadicRational) -> bool:
        return madic_valuation(y - self.center) >= self.j

    def __str__(self) -> str:
        return f"B({self.center}, {self.m}^-{self.j})"


def unit_ball(m: int) -> MadicBall:
    return MadicBall(MadicRational.zero(m), 0)


@dataclass(frozen=True)
class CylinderMap:
    """Piecewise-affine self-map of Q_m on the depth-d cylinders of B(0,1).

    pieces[c] = (b, u, k): the cylinder c + m^d Z_m maps to
    b + u m^k (y - c), i.e. onto the ball of radius m^{-(d+k)} around b.
    Units u must be coprime to m so each piece scales valuations by exactly k.
    """

    m: int
    depth: int
    pieces: Tuple[Tuple[MadicRational, int, int], ...]

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if len(self.pieces) != self.m**self.depth:
            raise ValueError(
                f"need {self.m ** self.depth} pieces for depth {self.depth}, got {len(self.pieces)}"
            )
        for b, u, k in self.pieces:
            if b.m != self.m:
                raise BaseMismatchError(f"piece offset base {b.m} != {self.m}")
            if math.gcd(u, self.m) != 1:
                raise ValueError(f"unit {u} is not coprime to {self.m}")

    # -- constructors --------------------------------------------------------

    @classmethod
    def identity(cls, m: int) -> "CylinderMap":
        return cls(m, 0, ((MadicRational.zero(m), 1, 0),))

    @classmethod
    def scale(cls, m: int, k: int, unit: int = 1) -> "CylinderMap":
        """y -> unit * m^k * y (k = 1 is 'multiplication by m')."""
        return cls(m, 0, ((MadicRational.zero(m), unit, k),))

    @classmethod
    def cylinder_permutation(cls, m: int, depth: int, perm) -> "CylinderMap":
        """Rearrange the depth-d cylinders by the permutation c -> perm[c]."""
        n = m**depth
        if sorted(perm) != list(range(n)):
            raise ValueError(f"not a permutation of 0..{n - 1}: {perm}")
        pieces = tuple((MadicRational.from_int(perm[c], m), 1, 0) for c in range(n))
        return cls(m, depth, pieces)

    # -- evaluation ----------------------------------------------------------

    def __call__(self, y: MadicRational) -> MadicRational:
        if y.m != self.m:
            raise BaseMismatchError(f"base {y.m} != {self.m}")
        if madic_valuation(y) < 0:
            raise ValueError("cylinder maps are defined on the unit ball only")
        md = self.m**self.depth
        c = int(y.as_fraction()) % md if y.exponent >= 0 else None
        if c is None:
            raise ValueError("not an integer representative")
        b, u, k = self.pieces[c]
        delta = y - MadicRational.from_int(c, self.m)
        step = MadicRational(u, k, self.m)
        return b + step * delta

    def image_balls(self) -> List[MadicBall]:
        """Image of each depth-d cylinder of B(0,1), as balls b_c + m^{d+k_c} Z_m."""
        md = self.m**self.depth
        out = []
        for c in range(md):
            b, u, k = self.pieces[c]
            out.append(MadicBall(b, self.depth + k))
        return out

    def congruence_classes(self) -> List[Tuple[int, Fraction, int]]:
        """(cylinder prefix, image offset as Fraction, image modulus exponent)."""
        out = []
        for c in range(self.m**self.depth):
            b, u, k = self.pieces[c]
            out.append((c, b.as_fraction(), self.depth + k))
        return out


def _bilipschitz_check(f: CylinderMap, L: float, sample_depth: int) -> None:
    """Exhaustive two-point check of the claimed constant on digit prefixes."""
    m = f.m
    reps = [MadicRational.from_int(z, m) for z in range(m**sample_depth)]
    imgs = [f(y) for y in reps]
    n = len(reps)
    for i in range(n):
        for j in range(i + 1, n):
            d0 = madic_dist(reps[i], reps[j])
            d1 = madic_dist(imgs[i], imgs[j])
            if d1 > L * d0 + 1e-12 or d1 < d0 / L - 1e-12:
                raise ModelViolationError(
                    f"map is not {L}-biLipschitz on prefixes: "
                    f"d({reps[i]},{reps[j]})={d0}, image distance {d1}"
                )


def ball_decompose_image(f: CylinderMap, ball: MadicBall, L: float) -> List[MadicBall]:
    """Decompose f(B(0,1)) into disjoint equal-radius balls A_i.

    The common radius is m^{-j} with j the largest image-cylinder depth
    (clipped at radius 1); larger image balls are split into m-adic children.
    Raises ModelViolationError when the pieces overlap, when the claimed L
    fails on sampled digit prefixes, or when the count |I| leaves the window
    m^j / L <= |I| <= L^3.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if ball.j != 0 or not ball.center.is_zero:
        raise ValueError("decomposition is defined for the unit ball B(0,1)")
    m = f.m
    sample_depth = min(f.depth + 2, max(2, f.depth), 9)
    if m**sample_depth > 4096:
        sample_depth = max(1, int(math.log(4096, m)))
    _bilipschitz_check(f, L, sample_depth)

    raw = f.image_balls()
    j = max(0, max(b.j for b in raw))
    centers: Dict[Fraction, MadicBall] = {}
    for b in raw:
        split = m ** (j - b.j)
        base = b.center
        for s in range(split):
            child = MadicBall(base + MadicRational(s, b.j, m), j).canonical()
            key = child.center.as_fraction()
            if key in centers:
                raise ModelViolationError(f"image balls overlap at {child}")
            centers[key] = child
    balls = [centers[k] for k in sorted(centers)]
    count = len(balls)
    if count > L**3 + 1e-9 or count < m**j / L - 1e-9:
        raise ModelViolationError(
            f"|I|={count} outside [m^j/L, L^3] = [{m ** j / L}, {L ** 3}] for j={j}"
        )
    return balls
