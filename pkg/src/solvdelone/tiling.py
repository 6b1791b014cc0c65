"""Substitution tilings and the Delone set construction.

The engine has two independent layers:

* exact counting -- the tile populations |Q_j^m| follow a two-layer
  recursion (layer 1 alternates the d1/d2 tiles along the expanding axis,
  layer 2 repeats the d3/d4 tile), kept in exact integer/Fraction
  arithmetic so the density identities |Q_j^m| = d_j |Q_0^m| are checked
  with no rounding at any depth;

* materialization -- tile addresses with composed group translates are
  expanded only at small depth, populated with the chosen basic-tile
  points, and snapped into the lattice to produce a verifiable Delone set.

Basic-tile points are the lexicographically first n lattice points of
S_{N0} at quasi-distance >= C from the box boundary; since the quasi-metric
is exactly left-invariant, the margin survives every group translate and
snapped images stay inside their own half-open tiles.

For odd m in BS(1,m) every scale has an odd number of layer-1 tiles; one
layer-2 tile per level is replaced by a corrected tile of density
d3 + (d2-d1)/2 (resp. d4 + (d2-d1)/2), which restores the exact density
identity (1/3 resp. 2/3 for the reference profile).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import boxgeom
from .geometry import HRSpec, SolPoint, sol_dist, sol_mul, SOL_IDENTITY
from .lattice import (
    BsBox,
    ConstantViolationError,
    DeloneSet,
    LatticePointSet,
    LatticeSpec,
    SolBox,
    delone_constants,
    enumerate_sol_lattice,
    snap,
)
from .madic import BsPoint, MadicBall, MadicRational

__all__ = [
    "DensityProfile",
    "profile_identities_hold",
    "verify_density_identities",
    "hr_color_counts",
    "TileAddress",
    "HrTileAddress",
    "BsTileAddress",
    "SolTilingConfig",
    "BsTilingConfig",
    "ConfigError",
    "decompose_sol",
    "assign_types_sol",
    "decompose_hr",
    "decompose_bs",
    "sol_tile_counts",
    "bs_tile_counts",
    "hr_tile_counts",
    "sol_tile_tree",
    "base_tile_points",
    "min_feasible_n0",
    "build_delone",
]

MATERIALIZE_LEAF_LIMIT = 2_000_000


class ConfigError(ValueError):
    """Tiling configuration violates a structural constraint."""


# ---------------------------------------------------------------------------
# density profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityProfile:
    """Exact rational densities d1 < d2 with the forced d3, d4 companions."""

    d1: Fraction
    d2: Fraction
    n: int

    def __post_init__(self):
        d1, d2 = Fraction(self.d1), Fraction(self.d2)
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", d2)
        d3, d4 = self.d3, self.d4
        if not (0 < d3 < d1 < d2 < d4 <= 1):
            raise ConfigError(f"need 0 < d3 < d1 < d2 < d4 <= 1, got {(d3, d1, d2, d4)}")
        for j, d in enumerate((d1, d2, d3, d4), start=1):
            if (d * self.n).denominator != 1:
                raise ConfigError(f"d{j} * n = {d * self.n} is not an integer")

    @property
    def d3(self) -> Fraction:
        return (3 * self.d1 - self.d2) / 2

    @property
    def d4(self) -> Fraction:
        return (3 * self.d2 - self.d1) / 2

    @property
    def corrected3(self) -> Fraction:
        """Layer-2 replacement density for odd-m BS levels (1/3 for the
        reference profile)."""
        return self.d3 + (self.d2 - self.d1) / 2

    @property
    def corrected4(self) -> Fraction:
        return self.d4 + (self.d2 - self.d1) / 2

    def densities(self) -> Dict[str, Fraction]:
        return {"Q0": Fraction(1), "Q1": self.d1, "Q2": self.d2, "Q3": self.d3, "Q4": self.d4}

    def tile_size(self, tile_type: str) -> int:
        d = {
            "Q0": Fraction(1),
            "Q1": self.d1,
            "Q2": self.d2,
            "Q3": self.d3,
            "Q4": self.d4,
            "C3": self.corrected3,
            "C4": self.corrected4,
        }[tile_type]
        v = d * self.n
        if v.denominator != 1:
            raise ConfigError(f"{tile_type} size {v} is not integral for n={self.n}")
        return int(v)

    @classmethod
    def reference(cls, n: int = 12) -> "DensityProfile":
        """The worked profile (1/3, 1/2, 1/4, 7/12)."""
        return cls(Fraction(1, 3), Fraction(1, 2), n)


def profile_identities_hold(p: DensityProfile) -> bool:
    """The two exact constraints (d1/2 + d2/2 + d_{3,4})/2 = d_{1,2}."""
    lhs1 = (p.d1 / 2 + p.d2 / 2 + p.d3) / 2
    lhs2 = (p.d1 / 2 + p.d2 / 2 + p.d4) / 2
    return lhs1 == p.d1 and lhs2 == p.d2


# ---------------------------------------------------------------------------
# one-level decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TileAddress:
    """A tile of a SOL decomposition: per-level (layer, k) path, composed
    group translate, coordinate box, and (after assignment) the tile type."""

    levels: Tuple[Tuple[int, int], ...]
    translate: SolPoint
    box: SolBox
    tile_type: Optional[str] = None

    def path(self) -> str:
        return ".".join(f"({i}:{k})" for i, k in self.levels)

    def with_type(self, tile_type: str) -> "TileAddress":
        return TileAddress(self.levels, self.translate, self.box, tile_type)


def decompose_sol(N: float) -> List[TileAddress]:
    """The 2N translates of S_N tiling S_{N^2} (layer 1 along x, layer 2 up)."""
    if N <= 1:
        raise ValueError("need N > 1")
    if abs(N - round(N)) > 1e-9:
        raise ValueError(f"N must be an integer, got {N}")
    N = int(round(N))
    base = SolBox.s_n(N)
    out = []
    for k in range(1, N + 1):
        g = SolPoint((k - 1) * N, 0.0, 0.0)
        out.append(TileAddress(((1, k),), g, base.translate(g)))
    logN = math.log(N)
    for k in range(1, N + 1):
        g = SolPoint(0.0, (k - 1) / N, logN)
        out.append(TileAddress(((2, k),), g, base.translate(g)))
    return out


def assign_types_sol(addresses: Sequence[TileAddress], target: str) -> List[TileAddress]:
    """Assign child tile types for building the ``target`` variant.

    Q1/Q2: layer-1 children alternate Q1 (k odd) / Q2 (k even); layer-2
    children all carry Q3 (target Q1) or Q4 (target Q2).  Q3/Q4/Q0
    propagate unchanged.
    """
    if target not in ("Q0", "Q1", "Q2", "Q3", "Q4"):
        raise ValueError(f"unknown target {target}")
    out = []
    for addr in addresses:
        layer, k = addr.levels[-1]
        if target in ("Q0", "Q3", "Q4"):
            tt = target
        elif layer == 1:
            tt = "Q1" if k % 2 == 1 else "Q2"
        else:
            tt = "Q3" if target == "Q1" else "Q4"
        out.append(addr.with_type(tt))
    return out


def _child_type(parent: str, layer: int, k: int, corrected: bool) -> str:
    if parent in ("Q0", "Q3", "Q4", "C3", "C4"):
        return parent
    if layer == 1:
        return "Q1" if k % 2 == 1 else "Q2"
    base = "Q3" if parent == "Q1" else "Q4"
    if corrected:
        return "C3" if parent == "Q1" else "C4"
    return base


# -- higher rank -------------------------------------------------------------


@dataclass(frozen=True)
class HrTileAddress:
    """Sub-cube (which t-axes sit in the upper half) plus per-axis slots."""

    upper: Tuple[bool, ...]
    slots: Tuple[int, ...]      # x_i slot for i <= n (0 when upper), then x_{n+1} slot
    color: str
    tile_type: Optional[str] = None


def decompose_hr(spec: HRSpec, level_t: float) -> List[HrTileAddress]:
    """Tiles of S_{2t} by translates of S_t with the red/blue/green coloring.

    Requires an even-scaling witness so the per-axis multiplicities
    e^{a_i t} are exact even integers.  Colors: red/blue for tiles whose
    first axis sits at an even/odd horizontal slot in the lower half,
    green for tiles with the first t-axis in the upper half.
    """
    if spec.even_integers is None:
        raise ConfigError("HR decomposition needs an even-scaling witness")
    Ns = spec.scale_factors(level_t)
    n = spec.n
    out = []
    for mask in range(2**n):
        upper = tuple(bool(mask >> i & 1) for i in range(n))
        lower_axes = [i for i in range(n) if not upper[i]]
        upper_axes = [i for i in range(n) if upper[i]]
        # slot ranges: N_i options per lower axis, prod of upper N_i for x_{n+1}
        last_slots = 1
        for i in upper_axes:
            last_slots *= Ns[i]
        ranges = [range(Ns[i]) if not upper[i] else range(1) for i in range(n)]
        ranges.append(range(last_slots))

        def rec(i, acc):
            if i == len(ranges):
                slots = tuple(acc)
                if upper[0]:
                    color = "green"
                elif slots[0] % 2 == 0:
                    color = "red"
                else:
                    color = "blue"
                out.append(HrTileAddress(upper, slots, color))
                return
            for v in ranges[i]:
                rec(i + 1, acc + [v])

        rec(0, [])
    return out


def hr_color_counts(spec: HRSpec, level_t: float) -> Dict[str, int]:
    tiles = decompose_hr(spec, level_t)
    counts = {"red": 0, "blue": 0, "green": 0}
    for t in tiles:
        counts[t.color] += 1
    return counts


# -- Baumslag-Solitar ---------------------------------------------------------


@dataclass(frozen=True)
class BsTileAddress:
    layer: int
    k: int
    translate_z: MadicRational  # group element (z, t)
    translate_t: int
    box: BsBox
    tile_type: Optional[str] = None


def decompose_bs(N: int, m: int) -> List[BsTileAddress]:
    """2N translates of S_N tiling S_{N^2} in the BS(1,m) model.

    Layer 2 is indexed by the N digit vectors z_k of length log_m N; its
    printed boxes use equal-depth sub-balls B(z_k, 1/N), which partition
    B(0,1) exactly.
    """
    j = round(math.log(N) / math.log(m))
    if m**j != N:
        raise ValueError(f"N={N} is not a power of m={m}")
    out = []
    for k in range(1, N + 1):
        z = MadicRational.from_int((k - 1) * N, m)
        box = BsBox(
            Fraction((k - 1) * N),
            Fraction(k * N),
            MadicBall(MadicRational.zero(m), 0),
            0,
            j,
        )
        out.append(BsTileAddress(1, k, z, 0, box))
    for k in range(1, N + 1):
        zk = MadicRational.from_int(k - 1, m)  # digit vectors enumerate 0..N-1
        box = BsBox(Fraction(0), Fraction(N * N), MadicBall(zk, j), j, 2 * j)
        out.append(BsTileAddress(2, k, zk, j, box))
    return out


# ---------------------------------------------------------------------------
# exact tile-count recursions
# ---------------------------------------------------------------------------

_TYPES = ("Q0", "Q1", "Q2", "Q3", "Q4")


def _level_step(counts: Dict[str, int], M: int, profile: DensityProfile, odd_ok: bool) -> Dict[str, int]:
    """One substitution level with M layer-1 and M layer-2 child tiles."""
    odd = M % 2 == 1
    if odd and not odd_ok:
        raise ConfigError(f"layer count M={M} must be even for this geometry")
    n_odd = (M + 1) // 2  # k odd among 1..M
    n_even = M // 2
    nxt: Dict[str, int] = {}
    nxt["Q0"] = 2 * M * counts["Q0"]
    nxt["Q3"] = 2 * M * counts["Q3"]
    nxt["Q4"] = 2 * M * counts["Q4"]
    if "C3" in counts:
        nxt["C3"] = 2 * M * counts["C3"]
        nxt["C4"] = 2 * M * counts["C4"]
    layer1 = n_odd * counts["Q1"] + n_even * counts["Q2"]
    if odd:
        nxt["Q1"] = layer1 + (M - 1) * counts["Q3"] + counts["C3"]
        nxt["Q2"] = layer1 + (M - 1) * counts["Q4"] + counts["C4"]
    else:
        nxt["Q1"] = layer1 + M * counts["Q3"]
        nxt["Q2"] = layer1 + M * counts["Q4"]
    return nxt


def _base_counts(profile: DensityProfile, with_corrected: bool) -> Dict[str, int]:
    base = {t: profile.tile_size(t) for t in _TYPES}
    if with_corrected:
        base["C3"] = profile.tile_size("C3")
        base["C4"] = profile.tile_size("C4")
    return base


def sol_tile_counts(profile: DensityProfile, N0: int, depth: int) -> Dict[str, int]:
    """|Q_j^depth| for the SOL tiling with base scale N0 (even)."""
    if N0 % 2 != 0 or N0 < 2:
        raise ConfigError(f"N0 must be an even integer >= 2, got {N0}")
    counts = _base_counts(profile, with_corrected=False)
    M = N0
    for _ in range(depth):
        counts = _level_step(counts, M, profile, odd_ok=False)
        M = M * M
    return counts


def bs_tile_counts(profile: DensityProfile, N0: int, m: int, depth: int) -> Dict[str, int]:
    """|Q_j^depth| for BS(1,m); odd m engages the corrected layer-2 tile."""
    j = round(math.log(N0) / math.log(m))
    if m**j != N0:
        raise ConfigError(f"N0={N0} must be a power of m={m}")
    counts = _base_counts(profile, with_corrected=True)
    M = N0
    for _ in range(depth):
        counts = _level_step(counts, M, profile, odd_ok=True)
        M = M * M
    return counts


def hr_tile_counts(profile: DensityProfile, spec: HRSpec, depth: int) -> Dict[str, int]:
    """|Q_j^depth| for the HR coloring recursion (quarter red, quarter blue,
    half green at every level)."""
    if spec.even_integers is None:
        raise ConfigError("HR counts need an even-scaling witness")
    counts = _base_counts(profile, with_corrected=False)
    scale = 1
    for level in range(depth):
        prodN = 1
        for N in spec.even_integers:
            prodN *= N**scale
        T = 2**spec.n * prodN
        if T % 4 != 0:
            raise ConfigError(f"tile count {T} not divisible by 4")
        nxt = {
            "Q0": T * counts["Q0"],
            "Q3": T * counts["Q3"],
            "Q4": T * counts["Q4"],
            "Q1": (T // 4) * (counts["Q1"] + counts["Q2"]) + (T // 2) * counts["Q3"],
            "Q2": (T // 4) * (counts["Q1"] + counts["Q2"]) + (T // 2) * counts["Q4"],
        }
        counts = nxt
        scale *= 2
    return counts


def verify_density_identities(counts: Dict[str, int], profile: DensityProfile) -> bool:
    """Exact check |Q_j| = d_j |Q_0| for j = 1..4 (Fractions, no rounding)."""
    total = counts["Q0"]
    dens = profile.densities()
    return all(Fraction(counts[t]) == dens[t] * total for t in ("Q1", "Q2", "Q3", "Q4"))


# ---------------------------------------------------------------------------
# SOL tile tree and materialization
# ---------------------------------------------------------------------------


def sol_tile_tree(
    N0: int,
    depth: int,
    target: str = "Q1",
    odd_corrections: bool = False,
    leaf_limit: int = MATERIALIZE_LEAF_LIMIT,
) -> List[TileAddress]:
    """All depth-``depth`` leaf tiles of S_{N0^{2^depth}} with composed
    translates and assigned base-tile types for the ``target`` variant."""
    if N0 % 2 != 0:
        raise ConfigError("N0 must be even")
    n_leaves = 2**depth * N0 ** (2**depth - 1)
    if n_leaves > leaf_limit:
        raise ConfigError(f"{n_leaves} leaves exceed the materialization limit {leaf_limit}")

    leaves = [TileAddress((), SOL_IDENTITY, SolBox.s_n(N0 ** (2**depth)), target)]
    scale = N0 ** (2 ** (depth - 1)) if depth > 0 else N0
    # expand from the top scale down; each level splits every tile into 2M
    scales = [N0 ** (2**lev) for lev in range(depth)]  # child scale at each split
    for lev in range(depth - 1, -1, -1):
        M = scales[lev]
        children = decompose_sol(M)
        nxt = []
        for parent in leaves:
            for addr in children:
                layer, k = addr.levels[0]
                tt = _child_type(parent.tile_type, layer, k, corrected=False)
                g = sol_mul(parent.translate, addr.translate)
                nxt.append(
                    TileAddress(
                        parent.levels + addr.levels,
                        g,
                        addr.box.translate(parent.translate),
                        tt,
                    )
                )
        leaves = nxt
    return leaves


def base_tile_points(
    lattice: LatticeSpec,
    N0: int,
    n: int,
    margin: Optional[float] = None,
    separation: Optional[float] = None,
) -> LatticePointSet:
    """First n admissible lattice points of S_{N0} in lexicographic (k, a, b)
    order.

    Admissible: quasi-distance >= margin (default C) from the box boundary,
    and pairwise separation > ``separation`` (default 2C) against the points
    already chosen.  The margin keeps every translated copy inside its own
    half-open tile after snapping; the separation keeps two copies of the
    same tile from sharing a nearest lattice point.
    """
    margin = lattice.C if margin is None else margin
    sep = 2.0 * lattice.C if separation is None else separation
    pts = enumerate_sol_lattice(SolBox.s_n(N0), lattice)
    if len(pts) == 0:
        raise ConfigError(f"S_{N0} contains no lattice points")
    box = SolBox.s_n(N0)
    m = boxgeom.interior_margin(pts.points[:, 0], pts.points[:, 1], pts.points[:, 2], box)
    keep = np.asarray(m) >= margin
    sel = LatticePointSet(pts.abk[keep], pts.points[keep], lattice).sorted_by_abk()
    chosen: List[int] = []
    for i in range(len(sel)):
        p = SolPoint(*sel.points[i])
        if all(sol_dist(p, SolPoint(*sel.points[j])) > sep for j in chosen):
            chosen.append(i)
        if len(chosen) == n:
            break
    if len(chosen) < n:
        raise ConfigError(
            f"S_{N0} holds only {len(chosen)} admissible lattice points "
            f"(margin >= {margin:.4f}, separation > {sep:.4f}; need {n}); increase N0"
        )
    idx = np.array(chosen)
    return LatticePointSet(sel.abk[idx], sel.points[idx], lattice)


def min_feasible_n0(lattice: LatticeSpec, n: int, start: int = 12, limit: int = 512) -> int:
    """Smallest even N0 whose margin-C interior holds n lattice points."""
    N0 = start + start % 2
    while N0 <= limit:
        try:
            base_tile_points(lattice, N0, n)
            return N0
        except ConfigError:
            N0 += 2
    raise ConfigError(f"no feasible N0 <= {limit} for n={n}")


@dataclass
class SolTilingConfig:
    lattice: LatticeSpec
    profile: DensityProfile
    N0: int
    depth: int
    n_blocks: int = 1
    margin: Optional[float] = None  # default: lattice.C

    def __post_init__(self):
        if self.N0 % 2 != 0:
            raise ConfigError("N0 must be even for the SOL tiling")
        if self.depth < 0 or self.depth > 4:
            raise ConfigError("depth must be in 0..4")


@dataclass
class BsTilingConfig:
    m: int
    profile: DensityProfile
    N0: int
    depth: int

    def __post_init__(self):
        j = round(math.log(self.N0) / math.log(self.m))
        if self.m**j != self.N0:
            raise ConfigError(f"N0={self.N0} must be a power of m={self.m}")


def build_delone(config: SolTilingConfig, collar: float = 0.0, verify: bool = True) -> DeloneSet:
    """Assemble the Delone set on the working region and snap it into Gamma.

    The working region is n_blocks super-tiles [0, n_blocks*M) x [0,1) x
    [0, log M) at scale M = N0^{2^depth}; block k carries the Q1 variant at
    even k and Q2 at odd k.  Points move by at most C under snapping; the
    snapped images must stay pairwise distinct or the construction aborts.
    """
    lattice = config.lattice
    M = config.N0 ** (2**config.depth)
    base = base_tile_points(lattice, config.N0, config.profile.n, config.margin)
    base_by_type: Dict[str, np.ndarray] = {}
    for tt in ("Q0", "Q1", "Q2", "Q3", "Q4"):
        base_by_type[tt] = base.points[: config.profile.tile_size(tt)]

    raw_pts: List[Tuple[float, float, float]] = []
    provenance: List[str] = []
    for kk in range(1, config.n_blocks + 1):
        variant = "Q1" if kk % 2 == 0 else "Q2"
        g_block = SolPoint((kk - 1) * float(M), 0.0, 0.0)
        leaves = sol_tile_tree(config.N0, config.depth, target=variant)
        for leaf in leaves:
            g = sol_mul(g_block, leaf.translate)
            et = math.exp(g.t)
            qs = base_by_type[leaf.tile_type]
            for q in qs:
                raw_pts.append((g.x + et * q[0], g.y + q[1] / et, g.t + q[2]))
                provenance.append(f"block{kk}." + leaf.path() + f".{leaf.tile_type}")

    # snap into the lattice, tracking moves and checking injectivity
    snapped_xyz = []
    moves = []
    seen = set()
    for (x, y, t) in raw_pts:
        g = SolPoint(x, y, t)
        lp = snap(g, lattice)
        key = (lp.k, lp.a, lp.b)
        if key in seen:
            raise ConstantViolationError(f"snapped images overlap at lattice point {key}")
        seen.add(key)
        snapped_xyz.append(tuple(lp.embedded))
        moves.append(sol_dist(g, lp.embedded))
    tiled = np.array(snapped_xyz) if snapped_xyz else np.zeros((0, 3))

    region = SolBox(0.0, config.n_blocks * float(M), 0.0, 1.0, 0.0, math.log(M))
    window = SolBox(
        region.x0 - collar, region.x1 + collar, region.y0, region.y1, region.t0, region.t1
    )
    ambient = enumerate_sol_lattice(window, lattice)
    # Gamma on the window outside the tiled blocks (the paper's extension)
    amb_xyz = ambient.points
    in_tiled = (
        (amb_xyz[:, 0] >= region.x0) & (amb_xyz[:, 0] < region.x1)
        & (amb_xyz[:, 1] >= region.y0) & (amb_xyz[:, 1] < region.y1)
        & (amb_xyz[:, 2] >= region.t0) & (amb_xyz[:, 2] < region.t1)
    )
    outside = amb_xyz[~in_tiled]
    pts = np.vstack([tiled, outside]) if len(outside) else tiled
    prov = provenance + ["ambient"] * len(outside)

    if verify:
        disc, cover = delone_constants(pts, region, amb_xyz)
    else:
        disc, cover = float("nan"), float("nan")
    return DeloneSet(
        points=pts,
        provenance=prov,
        discreteness=disc,
        covering_radius=cover,
        region=region,
        snap_moves=np.array(moves),
    )
