"""Product-form companion maps and the obstruction inequality chains.

The certification pipeline mirrors the contradiction scheme: the tiling
pins adjacent same-size boxes carrying densities d1 and d2; a product-form
map F = (f_lower, f_upper, id) must then stretch those boxes differently
(key gap lemma), while the averaged-stretch control (pigeonhole lemma plus
the squaring descent) forbids exactly that for biLipschitz boundary maps.
For every concrete F the report records which inequality breaks.

Quantities with closed definitions are computed and re-checked by
substitution: eps0 = delta L / 2, lambda0 = eps0 / (2L), and the profile
condition |d1 - d2| > 3 L^2 delta N0 / (n log N0).  The Folner threshold
M0 is the scale where the measured boundary/volume ratio of the image
boxes drops below delta; it is astronomically large for honest deltas, so
the gap lemma offers an "assumed" mode that exercises the displacement
arithmetic at finite scales and a "measured" mode that enforces the
hypothesis and raises below threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .folner import sol_shell_volume
from .lattice import ResourceLimitError, SolBox
from .madic import CylinderMap
from .tiling import DensityProfile

__all__ = [
    "PLMap",
    "CompanionMap",
    "ObstructionParams",
    "StretchHypothesisError",
    "ScaleTooSmallError",
    "stretch_search",
    "stretch_search_oracle",
    "derive_params",
    "GapReport",
    "key_lemma_gap",
    "hr_key_lemma_gap",
    "chain_steps",
    "ChainReport",
    "chain_descend",
    "ObstructionReport",
    "certify_obstruction",
    "plmap_to_json",
    "plmap_from_json",
]


class StretchHypothesisError(ValueError):
    """The averaged-stretch hypothesis failed; carries the offending index."""

    def __init__(self, i: int, sigma: float, bound: float):
        self.i = i
        self.sigma = sigma
        self.bound = bound
        super().__init__(f"interval {i} stretches {sigma:.6g} > (1+lambda) avg = {bound:.6g}")


class ScaleTooSmallError(RuntimeError):
    """Gap lemma invoked below its Folner threshold M0."""


# ---------------------------------------------------------------------------
# piecewise-linear maps of the line
# ---------------------------------------------------------------------------


class PLMap:
    """Monotone increasing piecewise-linear map of R.

    slopes[i] applies on [breakpoints[i], breakpoints[i+1]); the first and
    last slopes extend to -inf / +inf.  value_at(breakpoints[0]) = anchor.
    """

    def __init__(self, breakpoints: Sequence[float], slopes: Sequence[float], L: float = 1.0, anchor: float = 0.0):
        bp = np.asarray(breakpoints, dtype=float)
        sl = np.asarray(slopes, dtype=float)
        if bp.ndim != 1 or sl.ndim != 1 or len(sl) != len(bp):
            raise ValueError("need len(slopes) == len(breakpoints) (slope i starts at breakpoint i)")
        if len(bp) == 0:
            raise ValueError("need at least one breakpoint")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(sl <= 0):
            raise ValueError("slopes must be positive (monotone increasing map)")
        self.breakpoints = bp
        self.slopes = sl
        self.L = float(L)
        self.anchor = float(anchor)
        # cumulative values at the breakpoints
        seg = np.diff(bp) * sl[:-1]
        self._values = np.concatenate([[anchor], anchor + np.cumsum(seg)])

    @property
    def is_bilipschitz(self) -> bool:
        return bool(np.all(self.slopes >= 1.0 / self.L - 1e-12) and np.all(self.slopes <= self.L + 1e-12))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, len(self.slopes) - 1)
        base = self._values[idx]
        out = base + self.slopes[idx] * (x - self.breakpoints[idx])
        return out if out.ndim else float(out)

    # -- constructors --------------------------------------------------------

    @classmethod
    def identity(cls) -> "PLMap":
        return cls([0.0], [1.0], L=1.0)

    @classmethod
    def affine(cls, slope: float, offset: float = 0.0, L: Optional[float] = None) -> "PLMap":
        L = max(slope, 1.0 / slope) if L is None else L
        return cls([0.0], [slope], L=L, anchor=offset)

    @classmethod
    def alternating(cls, L: float, scale: float, span: float) -> "PLMap":
        """Slopes 1/L, L, 1/L, ... on blocks of length ``scale`` over
        [0, span]; constant continuation outside."""
        n = int(math.ceil(span / scale)) + 1
        bp = np.arange(n + 1) * scale
        sl = np.array([1.0 / L if i % 2 == 0 else L for i in range(n + 1)])
        return cls(bp, sl, L=L)

    @classmethod
    def single_segment(cls, L: float, start: float, length: float) -> "PLMap":
        """Identity except one slope-L segment of the given length."""
        return cls([start - 1.0, start, start + length], [1.0, L, 1.0], L=L, anchor=start - 1.0)

    def stretches(self, M: int, x0: float = 0.0, piece: Optional[float] = None) -> np.ndarray:
        """|f((i-1)h) - f(ih)|/h over M pieces of [x0, x0 + M h] (h = piece or M)."""
        h = float(M) if piece is None else float(piece)
        xs = x0 + h * np.arange(M + 1)
        vals = self(xs)
        return np.abs(np.diff(vals)) / h


@dataclass(frozen=True)
class CompanionMap:
    """Product-form model (f_lower(x), f_upper(y), t); height untouched."""

    f_lower: PLMap
    f_upper: Union[PLMap, CylinderMap]
    label: str = ""

    def image_box(self, box: SolBox) -> SolBox:
        if not isinstance(self.f_upper, PLMap):
            raise TypeError("image_box needs a PL upper map (SOL model)")
        return SolBox(
            float(self.f_lower(box.x0)),
            float(self.f_lower(box.x1)),
            float(self.f_upper(box.y0)),
            float(self.f_upper(box.y1)),
            box.t0,
            box.t1,
        )

    def apply(self, pts: np.ndarray) -> np.ndarray:
        if not isinstance(self.f_upper, PLMap):
            raise TypeError("pointwise apply needs a PL upper map")
        out = np.array(pts, dtype=float, copy=True)
        out[:, 0] = self.f_lower(out[:, 0])
        out[:, 1] = self.f_upper(out[:, 1])
        return out


def plmap_to_json(f: PLMap) -> str:
    return json.dumps(
        {
            "breakpoints": list(map(float, f.breakpoints)),
            "slopes": list(map(float, f.slopes)),
            "L": f.L,
            "anchor": f.anchor,
        },
        sort_keys=True,
    )


def plmap_from_json(text: str) -> PLMap:
    d = json.loads(text)
    return PLMap(d["breakpoints"], d["slopes"], L=d.get("L", 1.0), anchor=d.get("anchor", 0.0))


# ---------------------------------------------------------------------------
# stretch lemma
# ---------------------------------------------------------------------------


def _stretch_data(f: PLMap, M: int):
    sig = f.stretches(M)
    avg = abs(float(f(M * M)) - float(f(0.0))) / (M * M)
    return sig, avg


def stretch_search(
    f: PLMap,
    M: int,
    lam: float,
    parity: Optional[str] = None,
    stretches: Optional[np.ndarray] = None,
    average: Optional[float] = None,
) -> Optional[int]:
    """Find k with both interval k and k+1 stretched >= (1-lambda) * average.

    Hypothesis (checked, violation raises with the offending index): every
    interval stretch is <= (1+lambda) * average.  For an odd number of
    intervals the guaranteed threshold weakens to (1 - 2 lambda).  Returns
    the smallest admissible k (1-based).
    """
    if M < 2:
        raise ValueError("need at least two intervals")
    if stretches is None or average is None:
        stretches, average = _stretch_data(f, M)
    sig = np.asarray(stretches, dtype=float)
    tol = 1e-12 * max(1.0, average)
    for i, s in enumerate(sig, start=1):
        if s > (1.0 + lam) * average + tol:
            raise StretchHypothesisError(i, float(s), (1.0 + lam) * average)
    odd = (M % 2 == 1) if parity is None else (parity == "odd")
    thresh = (1.0 - (2.0 if odd else 1.0) * lam) * average
    big = sig >= thresh - tol
    for k in range(1, M):
        if big[k - 1] and big[k]:
            return k
    return None


def stretch_search_oracle(stretches: Sequence[float], average: float, lam: float, odd: bool) -> Optional[int]:
    """Exhaustive scan for any admissible k (independent of the search path)."""
    thresh = (1.0 - (2.0 if odd else 1.0) * lam) * average
    sig = list(stretches)
    for k in range(1, len(sig)):
        if sig[k - 1] >= thresh - 1e-12 and sig[k] >= thresh - 1e-12:
            return k
    return None


# ---------------------------------------------------------------------------
# parameters and the key gap lemma
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObstructionParams:
    """Constants of the contradiction chain with their defining relations."""

    geometry: str           # SOL | HR | BS
    L: float
    delta: float
    eps0: float
    lam0: float
    lam: float
    N0: int
    n: int
    d_gap: Fraction         # |d1 - d2|
    log_M0: float           # log of the Folner threshold scale
    m_levels: int           # M0 = N0^(2^m_levels)

    def check_by_substitution(self) -> bool:
        ok = True
        if self.geometry == "SOL":
            ok &= math.isclose(self.eps0, self.delta * self.L / 2.0, rel_tol=1e-12)
            ok &= float(self.d_gap) > 3.0 * self.L**2 * self.delta * self.N0 / (
                self.n * math.log(self.N0)
            )
        elif self.geometry == "BS":
            ok &= math.isclose(self.eps0, self.delta * self.L**3, rel_tol=1e-12)
            ok &= self.delta < float(self.d_gap) / (3.0 * self.L**4)
        ok &= math.isclose(self.lam0, self.eps0 / (2.0 * self.L), rel_tol=1e-12)
        ok &= self.lam <= self.lam0 + 1e-15
        return bool(ok)


def _shell_ratio_coefficient(R: float, probe_N: float = 256.0) -> float:
    """c with shell-ratio(S_M, R) ~ c / log M, measured at a probe scale."""
    box = SolBox.s_n(probe_N)
    ratio = sol_shell_volume(box, R, nt=240, ns=120, nx=120) / box.volume()
    return ratio * math.log(probe_N)


def derive_params(
    profile: DensityProfile,
    N0: int,
    L: float,
    geometry: str = "SOL",
    R_boundary: float = 3.0,
    safety: float = 0.99,
) -> ObstructionParams:
    """delta, eps0, lambda0 and the M0 threshold for the given profile.

    delta is the largest value (times ``safety``) allowed by the geometry's
    gap inequality; M0 is the first dyadic-tower scale N0^(2^m) whose
    boundary/volume ratio at radius R_boundary falls below delta.
    """
    d_gap = abs(profile.d2 - profile.d1)
    if geometry == "SOL":
        delta = safety * float(d_gap) * profile.n * math.log(N0) / (3.0 * L**2 * N0)
        eps0 = delta * L / 2.0
    elif geometry == "BS":
        delta = safety * float(d_gap) / (3.0 * L**4)
        eps0 = delta * L**3
    else:
        raise ValueError("derive_params handles SOL and BS; use hr_key_lemma_gap for HR")
    lam0 = eps0 / (2.0 * L)
    c = _shell_ratio_coefficient(R_boundary)
    log_M0 = c / delta
    m_levels = max(0, math.ceil(math.log2(max(log_M0 / math.log(N0), 1.0))))
    return ObstructionParams(
        geometry=geometry,
        L=L,
        delta=delta,
        eps0=eps0,
        lam0=lam0,
        lam=lam0,
        N0=N0,
        n=profile.n,
        d_gap=d_gap,
        log_M0=log_M0,
        m_levels=m_levels,
    )


@dataclass
class GapReport:
    r: float
    r_prime: float
    gap: float
    eps0: float
    scale_M: float
    verdict: str            # "consistent" | "violates-gap"
    mode: str               # "assumed" | "measured"
    measured_ratio: Optional[float] = None

    @property
    def consistent(self) -> bool:
        return self.verdict == "consistent"


def key_lemma_gap(
    F: CompanionMap,
    S1: SolBox,
    S2: SolBox,
    counts: Tuple[int, int],
    profile: DensityProfile,
    params: ObstructionParams,
    mode: str = "assumed",
) -> GapReport:
    """Gap check |r - r'| > eps0 for the two density-carrying boxes.

    The boxes must be same-shape translates (equal x-length, equal y-span,
    equal height range); r and r' are the boundary-map displacement ratios
    of F over their x-intervals.  ``measured`` mode enforces the Folner
    hypothesis (boundary ratio < delta at this scale) and raises
    ScaleTooSmallError below the M0 threshold; ``assumed`` mode performs
    the displacement arithmetic only.
    """
    M = S1.x1 - S1.x0
    if not (
        math.isclose(M, S2.x1 - S2.x0, rel_tol=1e-12)
        and math.isclose(S1.y1 - S1.y0, S2.y1 - S2.y0, rel_tol=1e-12)
        and math.isclose(S1.t1 - S1.t0, S2.t1 - S2.t0, rel_tol=1e-12)
    ):
        raise ValueError("S1 and S2 must be same-shape translates (equal s and height range)")
    c1, c2 = counts
    total1 = Fraction(c1) / profile.d1
    total2 = Fraction(c2) / profile.d2
    if total1 != total2:
        raise ValueError(f"counts {counts} are not d1/d2 shares of one tile population")
    measured = None
    if mode == "measured":
        box = SolBox.s_n(M)
        measured = sol_shell_volume(box, 3.0, nt=240, ns=120, nx=120) / box.volume()
        if measured >= params.delta:
            raise ScaleTooSmallError(
                f"boundary/volume ratio {measured:.4g} >= delta = {params.delta:.4g} "
                f"at M = {M:g}; the gap lemma needs log M > {params.log_M0:.4g} "
                f"(M0 = N0^(2^{params.m_levels}))"
            )
    elif mode != "assumed":
        raise ValueError(f"unknown mode {mode}")
    r = (float(F.f_lower(S1.x1)) - float(F.f_lower(S1.x0))) / M
    rp = (float(F.f_lower(S2.x1)) - float(F.f_lower(S2.x0))) / M
    gap = abs(r - rp)
    verdict = "consistent" if gap > params.eps0 else "violates-gap"
    return GapReport(
        r=r,
        r_prime=rp,
        gap=gap,
        eps0=params.eps0,
        scale_M=M,
        verdict=verdict,
        mode=mode,
        measured_ratio=measured,
    )


def hr_key_lemma_gap(
    maps: Sequence[PLMap],
    roots: Sequence[float],
    t_scale: float,
    translates: Tuple[Sequence[float], Sequence[float]],
    L: float,
    d_gap: float,
    C_prime: float,
) -> GapReport:
    """HR variant: gap = ||u^1 - u^2|| with u_j^i = log of the f_j stretch
    over box i's j-interval; eps0 = log((1+2 delta)/(1+ delta)) for
    delta = C' |d1-d2| / (3 L^{n+1})."""
    n = len(roots)
    if len(maps) != n + 1:
        raise ValueError(f"need {n + 1} boundary maps, got {len(maps)}")
    delta = C_prime * d_gap / (3.0 * L ** (n + 1))
    eps0 = math.log((1.0 + 2.0 * delta) / (1.0 + delta))
    lengths = [math.exp(t_scale * a) for a in roots] + [1.0]
    us = []
    for w in translates:
        u = []
        for j, f in enumerate(maps):
            x0 = w[j]
            x1 = w[j] + lengths[j]
            stretch = (float(f(x1)) - float(f(x0))) / lengths[j]
            if stretch > L + 1e-9 or stretch < 1.0 / L - 1e-9:
                raise ValueError(f"boundary map {j} stretch {stretch} outside [1/L, L]")
            u.append(math.log(stretch))
        us.append(u)
    gap = sum(abs(a - b) for a, b in zip(us[0], us[1]))
    verdict = "consistent" if gap > eps0 else "violates-gap"
    return GapReport(
        r=math.exp(us[0][0]),
        r_prime=math.exp(us[1][0]),
        gap=gap,
        eps0=eps0,
        scale_M=math.exp(t_scale * roots[0]),
        verdict=verdict,
        mode="assumed",
    )


# ---------------------------------------------------------------------------
# descent chain
# ---------------------------------------------------------------------------


def chain_steps(L: float, lam: float) -> int:
    """Smallest t with (1+lambda)^t / L > L."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    t = int(math.floor(math.log(L * L) / math.log1p(lam))) + 1
    while (1.0 + lam) ** t <= L * L:
        t += 1
    return t


@dataclass
class ChainReport:
    outcome: str                      # "trigger" | "chain"
    t_steps: int
    trigger_level: Optional[int]
    violations: List[Tuple[int, int, float, float]]   # (level, index, sigma, bound)
    chain_values: List[float]         # nested certificate sigmas, bottom first
    final_inequality: Optional[str]

    @property
    def is_contradiction_certificate(self) -> bool:
        return self.outcome == "chain"


def _window_scan(f: PLMap, w0: float, pieces: int, lam: float):
    """(max stretch, argmax 1-based, average) over equal pieces of a window."""
    h = pieces  # piece length equals the previous scale
    xs = w0 + float(h) * np.arange(pieces + 1)
    vals = f(xs)
    sig = np.abs(np.diff(vals)) / float(h)
    avg = abs(float(vals[-1]) - float(vals[0])) / (float(h) * pieces)
    i = int(np.argmax(sig))
    return float(sig[i]), i + 1, avg


def chain_descend(
    f: PLMap,
    M0: int,
    lam: float,
    L: float,
    max_pieces: int = 1 << 21,
) -> ChainReport:
    """Run the squaring descent from base scale M0.

    Phase one walks levels j = 1, 2, ... with window [0, M0^(2^j)] cut into
    M0^(2^(j-1)) pieces; a level with no interval stretched beyond
    (1+lambda) times the window average stops the walk (the averaged-stretch
    hypothesis holds at that scale; the level reported is the count of
    violating levels below it).  If every level up to the step bound t
    violates, phase two rebuilds the violations as a nested certificate and
    reports the inequality chain L >= sigma_1 > (1+lambda)^t avg_top.
    """
    t = chain_steps(L, lam)
    violations: List[Tuple[int, int, float, float]] = []
    scale = M0
    for level in range(1, t + 1):
        pieces = scale
        if pieces > max_pieces:
            raise ResourceLimitError(
                f"level {level} needs {pieces} pieces (> {max_pieces}); "
                f"no trigger found at the feasible scales"
            )
        xs = 0.0 + float(scale) * np.arange(pieces + 1)
        vals = f(xs)
        sig = np.abs(np.diff(vals)) / float(scale)
        avg = abs(float(vals[-1]) - float(vals[0])) / (float(scale) * pieces)
        i = int(np.argmax(sig))
        if sig[i] <= (1.0 + lam) * avg * (1.0 + 1e-12):
            return ChainReport(
                outcome="trigger",
                t_steps=t,
                trigger_level=level - 1,
                violations=violations,
                chain_values=[],
                final_inequality=None,
            )
        violations.append((level, i + 1, float(sig[i]), (1.0 + lam) * avg))
        scale = scale * scale

    # phase two: nested top-down certificate
    top_scale = M0 ** (2 ** (t - 1))
    w0 = 0.0
    chain_vals: List[float] = []
    avg_top = None
    for level in range(t, 0, -1):
        pieces = M0 ** (2 ** (level - 1))
        if pieces > max_pieces:
            raise ResourceLimitError(f"certificate scan needs {pieces} pieces")
        h = float(pieces)
        xs = w0 + h * np.arange(pieces + 1)
        vals = f(xs)
        sig = np.abs(np.diff(vals)) / h
        avg = abs(float(vals[-1]) - float(vals[0])) / (h * pieces)
        if avg_top is None:
            avg_top = avg
        i = int(np.argmax(sig))
        if sig[i] <= (1.0 + lam) * avg * (1.0 + 1e-12):
            return ChainReport(
                outcome="trigger",
                t_steps=t,
                trigger_level=level - 1,
                violations=violations,
                chain_values=chain_vals,
                final_inequality=None,
            )
        chain_vals.append(float(sig[i]))
        w0 = xs[i]
    sigma1 = chain_vals[-1]
    rhs = (1.0 + lam) ** t * avg_top
    # name the premise the certificate actually contradicts
    if sigma1 > L:
        verdict = f"sigma_1 = {sigma1:.6g} > L = {L} (upper Lipschitz bound broken)"
    elif avg_top < 1.0 / L:
        verdict = (
            f"global average stretch {avg_top:.6g} < 1/L = {1.0 / L:.6g} "
            f"(lower biLipschitz bound broken)"
        )
    else:
        verdict = (
            f"L >= sigma_1 = {sigma1:.6g} > (1+lambda)^t avg = {rhs:.6g} >= "
            f"(1+lambda)^t / L = {(1.0 + lam) ** t / L:.6g} > L (contradiction)"
        )
    final = f"nested chain sigma_1 > (1+lambda)^t * avg_top: {sigma1:.6g} > {rhs:.6g}; " + verdict
    return ChainReport(
        outcome="chain",
        t_steps=t,
        trigger_level=None,
        violations=violations,
        chain_values=chain_vals[::-1],
        final_inequality=final,
    )


# ---------------------------------------------------------------------------
# full certification
# ---------------------------------------------------------------------------


@dataclass
class ObstructionReport:
    label: str
    params: ObstructionParams
    scale_M: int
    failing_lemma: str              # "key-gap" | "descent-trigger" | "descent-chain" | "none"
    stretch_k: Optional[int]
    gap: Optional[GapReport]
    chain: Optional[ChainReport]
    lines: List[str] = field(default_factory=list)

    @property
    def obstructed(self) -> bool:
        return self.failing_lemma != "none"

    def render(self) -> str:
        out = [f"map: {self.label}", f"scale M = {self.scale_M}", f"failing: {self.failing_lemma}"]
        out.extend(self.lines)
        return "\n".join(out)


def certify_obstruction(
    F: CompanionMap,
    profile: DensityProfile,
    params: ObstructionParams,
    M: Optional[int] = None,
) -> ObstructionReport:
    """Run the pipeline for one product-form map and record which lemma it
    fails (every biLipschitz product map must fail one of them against the
    alternating-density tiling)."""
    M = params.N0 if M is None else M
    lam = params.lam
    lines: List[str] = []
    counts1 = profile.tile_size("Q1")
    counts2 = profile.tile_size("Q2")
    total = profile.n
    lines.append(
        f"densities: adjacent boxes carry d1={profile.d1} and d2={profile.d2} shares "
        f"({counts1} vs {counts2} of {total} base points per tile)"
    )
    f = F.f_lower
    try:
        k = stretch_search(f, M, lam)
    except StretchHypothesisError as e:
        lines.append(f"averaged-stretch hypothesis fails at scale {M}: {e}")
        chain = chain_descend(f, M0=M, lam=lam, L=params.L)
        if chain.outcome == "trigger":
            lines.append(
                f"descent trigger at level {chain.trigger_level}: the hypothesis holds "
                f"there, so the gap lemma applies at that scale"
            )
            failing = "descent-trigger"
        else:
            lines.append(chain.final_inequality)
            failing = "descent-chain"
        return ObstructionReport(
            label=F.label or "map",
            params=params,
            scale_M=M,
            failing_lemma=failing,
            stretch_k=None,
            gap=None,
            chain=chain,
            lines=lines,
        )
    if k is None:
        lines.append("no adjacent stretched pair found (degenerate stretch vector)")
        return ObstructionReport(
            label=F.label or "map",
            params=params,
            scale_M=M,
            failing_lemma="none",
            stretch_k=None,
            gap=None,
            chain=None,
            lines=lines,
        )
    lines.append(f"stretch pair at k = {k}")
    S1 = SolBox((k - 1) * float(M), k * float(M), 0.0, 1.0, 0.0, math.log(M))
    S2 = SolBox(k * float(M), (k + 1) * float(M), 0.0, 1.0, 0.0, math.log(M))
    gap = key_lemma_gap(
        F,
        S1,
        S2,
        (counts1, counts2),
        profile,
        params,
        mode="assumed",
    )
    lines.append(
        f"gap: |r - r'| = |{gap.r:.6g} - {gap.r_prime:.6g}| = {gap.gap:.6g} vs eps0 = {gap.eps0:.6g}"
    )
    if not gap.consistent:
        lines.append("gap <= eps0: the map cannot realize the two densities (key lemma)")
        failing = "key-gap"
    else:
        # consistent gap with the hypothesis in force: |r - r'| <= 2 lam L
        bound = 2.0 * lam * params.L
        if gap.gap <= bound:
            failing = "none"
            lines.append(f"gap {gap.gap:.6g} within the stretch bound 2 lam L = {bound:.6g}")
        else:
            failing = "descent-trigger"
            lines.append(
                f"gap {gap.gap:.6g} > 2 lam L = {bound:.6g}: the averaged-stretch bound "
                f"fails for this map at this scale"
            )
    return ObstructionReport(
        label=F.label or "map",
        params=params,
        scale_M=M,
        failing_lemma=failing,
        stretch_k=k,
        gap=gap,
        chain=None,
        lines=lines,
    )
