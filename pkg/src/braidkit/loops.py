"""Integer coordinates for loops in a punctured disk, and the braid action.

Model
-----
Take a disk with ``m = n_strands + 1`` marked points on a horizontal
axis.  Point 1 is a fixed *anchor* (it tracks the frame of reference and
is never braided); points ``2..m`` carry the strands, so generator
``sigma_i`` exchanges marked points ``i+1`` and ``i+2``.  A positive
generator is the clockwise half-twist: the left point passes over the
top.

A multicurve (disjoint union of essential simple closed curves, none
encircling a single point or all of them) is recorded by three families
of transverse counts:

* ``nu[k]``  -- crossings with the vertical wall through gap ``k``
  (between points ``k`` and ``k+1``), for ``k = 1..m-1``;
* ``T[j]``   -- passes over point ``j``;
* ``S[j]``   -- passes under point ``j``.

These satisfy linear slab relations, so the whole family is a function
of the exposed coordinate vector

    ``(a_1, b_1, ..., a_{m-2}, b_{m-2})``,
    ``a_i = (S[i+1] - T[i+1]) / 2``,  ``b_i = (nu[i] - nu[i+1]) / 2``,

which is what :class:`LoopCoordinates` stores.  Coordinates are exact
integers and grow exponentially under twisting, hence plain Python
integers throughout (no numpy arrays here on purpose: values overflow
64-bit machine words near word length 60).

Each generator updates the counts near the twisted pair through four
max-plus exchange moves (flattening the two hooks of the left point
across the twist region), so applying a word of length L costs O(L)
big-integer operations instead of the exponential cost of tracking the
curves themselves.

The start diagram ``E`` used for scoring encircles the marked points in
consecutive pairs -- (anchor, strand 1), (strand 2, strand 3), ... --
with every curve doubled.  It meets the axis between the extreme points
in exactly ``2 * (n_strands - 1)`` points, and its norm grows by the
factor 3 under one crossed exchange and by 4 under the two-generator
weave, which pins the scoring scale used elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .words import BraidWord, free_reduce

__all__ = [
    "LoopCoordinates",
    "ComplexityScore",
    "canonical_diagram",
    "encircling_loop",
    "apply_letter",
    "apply_word",
    "norm",
    "probe_battery",
    "topological_complexity",
]


@dataclass(frozen=True)
class LoopCoordinates:
    """Exact integer coordinates of a multicurve in the marked disk.

    ``coords`` interleaves the pairs ``(a_1, b_1, ..., a_{m-2},
    b_{m-2})`` for ``m = n_punctures`` marked points (anchor included).
    """

    n_punctures: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if self.n_punctures < 3:
            raise ValueError(f"need at least 3 marked points, got {self.n_punctures}")
        expected = 2 * (self.n_punctures - 2)
        if len(self.coords) != expected:
            raise ValueError(
                f"coordinate vector must have length {expected} for "
                f"{self.n_punctures} marked points, got {len(self.coords)}"
            )
        if not all(isinstance(c, int) for c in self.coords):
            raise ValueError("coordinates must be integers")

    @property
    def n_strands(self) -> int:
        return self.n_punctures - 1

    def pairs(self):
        """The (a_i, b_i) pairs, i = 1..m-2."""
        it = iter(self.coords)
        return list(zip(it, it))


@dataclass(frozen=True)
class ComplexityScore:
    """Norm growth of the start diagram under a braid word, in bits."""

    tc: float
    norm_before: int
    norm_after: int


# --------------------------------------------------------------------------
# conversion between exposed coordinates and the internal count triple
# --------------------------------------------------------------------------


def _expand(loop: LoopCoordinates):
    """Recover (nu, T, S) from the coordinate vector.

    All walls of a closed multicurve are crossed an even number of
    times, so the nu are even; the first one is the smallest value
    compatible with every count being realizable, which is exactly the
    normalization that holds when no component is parallel to the disk
    boundary (such a component would be invisible to the exposed
    coordinates anyway).
    """
    m = loop.n_punctures
    ab = loop.pairs()
    # prefix[i] = sum of b_1..b_{i-1}; nu_i = nu_1 - 2*prefix[i]
    prefix = [0]
    for _, b in ab:
        prefix.append(prefix[-1] + b)
    nu1 = 0
    for i in range(m - 1):
        nu1 = max(nu1, 2 * prefix[i])
    for j in range(2, m):  # slab of point j uses a_{j-1}
        bound = 2 * abs(ab[j - 2][0])
        nu1 = max(nu1, bound + 2 * prefix[j - 2], bound + 2 * prefix[j - 1])
    nu = [nu1 - 2 * prefix[i] for i in range(m - 1)]
    T = [0] * m
    S = [0] * m
    T[0] = S[0] = nu[0] // 2
    T[m - 1] = S[m - 1] = nu[m - 2] // 2
    for j in range(2, m):
        a = ab[j - 2][0]
        left, right = nu[j - 2], nu[j - 1]
        curls = abs(right - left) // 2
        straight = min(left, right) // 2
        T[j - 1] = straight - a + curls
        S[j - 1] = straight + a + curls
    return nu, T, S


def _collapse(m, nu, T, S) -> LoopCoordinates:
    coords = []
    for i in range(1, m - 1):
        coords.append((S[i] - T[i]) // 2)
        coords.append((nu[i - 1] - nu[i]) // 2)
    return LoopCoordinates(m, tuple(coords))


def _twist(nu, T, S, letter):
    """One generator acting on the count triple, in place."""
    m = len(T)
    k = abs(letter) + 1  # left marked point of the twisted pair, 1-based
    A, B = k - 1, k  # 0-based point indices
    w = k - 1  # 0-based index of the wall between them
    mid = nu[w]
    wall_l = nu[w - 1]
    wall_r = nu[w + 1] if w + 1 < m - 1 else 0
    tA, sA, tB, sB = T[A], S[A], T[B], S[B]
    if letter > 0:
        # clockwise: A's hooks drag over the top of B
        over = tA + sB
        h = max(over, sA + tB) - mid
        tA2 = max(over, h + wall_l) - sA
        sB2 = max(over, h + wall_r) - tB
        nu[w] = max(over, tA2 + sB2) - h
        T[A], S[A], T[B], S[B] = tA2, sB, tA, sB2
    else:
        # counterclockwise: mirror image through the axis (T and S trade places)
        under = sA + tB
        h = max(under, tA + sB) - mid
        sA2 = max(under, h + wall_l) - tA
        tB2 = max(under, h + wall_r) - sB
        nu[w] = max(under, sA2 + tB2) - h
        T[A], S[A], T[B], S[B] = tB, sA2, tB2, sA


def _norm_of_triple(m, nu, T, S) -> int:
    total = 0
    for k in range(m - 1):
        total += max(T[k] + S[k + 1], S[k] + T[k + 1]) - nu[k]
    return total


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------


def canonical_diagram(n: int) -> LoopCoordinates:
    """The start diagram for ``n`` strands: doubled loops around
    consecutive pairs of marked points, packed from the right (the
    anchor stays unpaired when the count is odd).

    Its norm is ``2*(n-1)``, and that value is minimal over the whole
    braid orbit: every image of a component ring encloses the same
    points-of-each-kind count, needs two axis crossings unless it
    reaches the left end (anchor inside) or the right end, and only one
    ring can do each.  Packing from the right realizes that bound, which
    is what keeps the complexity score nonnegative for every word.
    ``n = 2`` is the smallest disk with a coordinate pair; anything
    below is rejected.
    """
    if n < 2:
        raise ValueError(f"need at least 2 strands, got {n}")
    m = n + 1
    nu = [0] * (m - 1)
    T = [0] * m
    S = [0] * m
    start = 2 if m % 2 else 1
    for a in range(start, m, 2):  # pair (a, a+1), doubled
        nu[a - 1] += 4
        for j in (a, a + 1):
            T[j - 1] += 2
            S[j - 1] += 2
    return _collapse(m, nu, T, S)


def encircling_loop(n_strands: int, lo: int, hi: int) -> LoopCoordinates:
    """A single loop around marked points ``lo..hi`` (1 = anchor).

    The loop must enclose at least two points and leave at least one
    outside, otherwise it carries no coordinate information.
    """
    m = n_strands + 1
    if not (1 <= lo < hi <= m):
        raise ValueError(f"need 1 <= lo < hi <= {m}, got ({lo}, {hi})")
    if hi - lo + 1 >= m:
        raise ValueError("a loop around every marked point is boundary-parallel")
    nu = [0] * (m - 1)
    T = [0] * m
    S = [0] * m
    for k in range(lo, hi):
        nu[k - 1] += 2
    for j in range(lo, hi + 1):
        T[j - 1] += 1
        S[j - 1] += 1
    return _collapse(m, nu, T, S)


def _check_letter(m: int, letter: int):
    if not isinstance(letter, int) or letter == 0:
        raise ValueError(f"letter must be a signed nonzero integer, got {letter!r}")
    if abs(letter) > m - 2:
        raise ValueError(
            f"letter {letter} out of range for {m - 1} strands"
        )


def apply_letter(loop: LoopCoordinates, letter: int) -> LoopCoordinates:
    """Image of the multicurve under one braid generator (sign = twist sense)."""
    _check_letter(loop.n_punctures, letter)
    nu, T, S = _expand(loop)
    _twist(nu, T, S, letter)
    return _collapse(loop.n_punctures, nu, T, S)


def apply_word(loop: LoopCoordinates, word: BraidWord) -> LoopCoordinates:
    """Image of the multicurve under a whole braid word (letters in temporal order)."""
    if word.n_strands != loop.n_strands:
        raise ValueError(
            f"word on {word.n_strands} strands cannot act on a disk "
            f"with {loop.n_strands} strand points"
        )
    nu, T, S = _expand(loop)
    for letter in word:
        _twist(nu, T, S, letter)
    return _collapse(loop.n_punctures, nu, T, S)


def norm(loop: LoopCoordinates) -> int:
    """Minimal number of crossings with the axis between the extreme points."""
    nu, T, S = _expand(loop)
    return _norm_of_triple(loop.n_punctures, nu, T, S)


def probe_battery(n_strands: int) -> list[LoopCoordinates]:
    """A fixed spread of essential loops used to separate braid classes.

    Two words that agree on the start diagram and on every probe are
    reported equal; the battery mixes loops touching the anchor with
    loops that do not, plus twisted copies, so that no short nontrivial
    word in the tested range fixes them all.
    """
    if n_strands < 2:
        raise ValueError(f"need at least 2 strands, got {n_strands}")
    m = n_strands + 1
    probes = [
        canonical_diagram(n_strands),
        encircling_loop(n_strands, 1, 2),
        encircling_loop(n_strands, 2, m),
        apply_letter(encircling_loop(n_strands, 1, 2), 1),
    ]
    for j in range(2, m):  # adjacent strand pairs
        probes.append(encircling_loop(n_strands, j, j + 1))
    if n_strands >= 3:
        # a ring overlapping (not containing) the last twisted pair
        probes.append(
            apply_letter(encircling_loop(n_strands, m - 2, m - 1), -(n_strands - 1))
        )
    # drop duplicates: small disks make some of the constructions collide
    seen: dict[tuple[int, ...], LoopCoordinates] = {}
    for p in probes:
        seen.setdefault(p.coords, p)
    return list(seen.values())


def topological_complexity(word: BraidWord) -> ComplexityScore:
    """Entanglement of a braid word, as the log2 growth of the start diagram.

    Two-strand words live on a disk with a single coordinate pair whose
    growth undercounts the winding, so they are scored by direct arc
    counting on the two-punctured disk instead: k full exchanges drag an
    arc across the axis 2k+1 times per crossing of the start arc.
    """
    n = word.n_strands
    if n < 2:
        raise ValueError(f"complexity needs at least 2 strands, got {n}")
    if n == 2:
        k = abs(sum(1 if l > 0 else -1 for l in free_reduce(word)))
        before = 2
        after = before * (2 * k + 1)
        return ComplexityScore(math.log2(2 * k + 1), before, after)
    start = canonical_diagram(n)
    before = norm(start)
    after = norm(apply_word(start, word))
    return ComplexityScore(math.log2(after) - math.log2(before), before, after)
