"""Words in the braid group B_n.

A braid on n strands is stored as a word: a sequence of signed integer
letters, where +i stands for the elementary crossing of strands i and i+1
with the left strand passing over, and -i for the opposite sense.  The empty
word is the identity braid.

Composition is concatenation in temporal order (earlier crossings first).
``relation_simplify`` shortens words with the two defining relation families

    s_i s_j = s_j s_i                 |i - j| > 1
    s_i s_{i+1} s_i = s_{i+1} s_i s_{i+1}

applied greedily; it promises equivalence preservation and non-lengthening,
not minimal length.  True equivalence testing delegates to the lamination
action (see :mod:`braidkit.loops`), which is faithful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


@dataclass(frozen=True)
class BraidWord:
    """A word in B_n: signed generator letters over ``n_strands`` strands."""

    n_strands: int
    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.n_strands < 1:
            raise ValueError(f"need at least one strand, got {self.n_strands}")
        object.__setattr__(self, "letters", tuple(self.letters))
        for l in self.letters:
            if l == 0 or not (1 <= abs(l) <= self.n_strands - 1):
                raise ValueError(
                    f"letter {l} out of range for {self.n_strands} strands"
                )

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self) -> str:
        return format_word(self)


def word(n_strands: int, letters: Iterable[int] = ()) -> BraidWord:
    """Convenience constructor."""
    return BraidWord(n_strands, tuple(letters))


def identity(n_strands: int) -> BraidWord:
    return BraidWord(n_strands, ())


def compose(a: BraidWord, b: BraidWord) -> BraidWord:
    """Concatenate two words: ``a`` happens first, then ``b``."""
    if a.n_strands != b.n_strands:
        raise ValueError(
            f"strand count mismatch: {a.n_strands} vs {b.n_strands}"
        )
    return BraidWord(a.n_strands, a.letters + b.letters)


def inverse(w: BraidWord) -> BraidWord:
    """Reverse the letters and flip every sign."""
    return BraidWord(w.n_strands, tuple(-l for l in reversed(w.letters)))


def permutation_of(w: BraidWord) -> tuple[int, ...]:
    """Final position of each strand, as a tuple indexed by start position.

    Crossing sense is irrelevant: both s_i and its inverse swap the strands
    occupying positions i and i+1.
    """
    occupant = list(range(1, w.n_strands + 1))
    for l in w.letters:
        i = abs(l) - 1
        occupant[i], occupant[i + 1] = occupant[i + 1], occupant[i]
    mapping = [0] * w.n_strands
    for pos, strand in enumerate(occupant, start=1):
        mapping[strand - 1] = pos
    return tuple(mapping)


def free_reduce(w: BraidWord) -> BraidWord:
    """Delete adjacent cancelling pairs until none remain."""
    out: list[int] = []
    for l in w.letters:
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(l)
    return BraidWord(w.n_strands, tuple(out))


def _commuting_cancel(letters: list[int]) -> list[int]:
    """Cancel pairs x ... -x when everything in between commutes with x.

    This subsumes any chain of far-commutation swaps followed by a free
    cancellation.  Runs to a fixed point.
    """
    changed = True
    while changed:
        changed = False
        n = len(letters)
        for i in range(n):
            a = letters[i]
            for j in range(i + 1, n):
                if letters[j] == -a and all(
                    abs(abs(letters[k]) - abs(a)) > 1 for k in range(i + 1, j)
                ):
                    del letters[j]
                    del letters[i]
                    changed = True
                    break
                if abs(abs(letters[j]) - abs(a)) <= 1:
                    break
            if changed:
                break
    return letters


# The braid relation s_i s_j s_i = s_j s_i s_j (|i-j| = 1) and the variants
# obtained by moving letters across: each entry maps a sign pattern of a
# triple (a, b, a) with |a|,|b| adjacent to the sign pattern of the rewritten
# triple (b, a, b).  Signs are for (first, second, third) letters.
_TRIPLE_REWRITES = {
    (+1, +1, +1): (+1, +1, +1),
    (-1, -1, -1): (-1, -1, -1),
    (+1, +1, -1): (-1, +1, +1),
    (-1, +1, +1): (+1, +1, -1),
    (+1, -1, -1): (-1, -1, +1),
    (-1, -1, +1): (+1, -1, -1),
}


def _triple_rewrite(letters: list[int], i: int) -> list[int] | None:
    """Rewrite letters[i:i+3] by a braid-relation variant, or None."""
    if i + 3 > len(letters):
        return None
    a, b, c = letters[i : i + 3]
    if abs(a) != abs(c) or abs(abs(a) - abs(b)) != 1:
        return None
    pat = (1 if a > 0 else -1, 1 if b > 0 else -1, 1 if c > 0 else -1)
    if pat not in _TRIPLE_REWRITES:
        return None
    sa, sb, sc = _TRIPLE_REWRITES[pat]
    x, y = abs(a), abs(b)
    return letters[:i] + [sa * y, sb * x, sc * y] + letters[i + 3 :]


def relation_simplify(w: BraidWord, max_passes: int = 8) -> BraidWord:
    """Greedy shortening with free cancellation, far commutation, and the
    braid relation.  Equivalence-preserving and never longer than the input;
    makes no minimality claim.
    """
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")

    def settle(ls: list[int]) -> list[int]:
        # free reduction followed by commutation-enabled cancellation
        ls = list(free_reduce(BraidWord(w.n_strands, tuple(ls))).letters)
        return _commuting_cancel(ls)

    best = settle(list(w.letters))
    for _ in range(max_passes):
        shortened = False
        for i in range(len(best)):
            candidate = _triple_rewrite(best, i)
            if candidate is None:
                continue
            candidate = settle(candidate)
            if len(candidate) < len(best):
                best = candidate
                shortened = True
                break
        if not shortened:
            break
    return BraidWord(w.n_strands, tuple(best))


def is_equivalent(a: BraidWord, b: BraidWord) -> bool:
    """Whether two words are the same element of B_n.

    Decided by acting with ``a b^{-1}`` on the canonical curve diagram and a
    battery of probe loops; the action on laminations is faithful, and the
    probes guard the (measure-zero) possibility of a single loop being fixed
    by accident.
    """
    if a.n_strands != b.n_strands:
        raise ValueError(
            f"strand count mismatch: {a.n_strands} vs {b.n_strands}"
        )
    from . import loops  # local import: loops depends on words

    diff = free_reduce(compose(a, inverse(b)))
    if not diff.letters:
        return True
    if permutation_of(diff) != tuple(range(1, diff.n_strands + 1)):
        return False
    for probe in loops.probe_battery(diff.n_strands):
        if loops.apply_word(probe, diff) != probe:
            return False
    return True


def parse_word(text: str) -> BraidWord:
    """Parse the text form ``n=4: 3 1 -2 -3 -1``.  Inverse of format_word."""
    head, sep, tail = text.partition(":")
    head = head.strip()
    if not sep or not head.startswith("n="):
        raise ValueError(
            f"malformed braid word {text!r}: expected 'n=<strands>: <letters>'"
        )
    try:
        n = int(head[2:])
    except ValueError:
        raise ValueError(f"malformed strand count in {text!r}") from None
    letters = []
    for pos, tok in enumerate(tail.split(), start=1):
        try:
            letters.append(int(tok))
        except ValueError:
            raise ValueError(
                f"bad letter {tok!r} at position {pos} in {text!r}"
            ) from None
    return BraidWord(n, tuple(letters))


def format_word(w: BraidWord) -> str:
    body = " ".join(str(l) for l in w.letters)
    return f"n={w.n_strands}:" + (" " + body if body else "")
