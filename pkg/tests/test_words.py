"""Unit tests for braid word algebra (construction, composition, rewriting)."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from braidkit.words import (
    BraidWord,
    compose,
    format_word,
    free_reduce,
    identity,
    inverse,
    parse_word,
    permutation_of,
    relation_simplify,
    word,
)


def words_strategy(max_n=6, max_len=16):
    return st.integers(min_value=2, max_value=max_n).flatmap(
        lambda n: st.lists(
            st.integers(min_value=1, max_value=n - 1).flatmap(
                lambda i: st.sampled_from([i, -i])
            ),
            max_size=max_len,
        ).map(lambda ls: word(n, ls))
    )


# ---------------------------------------------------------------- construction


def test_word_basic():
    w = word(4, [3, 1, -2, -3, -1])
    assert w.n_strands == 4
    assert w.letters == (3, 1, -2, -3, -1)
    assert len(w) == 5
    assert list(w) == [3, 1, -2, -3, -1]


def test_identity_is_empty():
    e = identity(3)
    assert e.letters == ()
    assert len(e) == 0


def test_letter_out_of_range_rejected():
    with pytest.raises(ValueError):
        word(3, [3])
    with pytest.raises(ValueError):
        word(3, [-3])
    with pytest.raises(ValueError):
        word(2, [0])


def test_too_few_strands_rejected():
    with pytest.raises(ValueError):
        word(0, [])
    # B_1 is the trivial group: only the empty word is expressible.
    assert identity(1).letters == ()
    with pytest.raises(ValueError):
        word(1, [1])


# ----------------------------------------------------------------- composition


def test_compose_concatenates_in_temporal_order():
    a = word(3, [1])
    b = word(3, [-2])
    assert compose(a, b).letters == (1, -2)


def test_compose_rejects_strand_mismatch():
    with pytest.raises(ValueError):
        compose(word(3, [1]), word(4, [1]))


def test_inverse_reverses_and_negates():
    w = word(4, [3, 1, -2])
    assert inverse(w).letters == (2, -1, -3)
    assert free_reduce(compose(w, inverse(w))).letters == ()
    assert free_reduce(compose(inverse(w), w)).letters == ()


# ---------------------------------------------------------------- permutations


def test_permutation_of_known_word():
    # sigma_2 sigma_1 sigma_3 sigma_2 sends strands (1,2,3,4) to (3,4,1,2)
    assert permutation_of(word(4, [2, 1, 3, 2])) == (3, 4, 1, 2)


def test_permutation_of_single_swap():
    assert permutation_of(word(2, [1])) == (2, 1)
    assert permutation_of(word(2, [-1])) == (2, 1)


def test_permutation_of_identity():
    assert permutation_of(identity(5)) == (1, 2, 3, 4, 5)


def test_permutation_ignores_letter_signs():
    w = word(4, [3, 1, -2, -3, -1])
    flipped = word(4, [abs(l) for l in w])
    assert permutation_of(w) == permutation_of(flipped)


# ------------------------------------------------------------------- rewriting


def test_free_reduce_cancels_adjacent_inverses():
    assert free_reduce(word(3, [1, -1, 2])).letters == (2,)
    assert free_reduce(word(3, [1, 2, -2, -1])).letters == ()


def test_free_reduce_cascades():
    # cancellation exposes a new cancelling pair
    assert free_reduce(word(4, [1, 2, 3, -3, -2, -1])).letters == ()


def test_relation_simplify_far_commutation():
    # sigma_1 and sigma_3 commute, so the outer pair cancels
    assert relation_simplify(word(4, [1, 3, -1])).letters == (3,)


def test_relation_simplify_braid_relation():
    # sigma_1 sigma_2 sigma_1 = sigma_2 sigma_1 sigma_2, so this is trivial
    assert relation_simplify(word(3, [1, 2, 1, -2, -1, -2])).letters == ()


def test_relation_simplify_leaves_reduced_words_alone():
    w = word(3, [1, 2, 1])
    assert relation_simplify(w).letters in {(1, 2, 1), (2, 1, 2)}
    assert len(relation_simplify(w)) == 3


def test_relation_simplify_rejects_bad_budget():
    with pytest.raises(ValueError):
        relation_simplify(word(3, [1]), max_passes=0)


@given(words_strategy())
@settings(max_examples=200, deadline=None)
def test_relation_simplify_never_longer_and_preserves_permutation(w):
    s = relation_simplify(w)
    assert len(s) <= len(w)
    assert permutation_of(s) == permutation_of(w)


@given(words_strategy())
@settings(max_examples=200, deadline=None)
def test_free_reduce_is_idempotent(w):
    r = free_reduce(w)
    assert free_reduce(r) == r


@given(words_strategy(max_len=8), words_strategy(max_len=8))
@settings(max_examples=100, deadline=None)
def test_permutation_is_a_homomorphism(a, b):
    if a.n_strands != b.n_strands:
        return
    pa, pb = permutation_of(a), permutation_of(b)
    combined = permutation_of(compose(a, b))
    # strand k lands at pa[k-1] under a, then at pb[that-1] under b
    assert combined == tuple(pb[pa[k] - 1] for k in range(a.n_strands))


@given(words_strategy(), words_strategy(), words_strategy())
@settings(max_examples=60, deadline=None)
def test_compose_is_associative(a, b, c):
    if not (a.n_strands == b.n_strands == c.n_strands):
        return
    assert compose(compose(a, b), c) == compose(a, compose(b, c))


# ------------------------------------------------------------------- text form


def test_format_and_parse_round_trip():
    w = word(4, [3, 1, -2, -3, -1])
    assert format_word(w) == "n=4: 3 1 -2 -3 -1"
    assert parse_word("n=4: 3 1 -2 -3 -1") == w


def test_format_identity():
    assert format_word(identity(3)) == "n=3:"
    assert parse_word("n=3:") == identity(3)


def test_parse_tolerates_whitespace():
    assert parse_word("  n=3:  1   -2 ") == word(3, [1, -2])


def test_parse_rejects_garbage():
    for text in ["", "3: 1", "n=x: 1", "n=3 1 2", "n=3: 1 q", "n=3: 5"]:
        with pytest.raises(ValueError):
            parse_word(text)


@given(words_strategy())
@settings(max_examples=150, deadline=None)
def test_text_form_round_trips(w):
    assert parse_word(format_word(w)) == w


def test_str_matches_text_form():
    w = word(3, [-1, 2])
    assert str(w) == "n=3: -1 2"
    assert str(w) == format_word(w)


def test_words_are_hashable_values():
    a = word(3, [1, -2])
    b = word(3, [1, -2])
    assert a == b and hash(a) == hash(b)
    assert a != word(4, [1, -2])
    assert len({a, b}) == 1


def test_words_are_immutable():
    w = word(3, [1])
    with pytest.raises(Exception):
        w.letters = (2,)  # type: ignore[misc]
