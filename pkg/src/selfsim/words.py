"""Finite symbol words over the alphabet {1, ..., k}.

Words index the pieces of every level of the natural covering structure of a
self-similar set: the word (i1, ..., in) names the piece obtained by applying
map i1, then i2, ... to the whole attractor.  The empty word names the
attractor itself.  Words are plain tuples so they hash and compare
structurally, which the oracle relies on for memoization.
"""

from __future__ import annotations

from itertools import product

from .errors import BudgetExceededError

Word = tuple[int, ...]

EMPTY: Word = ()

DEFAULT_BUDGET = 200_000


def validate_word(word: Word, k: int) -> Word:
    """Check all symbols lie in 1..k and return the word unchanged."""
    for s in word:
        if not 1 <= s <= k:
            raise ValueError(f"symbol {s} outside alphabet 1..{k} in word {word}")
    return word


def is_prefix(u: Word, v: Word) -> bool:
    """True iff u is a (not necessarily proper) prefix of v."""
    return len(u) <= len(v) and v[: len(u)] == u


def incomparable(u: Word, v: Word) -> bool:
    """True iff neither word is a prefix of the other."""
    return not is_prefix(u, v) and not is_prefix(v, u)


def level_size(k: int, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """k**n, guarded against blowing past the piece budget."""
    if k < 2:
        raise ValueError(f"alphabet size must be >= 2, got {k}")
    if n < 0:
        raise ValueError(f"level index must be >= 0, got {n}")
    size = k**n
    if size > budget:
        raise BudgetExceededError(f"level {n} holds {k}^{n} = {size} words, budget is {budget}")
    return size


def enumerate_level(k: int, n: int, budget: int = DEFAULT_BUDGET) -> list[Word]:
    """All k**n words of length n, in lexicographic order."""
    level_size(k, n, budget)
    return [tuple(w) for w in product(range(1, k + 1), repeat=n)]


def children(u: Word, k: int, budget: int = DEFAULT_BUDGET) -> list[Word]:
    """The k words u.1, ..., u.k, each one symbol longer than u."""
    if k < 2:
        raise ValueError(f"alphabet size must be >= 2, got {k}")
    if k > budget:
        raise BudgetExceededError(f"{k} children exceed budget {budget}")
    return [u + (j,) for j in range(1, k + 1)]


def word_str(word: Word) -> str:
    """Compact display form; the empty word renders as the whole-set marker."""
    if not word:
        return "e"
    if max(word) <= 9:
        return "".join(str(s) for s in word)
    return ".".join(str(s) for s in word)
