"""Reduced words in free groups, tuples in direct powers, and p-dissociate families.

Words are kept fully reduced at all times; reduction happens on the fly during
multiplication, since everything downstream keys on exact word identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

from .errors import DEFAULT_BUDGET, check_budget

_WORD_LETTER = re.compile(r"^([gG])(\d+)$")


@dataclass(frozen=True, order=True)
class Word:
    """A reduced word; letters are (generator_index, exponent) with exponent +-1.

    The empty tuple is the identity.
    """

    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for g, e in self.letters:
            if g < 1 or e not in (-1, 1):
                raise ValueError(f"bad letter {(g, e)}")
        for (g1, e1), (g2, e2) in zip(self.letters, self.letters[1:]):
            if g1 == g2 and e1 == -e2:
                raise ValueError(f"word {self.letters} is not reduced")

    @classmethod
    def reduce(cls, letters: Iterable[tuple[int, int]]) -> "Word":
        """Freely reduce an arbitrary letter sequence (stack-based)."""
        out: list[tuple[int, int]] = []
        for g, e in letters:
            if out and out[-1][0] == g and out[-1][1] == -e:
                out.pop()
            else:
                out.append((g, e))
        return cls(tuple(out))

    @classmethod
    def generator(cls, i: int, exponent: int = 1) -> "Word":
        return cls(((i, exponent),))

    @property
    def is_identity(self) -> bool:
        return not self.letters

    @property
    def max_generator(self) -> int:
        return max((g for g, _ in self.letters), default=0)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return word_multiply(self, other)

    def inverse(self) -> "Word":
        return inverse(self)

    def __str__(self) -> str:
        return format_word(self)


def word_multiply(a: Word, b: Word) -> Word:
    """Reduced concatenation; associative, with word_multiply(a, inverse(a)) = e."""
    out = list(a.letters)
    for g, e in b.letters:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return Word(tuple(out))


def inverse(a: Word) -> Word:
    """Letters reversed with flipped exponents."""
    return Word(tuple((g, -e) for g, e in reversed(a.letters)))


@dataclass(frozen=True, order=True)
class WordTuple:
    """Element of a direct power F_n x ... x F_n, one reduced word per factor."""

    words: tuple[Word, ...]

    @classmethod
    def identity(cls, arity: int) -> "WordTuple":
        return cls((Word(),) * arity)

    @property
    def arity(self) -> int:
        return len(self.words)

    @property
    def is_identity(self) -> bool:
        return all(w.is_identity for w in self.words)

    @property
    def max_generator(self) -> int:
        return max((w.max_generator for w in self.words), default=0)

    def __mul__(self, other: "WordTuple") -> "WordTuple":
        if len(self.words) != len(other.words):
            raise ValueError("arity mismatch")
        return WordTuple(tuple(a * b for a, b in zip(self.words, other.words)))

    def inverse(self) -> "WordTuple":
        return WordTuple(tuple(w.inverse() for w in self.words))


def format_word(w: Word) -> str:
    """Render as 'g3 G1 g2' (uppercase = inverse); 'e' for the identity."""
    if w.is_identity:
        return "e"
    return " ".join(f"g{g}" if e == 1 else f"G{g}" for g, e in w.letters)


def parse_word(text: str) -> Word:
    text = text.strip()
    if text == "e" or text == "":
        return Word()
    letters = []
    for token in text.split():
        m = _WORD_LETTER.match(token)
        if not m:
            raise ValueError(f"bad word token {token!r}")
        sign, idx = m.groups()
        letters.append((int(idx), 1 if sign == "g" else -1))
    return Word.reduce(letters)


def gamma_indices(n: int, d: int) -> list[tuple[int, ...]]:
    """The index set [n]^d in lexicographic order (1-based entries)."""
    return list(product(range(1, n + 1), repeat=d))


@dataclass
class WordFamily:
    """Words of a single free group indexed by the grid [n]^d.

    ``n`` and ``d`` describe the index set only; the words may use any
    generators, independently of n and d.
    """

    n: int
    d: int
    words: dict[tuple[int, ...], Word]

    def __post_init__(self):
        expected = set(gamma_indices(self.n, self.d))
        if set(self.words) != expected:
            raise ValueError(f"family must be a total map on [{self.n}]^{self.d}")


def canonical_dissociate(n: int, d: int) -> WordFamily:
    """The length-d generator products: index (i_1..i_d) -> g_{i_1} ... g_{i_d}."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    words = {
        gamma: Word(tuple((i, 1) for i in gamma)) for gamma in gamma_indices(n, d)
    }
    return WordFamily(n=n, d=d, words=words)


@dataclass(frozen=True)
class DissociateReport:
    ok: bool
    witness: tuple[tuple[int, ...], ...] | None = None


def _has_injective_projection(h: Sequence[tuple[int, ...]], d: int) -> bool:
    p = len(h)
    return any(len({gamma[k] for gamma in h}) == p for k in range(d))


def is_p_dissociate(
    family: WordFamily, p: int, budget: int = DEFAULT_BUDGET
) -> DissociateReport:
    """Check the non-cancellation property along injective-projection index maps.

    For every h: [p] -> [n]^d with some injective coordinate, the alternating
    product t(h1)^-1 t(h2) t(h3)^-1 ... t(hp) must differ from the identity.
    On failure the witness is one violating h.
    """
    if p < 2 or p % 2:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    check_budget(family.n ** (family.d * p), budget, "dissociate enumeration")
    gammas = gamma_indices(family.n, family.d)
    for h in product(gammas, repeat=p):
        if not _has_injective_projection(h, family.d):
            continue
        acc = Word()
        for s, gamma in enumerate(h, start=1):
            w = family.words[gamma]
            acc = acc * (w.inverse() if s % 2 else w)
        if acc.is_identity:
            return DissociateReport(ok=False, witness=h)
    return DissociateReport(ok=True)


def word_family_to_json(family: WordFamily) -> dict[str, str]:
    """Serialize as a flat map '1,2' -> 'g1 g2'."""
    return {
        ",".join(str(i) for i in gamma): format_word(w)
        for gamma, w in sorted(family.words.items())
    }


def word_family_from_json(obj: Mapping[str, str]) -> WordFamily:
    """Inverse of :func:`word_family_to_json`; n and d inferred from the keys."""
    words = {}
    for key, text in obj.items():
        gamma = tuple(int(part) for part in key.split(","))
        words[gamma] = parse_word(text)
    if not words:
        raise ValueError("empty word family")
    d = len(next(iter(words)))
    n = max(max(g) for g in words)
    return WordFamily(n=n, d=d, words=words)
