"""Words in free groups, reductions, and finite presentations.

A word is a tuple of nonzero integers: generator ``g`` (0-based) is written
``g + 1`` and its inverse ``-(g + 1)``.  The ASCII surface syntax maps the
generator letters of an alphabet (``a``, ``b``, ... by default) to generators
and their upper-case forms to inverses; ``1`` is the empty word.
"""

from __future__ import annotations

import string
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

Word = tuple[int, ...]
WordLike = Union[str, Sequence[int]]

EMPTY: Word = ()
MAX_GENERATORS = 26


class PresentationError(ValueError):
    """Raised for malformed words, relators or presentation files."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


# -- letters ----------------------------------------------------------------

def letter(generator: int, sign: int = 1) -> int:
    if generator < 0 or sign not in (1, -1):
        raise ValueError(f"bad letter ({generator}, {sign})")
    return sign * (generator + 1)


def generator_of(x: int) -> int:
    return abs(x) - 1


def sign_of(x: int) -> int:
    return 1 if x > 0 else -1


def letter_key(x: int) -> int:
    """Sort key ordering letters a < A < b < B < ..."""
    return 2 * (abs(x) - 1) + (x < 0)


def word_key(w: Sequence[int]) -> tuple:
    return tuple(letter_key(x) for x in w)


# -- parsing and formatting --------------------------------------------------

def default_alphabet(num_generators: int) -> str:
    if num_generators > MAX_GENERATORS:
        raise PresentationError(f"at most {MAX_GENERATORS} generators are supported")
    return string.ascii_lowercase[:num_generators]


def parse_word(text: str, alphabet: str | None = None) -> Word:
    """Parse ASCII syntax.  Without an alphabet, ``a..z`` are generators 0..25."""
    text = text.strip()
    if text in ("", "1"):
        return EMPTY
    out = []
    for ch in text:
        low = ch.lower()
        if alphabet is None:
            if low not in string.ascii_lowercase:
                raise PresentationError(f"invalid letter {ch!r} in {text!r}")
            g = ord(low) - ord("a")
        else:
            g = alphabet.find(low)
            if g < 0 or not ch.isalpha():
                raise PresentationError(f"letter {ch!r} not in alphabet {alphabet!r}")
        out.append(g + 1 if ch.islower() else -(g + 1))
    return tuple(out)


def format_word(w: Sequence[int], alphabet: str | None = None) -> str:
    if not w:
        return "1"
    if alphabet is None:
        alphabet = string.ascii_lowercase
    chars = []
    for x in w:
        ch = alphabet[abs(x) - 1]
        chars.append(ch if x > 0 else ch.upper())
    return "".join(chars)


def as_word(w: WordLike, alphabet: str | None = None) -> Word:
    if isinstance(w, str):
        return parse_word(w, alphabet)
    return tuple(int(x) for x in w)


# -- free group operations ---------------------------------------------------

def reduce(w: WordLike) -> Word:
    """Free reduction: cancel adjacent ``x x^-1`` pairs until none remain."""
    stack: list[int] = []
    for x in as_word(w):
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def cyclically_reduce(w: WordLike) -> Word:
    r = reduce(w)
    i, j = 0, len(r) - 1
    while i < j and r[i] == -r[j]:
        i += 1
        j -= 1
    return r[i:j + 1]


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return is_reduced(w) and (len(w) < 2 or w[0] != -w[-1])


def invert(w: WordLike) -> Word:
    return tuple(-x for x in reversed(as_word(w)))


def concat(*words: Sequence[int]) -> Word:
    out: list[int] = []
    for w in words:
        out.extend(w)
    return tuple(out)


def rotations(w: Sequence[int]) -> list[Word]:
    w = tuple(w)
    return [w[i:] + w[:i] for i in range(len(w))] if w else [EMPTY]


def exponent_vector(w: Sequence[int], num_generators: int) -> tuple[int, ...]:
    """Image of ``w`` in the abelianization of the free group."""
    vec = [0] * num_generators
    for x in w:
        vec[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(vec)


def canonical_relator(r: Sequence[int]) -> Word:
    """Least rotation of the lesser of ``r`` and ``r^-1`` (after cyclic reduction)."""
    r = cyclically_reduce(r)
    if not r:
        return EMPTY
    candidates = rotations(r) + rotations(invert(r))
    return min(candidates, key=word_key)


def symmetrize(relators: Iterable[WordLike]) -> frozenset[Word]:
    """Smallest set of cyclically reduced words containing the cyclic reductions
    of ``relators`` that is closed under inversion and cyclic permutation."""
    out: set[Word] = set()
    for r in relators:
        r = cyclically_reduce(r)
        if not r:
            continue
        out.update(rotations(r))
        out.update(rotations(invert(r)))
    return frozenset(out)


# -- presentations -----------------------------------------------------------

@dataclass(frozen=True)
class Presentation:
    """A finite presentation with its symmetrized relator set.

    ``defining`` keeps one canonical representative per symmetrization class and
    is what gets serialized; ``relators`` is the symmetrized set used everywhere
    else, sorted for determinism.
    """

    num_generators: int
    defining: tuple[Word, ...]
    relators: tuple[Word, ...] = field(repr=False)
    identities: tuple[Word, ...] = field(repr=False)
    alphabet: str = ""

    @property
    def total_length(self) -> int:
        """Sum of the lengths of all symmetrized relators."""
        return sum(len(r) for r in self.relators)

    L = total_length

    def parse(self, text: str) -> Word:
        return parse_word(text, self.alphabet)

    def format(self, w: Sequence[int]) -> str:
        return format_word(w, self.alphabet)

    def check_word(self, w: Sequence[int]) -> None:
        for x in w:
            if x == 0 or abs(x) > self.num_generators:
                raise PresentationError(f"letter {x} outside {self.num_generators} generators")

    def with_relators(self, extra: Iterable[WordLike]) -> "Presentation":
        """The quotient presentation obtained by adding relators."""
        extra = [as_word(r, self.alphabet) for r in extra]
        return build_presentation(self.num_generators, list(self.defining) + extra,
                                  alphabet=self.alphabet)

    def __str__(self) -> str:
        rels = ", ".join(self.format(r) for r in self.defining)
        return f"<{' '.join(self.alphabet)} | {rels}>"


def build_presentation(num_generators: int, raw_relators: Iterable[WordLike],
                       alphabet: str | None = None) -> Presentation:
    if alphabet is None:
        alphabet = default_alphabet(num_generators)
    if len(alphabet) != num_generators or len(set(alphabet)) != num_generators:
        raise PresentationError(f"alphabet {alphabet!r} does not name {num_generators} generators")
    classes: set[Word] = set()
    for i, raw in enumerate(raw_relators):
        try:
            r = as_word(raw, alphabet)
        except PresentationError as exc:
            raise PresentationError(f"relator {i}: {exc}", index=i) from None
        if any(x == 0 or abs(x) > num_generators for x in r):
            raise PresentationError(f"relator {i} uses an undeclared generator", index=i)
        c = canonical_relator(r)
        if not c:
            warnings.warn(f"relator {i} is trivial in the free group; dropped", stacklevel=2)
            continue
        classes.add(c)
    defining = tuple(sorted(classes, key=word_key))
    relators = tuple(sorted(symmetrize(defining), key=word_key))
    trivial = []
    for g in range(num_generators):
        trivial.append((g + 1, -(g + 1)))
        trivial.append((-(g + 1), g + 1))
    identities = tuple(trivial) + relators
    return Presentation(num_generators, defining, relators, identities, alphabet)


# -- text format -------------------------------------------------------------

@dataclass(frozen=True)
class PresentationFile:
    """A presentation plus the optional directives carried by the text format."""

    presentation: Presentation
    subgroup: tuple[Word, ...] = ()
    private: tuple[Word, ...] = ()
    w0: Word | None = None
    w1: Word | None = None


def parse_presentation_text(text: str) -> PresentationFile:
    alphabet = None
    rels: list[str] = []
    subs: list[str] = []
    priv: list[str] = []
    named: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key == "gens":
            letters = rest
            if any(len(g) != 1 or not g.islower() or not g.isalpha() for g in letters):
                raise PresentationError(f"line {lineno}: generators must be single lower-case letters")
            if len(set(letters)) != len(letters):
                raise PresentationError(f"line {lineno}: duplicate generator")
            alphabet = "".join(letters)
        elif key in ("rel", "sub", "priv", "w0", "w1"):
            if len(rest) != 1:
                raise PresentationError(f"line {lineno}: expected one word after {key!r}")
            if key in ("w0", "w1"):
                named[key] = rest[0]
            else:
                {"rel": rels, "sub": subs, "priv": priv}[key].append(rest[0])
        else:
            raise PresentationError(f"line {lineno}: unknown directive {key!r}")
    if alphabet is None:
        raise PresentationError("missing 'gens' line")
    pres = build_presentation(len(alphabet), rels, alphabet=alphabet)

    def words(items):
        return tuple(parse_word(s, alphabet) for s in items)

    return PresentationFile(
        pres,
        subgroup=words(subs),
        private=words(priv),
        w0=parse_word(named["w0"], alphabet) if "w0" in named else None,
        w1=parse_word(named["w1"], alphabet) if "w1" in named else None,
    )


def parse_presentation(text: str) -> Presentation:
    return parse_presentation_text(text).presentation


def serialize_presentation(p: Presentation | PresentationFile) -> str:
    pf = p if isinstance(p, PresentationFile) else PresentationFile(p)
    pres = pf.presentation
    lines = ["gens " + " ".join(pres.alphabet)]
    lines += [f"rel {pres.format(r)}" for r in pres.defining]
    lines += [f"sub {pres.format(h)}" for h in pf.subgroup]
    lines += [f"priv {pres.format(s)}" for s in pf.private]
    if pf.w0 is not None:
        lines.append(f"w0 {pres.format(pf.w0)}")
    if pf.w1 is not None:
        lines.append(f"w1 {pres.format(pf.w1)}")
    return "\n".join(lines) + "\n"


def load_presentation_file(path) -> PresentationFile:
    with open(path, encoding="utf-8") as fh:
        return parse_presentation_text(fh.read())
