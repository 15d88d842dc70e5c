"""Word-problem public-key scheme, its conjugacy variant, and the generic attack.

The public key is a presentation ``<X | R>`` with two words ``w0``, ``w1``; the
private key is a set ``S`` of extra relators such that ``w0 != w1`` in
``<X | R u S>``.  A bit is encrypted by randomly rewriting ``w_bit`` in the
public group.  The legitimate receiver races two solvers in the quotient; the
attacker races the same two solvers in the public group, which works just as
well on random ciphertexts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .challengers import InstanceTrace, random_conjugate, random_equal_word
from .freegroup import (
    Presentation,
    PresentationFile,
    Word,
    as_word,
    build_presentation,
    cyclically_reduce,
    parse_presentation_text,
    serialize_presentation,
)
from .models import AbelianModel
from .solvers import DEFAULT_MAX_ITER, lockstep

DEFAULT_BUDGET = DEFAULT_MAX_ITER


class InvalidKeyError(ValueError):
    """Raised for keys that cannot decrypt (empty ``S`` or ``w0 = w1`` in the quotient)."""


@dataclass(frozen=True)
class PublicKey:
    presentation: Presentation
    w0: Word
    w1: Word

    def word(self, bit: int) -> Word:
        if bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        return self.w1 if bit else self.w0


@dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    private: tuple[Word, ...]

    @property
    def quotient(self) -> Presentation:
        return self.public.presentation.with_relators(self.private)

    def validate(self, model=None) -> None:
        """Check ``S`` is non-empty and ``w0 != w1`` in the quotient.

        ``model`` must decide equality in the quotient exactly; the default
        abelian model is exact only when the quotient is abelian.
        """
        if not self.private:
            raise InvalidKeyError("private relator set S is empty")
        model = model or AbelianModel.from_presentation(self.quotient)
        if model.equal(self.public.w0, self.public.w1):
            raise InvalidKeyError("w0 and w1 coincide in the private quotient")


def make_keypair(p: Presentation, w0, w1, private: Sequence, model=None) -> KeyPair:
    pub = PublicKey(p, as_word(w0, p.alphabet), as_word(w1, p.alphabet))
    key = KeyPair(pub, tuple(as_word(s, p.alphabet) for s in private))
    key.validate(model)
    return key


def demo_keypair() -> KeyPair:
    """``G = <a,b | abAB>`` (free abelian), ``S = {aa, bb}``, ``w0 = a``, ``w1 = b``."""
    return make_keypair(build_presentation(2, ["abAB"]), "a", "b", ["aa", "bb"])


def serialize_key(key: KeyPair) -> str:
    pub = key.public
    return serialize_presentation(PresentationFile(pub.presentation, private=key.private,
                                                   w0=pub.w0, w1=pub.w1))


def parse_key(text: str, model=None) -> KeyPair:
    pf = parse_presentation_text(text)
    if pf.w0 is None or pf.w1 is None:
        raise InvalidKeyError("key file needs w0 and w1 lines")
    key = KeyPair(PublicKey(pf.presentation, pf.w0, pf.w1), pf.private)
    if key.private:
        key.validate(model)
    return key


def public_only(key: KeyPair) -> str:
    pub = key.public
    return serialize_presentation(PresentationFile(pub.presentation, w0=pub.w0, w1=pub.w1))


# -- word-problem scheme -----------------------------------------------------

def encrypt_traced(pub: PublicKey, bit: int, n: int, rng=None) -> tuple[Word, InstanceTrace]:
    return random_equal_word(pub.presentation, pub.word(bit), n, rng=rng)


def encrypt(pub: PublicKey, bit: int, n: int, rng=None) -> Word:
    return encrypt_traced(pub, bit, n, rng)[0]


def decrypt(key: KeyPair, c, step_budget: int = DEFAULT_BUDGET) -> int | None:
    """Decode in the private quotient; ``None`` when the budget runs out."""
    pub = key.public
    return lockstep(key.quotient, pub.w0, pub.w1, c, step_budget)[0]


def attack(pub: PublicKey, c, step_budget: int = DEFAULT_BUDGET) -> int | None:
    """Decode using only the public presentation."""
    return attack_rounds(pub, c, step_budget)[0]


def attack_rounds(pub: PublicKey, c, step_budget: int = DEFAULT_BUDGET) -> tuple[int | None, int]:
    return lockstep(pub.presentation, pub.w0, pub.w1, c, step_budget)


# -- conjugacy scheme --------------------------------------------------------

def encrypt_conj_traced(pub: PublicKey, bit: int, n: int, rng=None) -> tuple[Word, InstanceTrace]:
    w = pub.word(bit)
    if not cyclically_reduce(w):
        raise ValueError("the conjugacy scheme needs words that are nontrivial in F(X)")
    return random_conjugate(pub.presentation, w, n, rng=rng)


def encrypt_conj(pub: PublicKey, bit: int, n: int, rng=None) -> Word:
    return encrypt_conj_traced(pub, bit, n, rng)[0]


def decrypt_conj(key: KeyPair, c, step_budget: int = DEFAULT_BUDGET) -> int | None:
    pub = key.public
    return lockstep(key.quotient, pub.w0, pub.w1, c, step_budget, conjugacy=True)[0]


def attack_conj(pub: PublicKey, c, step_budget: int = DEFAULT_BUDGET) -> int | None:
    return lockstep(pub.presentation, pub.w0, pub.w1, c, step_budget, conjugacy=True)[0]
