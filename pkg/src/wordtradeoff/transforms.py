"""Seeded destructive text transforms.

Three book variants feed the entropy comparison: the verse-shuffled
original, a word-order-destroyed version (tokens permuted within each
verse, or across the whole book), and a word-structure-masked version
(every word type of length >= 2 replaced by a unique random
same-length string over the book's own alphabet). All transforms
preserve the basic quantitative profile of the text: character count,
token count, per-token lengths and the type-token frequency spectrum.

Randomization is bit-reproducible. Task seeds are derived from
(master seed, translation, book, replicate, purpose) by a documented
avalanche construction, and all draws come from a fixed xorshift64*
generator with unbiased rejection sampling; permutations use the
backward Fisher-Yates walk. The byte-level recipe lives in
``docs/seeds.md`` so independent implementations can agree exactly.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, replace
from typing import IO, Iterable, Mapping

from .corpus import Book, SymbolSequence, Verse, flatten

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_GOLDEN = 0x9E3779B97F4A7C15

PURPOSE_TAGS = ("verse_shuffle", "order_shuffle", "mask_draw")
ORDER_SCOPES = ("per_verse", "per_book")
VARIANT_KINDS = ("original", "order_destroyed", "structure_masked")


class MaskSpaceExhaustedError(ValueError):
    """Alphabet too small to give every word type of some length a unique mask."""

    def __init__(self, length: int, types: int, alphabet_size: int):
        self.length = length
        self.types = types
        self.alphabet_size = alphabet_size
        super().__init__(
            f"cannot assign {types} distinct masks of length {length} over a "
            f"{alphabet_size}-character mask alphabet"
        )


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one randomization task for seed derivation."""

    master_seed: int
    translation_id: str
    book_id: int
    replicate_index: int = 0
    purpose: str = "verse_shuffle"

    def __post_init__(self) -> None:
        if self.purpose not in PURPOSE_TAGS:
            raise ValueError(f"unknown purpose tag {self.purpose!r}")
        if self.replicate_index < 0:
            raise ValueError("replicate_index must be >= 0")


def _mix64(z: int) -> int:
    # splitmix64 finalizer; full 64-bit avalanche.
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(spec: SeedSpec) -> int:
    """Derive the 64-bit task seed for one randomization task.

    The fields are serialized length-prefixed (see docs/seeds.md),
    hashed with 64-bit FNV-1a and finalized with the splitmix64
    avalanche; a zero result is replaced by a fixed nonzero constant so
    the stream generator is always valid.
    """
    blob = bytearray((spec.master_seed & _MASK64).to_bytes(8, "little"))
    for part in (
        spec.translation_id.encode("utf-8"),
        (spec.book_id & _MASK64).to_bytes(8, "little"),
        (spec.replicate_index & _MASK64).to_bytes(8, "little"),
        spec.purpose.encode("utf-8"),
    ):
        blob += len(part).to_bytes(8, "little")
        blob += part
    h = _FNV_OFFSET
    for byte in blob:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return _mix64(h) or _GOLDEN


class Xorshift64Star:
    """xorshift64* stream generator (fixed constants 12, 25, 27).

    Every randomized transform in this package draws from this
    generator so runs are reproducible bit-for-bit across platforms and
    implementations.
    """

    __slots__ = ("state",)

    MULTIPLIER = 0x2545F4914F6CDD1D

    def __init__(self, seed: int):
        self.state = (seed & _MASK64) or _GOLDEN

    def next_u64(self) -> int:
        s = self.state
        s ^= s >> 12
        s = (s ^ (s << 25)) & _MASK64
        s ^= s >> 27
        self.state = s
        return (s * self.MULTIPLIER) & _MASK64

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by threshold rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, items: list) -> None:
        """In-place backward Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


@dataclass(frozen=True)
class MaskTable:
    """Word-type to mask assignment for one book.

    Masks have the length of their type, are pairwise distinct, and are
    drawn from the book's alphabet minus whitespace and control
    characters. Types of length 1 carry no internal structure and are
    absent.
    """

    table: Mapping[str, str]
    mask_alphabet: tuple[str, ...]
    seed: int

    def apply(self, token: str) -> str:
        if len(token) < 2:
            return token
        mask = self.table.get(token)
        if mask is None:
            raise ValueError(
                f"token {token!r} is not covered by this mask table; the table "
                "was built from a different lexicon"
            )
        return mask

    def inverse(self) -> dict[str, str]:
        return {mask: word for word, mask in self.table.items()}


@dataclass(frozen=True)
class BookVariant:
    """One transformed rendering of a book, ready for estimation."""

    kind: str
    sequence: SymbolSequence
    seeds: Mapping[str, int]
    mask_table: MaskTable | None = None

    def __post_init__(self) -> None:
        if self.kind not in VARIANT_KINDS:
            raise ValueError(f"unknown variant kind {self.kind!r}")


def shuffle_verses(book: Book, seed: int) -> Book:
    """Permute the verse order of a book (verse contents untouched)."""
    verses = list(book.verses)
    Xorshift64Star(seed).shuffle(verses)
    return replace(book, verses=tuple(verses))


def original_variant(book: Book, seeds: Mapping[str, int] | None = None) -> BookVariant:
    """Wrap a (typically verse-shuffled) book as the untransformed variant."""
    return BookVariant(kind="original", sequence=flatten(book), seeds=dict(seeds or {}))


def destroy_word_order(book: Book, seed: int, scope: str = "per_verse") -> BookVariant:
    """Permute token order, leaving every token itself intact.

    ``per_verse`` permutes each verse's tokens independently;
    ``per_book`` permutes the token stream of the whole book and lays
    the tokens back into the original verse slots (same token count per
    verse), so the flattened character count is unchanged in both
    scopes.
    """
    if scope not in ORDER_SCOPES:
        raise ValueError(f"unknown order-destruction scope {scope!r}")
    rng = Xorshift64Star(seed)
    if scope == "per_verse":
        new_verses = []
        for verse in book.verses:
            tokens = verse.text.split(" ")
            rng.shuffle(tokens)
            new_verses.append(Verse(verse.ref, " ".join(tokens)))
    else:
        counts = [v.text.count(" ") + 1 for v in book.verses]
        tokens = [t for v in book.verses for t in v.text.split(" ")]
        rng.shuffle(tokens)
        new_verses = []
        offset = 0
        for verse, k in zip(book.verses, counts):
            new_verses.append(Verse(verse.ref, " ".join(tokens[offset : offset + k])))
            offset += k
    shuffled = replace(book, verses=tuple(new_verses))
    return BookVariant(
        kind="order_destroyed",
        sequence=flatten(shuffled),
        seeds={"order_shuffle": seed},
    )


def _maskable(char: str) -> bool:
    return char not in " \t\n\r" and unicodedata.category(char) != "Cc"


def build_mask_table(
    lexicon: Mapping[str, int] | Iterable[str],
    alphabet: Iterable[str],
    seed: int,
) -> MaskTable:
    """Draw a unique equal-length mask for every word type of length >= 2.

    Types are processed in code-point lexicographic order so the
    assignment does not depend on iteration order; each mask is drawn
    character by character from the usable alphabet with whole-mask
    rejection on collision. A pigeonhole check fails fast when some
    type length has more types than the alphabet can distinguish.
    """
    types = sorted(t for t in lexicon if len(t) >= 2)
    alpha = sorted(c for c in set(alphabet) if _maskable(c))
    by_length = Counter(len(t) for t in types)
    for length, count in sorted(by_length.items()):
        if len(alpha) ** length < count:
            raise MaskSpaceExhaustedError(length, count, len(alpha))

    rng = Xorshift64Star(seed)
    k = len(alpha)
    used: set[str] = set()
    table: dict[str, str] = {}
    for word in types:
        while True:
            mask = "".join(alpha[rng.randbelow(k)] for _ in range(len(word)))
            if mask not in used:
                break
        used.add(mask)
        table[word] = mask
    return MaskTable(table=table, mask_alphabet=tuple(alpha), seed=seed)


def mask_word_structure(book: Book, table: MaskTable) -> BookVariant:
    """Replace every token of a length >= 2 type by its mask, everywhere.

    Token positions, spaces and verse boundaries are untouched, so the
    character count, the per-token lengths and the frequency spectrum
    survive; only the internal make-up of words is destroyed.
    """
    new_verses = [
        Verse(v.ref, " ".join(table.apply(t) for t in v.text.split(" ")))
        for v in book.verses
    ]
    masked = replace(book, verses=tuple(new_verses))
    return BookVariant(
        kind="structure_masked",
        sequence=flatten(masked),
        seeds={"mask_draw": table.seed},
        mask_table=table,
    )


def dump_mask_table(table: MaskTable, fh: IO[str]) -> None:
    """Write the ``type<TAB>mask`` audit dump."""
    for word in sorted(table.table):
        fh.write(f"{word}\t{table.table[word]}\n")
