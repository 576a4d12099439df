"""Shared test helpers: deterministic random-book generation."""

from __future__ import annotations

import random

from wordtradeoff.corpus import Book, Verse, VerseRef

#: A small multilingual-ish character pool (includes multi-byte letters).
LETTER_POOL = "abcdefghijklmnoprstuvz" + "äöüßéñčš" + "бгд"


def random_book(
    seed: int,
    max_verses: int = 12,
    max_tokens: int = 10,
    max_token_len: int = 8,
    book_id: int = 40,
    alphabet: str | None = None,
) -> Book:
    """A random but valid book: nonempty verses of space-separated tokens."""
    rng = random.Random(seed)
    pool = alphabet or LETTER_POOL[: rng.randint(3, len(LETTER_POOL))]
    verses = []
    for v_idx in range(1, rng.randint(1, max_verses) + 1):
        tokens = [
            "".join(rng.choice(pool) for _ in range(rng.randint(1, max_token_len)))
            for _ in range(rng.randint(1, max_tokens))
        ]
        verses.append(Verse(VerseRef(book_id, 1, v_idx), " ".join(tokens)))
    return Book(
        book_id=book_id,
        verses=tuple(verses),
        translation_id=f"rand{seed}",
        language="rnd",
    )
