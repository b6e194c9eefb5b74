"""Shared test helpers and reference oracles."""

from __future__ import annotations

import functools


def naive_levenshtein(a, b) -> int:
    """Reference edit distance: plain recursion with memoization.

    Deliberately independent of the production dynamic program; only
    usable for short sequences.
    """
    a = tuple(a)
    b = tuple(b)

    @functools.lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        if a[i] == b[j]:
            return rec(i + 1, j + 1)
        return 1 + min(rec(i + 1, j),      # delete
                       rec(i, j + 1),      # insert
                       rec(i + 1, j + 1))  # substitute
    try:
        return rec(0, 0)
    finally:
        rec.cache_clear()
