"""Unit-cost Levenshtein distance over Unicode scalar values."""

from __future__ import annotations


def levenshtein(a: str, b: str) -> int:
    """Minimal number of single-character insertions, deletions, and
    substitutions turning a into b."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a

    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(
                previous[j] + 1,        # delete from a
                current[j - 1] + 1,     # insert into a
                previous[j - 1] + cost, # substitute
            ))
        previous = current
    return previous[-1]
