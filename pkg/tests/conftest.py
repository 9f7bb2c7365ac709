"""Shared helpers: seeded random instance generators for the oracle corpora."""

from __future__ import annotations

import random

from quotamatch.core import Instance, UNBOUNDED


def random_instance(
    rng: random.Random,
    n_max: int = 7,
    m_max: int = 5,
    max_lower: int = 2,
    ties: bool = False,
    ha: bool = False,
    unbounded_only: bool = False,
) -> Instance:
    """A random instance with mixed density, quotas, and upper bounds."""
    n = rng.randint(1, n_max)
    m = rng.randint(1, m_max)
    residents = tuple(f"r{i}" for i in range(1, n + 1))
    hospitals = tuple(f"h{j}" for j in range(1, m + 1))
    density = rng.choice([0.3, 0.5, 0.8])

    accepts: dict[str, list[str]] = {h: [] for h in hospitals}
    r_accepts: dict[str, list[str]] = {r: [] for r in residents}
    for r in residents:
        for h in hospitals:
            if rng.random() < density:
                accepts[h].append(r)
                r_accepts[r].append(h)

    lower = {}
    upper = {}
    for h in hospitals:
        lo = rng.randint(1, max_lower)
        if unbounded_only or rng.random() < 0.5:
            up = UNBOUNDED
        else:
            up = rng.randint(lo, max(lo, n + 1))
        lower[h] = lo
        upper[h] = up

    def shuffled_groups(pool: list[str]) -> list[list[str]]:
        pool = pool[:]
        rng.shuffle(pool)
        if not ties:
            return [[x] for x in pool]
        groups: list[list[str]] = []
        i = 0
        while i < len(pool):
            size = min(len(pool) - i, rng.choice([1, 1, 2, 3]))
            groups.append(pool[i : i + size])
            i += size
        return groups

    resident_prefs = {r: shuffled_groups(r_accepts[r]) for r in residents}
    if ha:
        hospital_prefs = {h: [accepts[h]] if accepts[h] else [] for h in hospitals}
        indifferent = frozenset(hospitals)
    else:
        hospital_prefs = {h: shuffled_groups(accepts[h]) for h in hospitals}
        indifferent = frozenset()
    return Instance(
        residents=residents,
        hospitals=hospitals,
        lower_quota=lower,
        upper_quota=upper,
        resident_prefs=resident_prefs,
        hospital_prefs=hospital_prefs,
        indifferent=indifferent,
    )


def cycle_flavored_instance(
    rng: random.Random, extras: int = 2, ties: bool = False, ha: bool = False
) -> Instance:
    """Three quota-two hospitals in the no-stable-matching cycle pattern,
    plus a few random extra residents that may or may not break the cycle."""
    n = 3 + rng.randint(0, extras)
    residents = tuple(f"r{i}" for i in range(1, n + 1))
    hospitals = ("h1", "h2", "h3")
    prefs: dict[str, list] = {
        "r1": ["h1", "h2"],
        "r2": ["h2", "h3"],
        "r3": ["h3", "h1"],
    }
    accepts = {"h1": ["r1", "r3"], "h2": ["r1", "r2"], "h3": ["r2", "r3"]}
    for r in residents[3:]:
        pool = [h for h in hospitals if rng.random() < 0.5]
        rng.shuffle(pool)
        if ties and len(pool) > 1 and rng.random() < 0.5:
            prefs[r] = [pool]
        else:
            prefs[r] = pool
        for h in pool:
            accepts[h].append(r)
    if ha:
        hospital_prefs = {h: [accepts[h]] for h in hospitals}
        indifferent = frozenset(hospitals)
    else:
        hospital_prefs = {}
        for h in hospitals:
            pool = accepts[h][:]
            rng.shuffle(pool)
            hospital_prefs[h] = pool
        indifferent = frozenset()
    return Instance(
        residents=residents,
        hospitals=hospitals,
        lower_quota={h: 2 for h in hospitals},
        upper_quota={h: UNBOUNDED for h in hospitals},
        resident_prefs=prefs,
        hospital_prefs=hospital_prefs,
        indifferent=indifferent,
    )
