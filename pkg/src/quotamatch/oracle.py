"""Exponential-time ground truth: enumerate feasible and stable matchings.

The enumeration assigns residents in id order, each to unmatched or to one of
its accepted hospitals in instance order, so the stream is lexicographic and
tests can assert exact lists.  Two prunes keep gadget-sized instances
tractable: upper quotas are enforced on the fly, and a hospital that can no
longer reach its lower quota from the remaining residents kills the branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .core import Instance, Matching, check_stability
from .errors import EnumerationOverflowError

DEFAULT_CAP = 10**6


def enumerate_feasible(inst: Instance, cap: int = DEFAULT_CAP) -> Iterator[Matching]:
    """Yield every feasible matching exactly once, lexicographically.

    Raises EnumerationOverflowError as soon as more than ``cap`` matchings
    would be produced; truncation is never silent.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    residents = inst.residents
    options = [
        [None] + [h for h in inst.hospitals if h in inst.accepted_hospitals(r)]
        for r in residents
    ]
    lower = {h: inst.lower_quota[h] for h in inst.hospitals}
    upper = {h: inst.upper_quota[h] for h in inst.hospitals}
    # Residents still to come that accept h; drives the lower-quota prune.
    remaining = {h: 0 for h in inst.hospitals}
    for r in residents:
        for h in inst.accepted_hospitals(r):
            remaining[h] += 1
    count = {h: 0 for h in inst.hospitals}
    assignment: Matching = {}
    yielded = 0

    def doomed(hs) -> bool:
        # A hospital someone already chose that can no longer reach its
        # lower quota from the residents still to come kills the branch.
        return any(0 < count[h] and count[h] + remaining[h] < lower[h] for h in hs)

    def recurse(i: int) -> Iterator[Matching]:
        nonlocal yielded
        if i == len(residents):
            if all(count[h] == 0 or count[h] >= lower[h] for h in inst.hospitals):
                yielded += 1
                if yielded > cap:
                    raise EnumerationOverflowError(
                        f"more than {cap} feasible matchings"
                    )
                yield dict(assignment)
            return
        r = residents[i]
        accepted = inst.accepted_hospitals(r)
        for h in accepted:
            remaining[h] -= 1
        for choice in options[i]:
            if choice is None:
                if not doomed(accepted):
                    yield from recurse(i + 1)
            else:
                if count[choice] + 1 > upper[choice]:
                    continue
                count[choice] += 1
                if not doomed(accepted):
                    assignment[r] = choice
                    yield from recurse(i + 1)
                    del assignment[r]
                count[choice] -= 1
        for h in accepted:
            remaining[h] += 1

    return recurse(0)


def enumerate_stable(inst: Instance, cap: int = DEFAULT_CAP) -> list[Matching]:
    """All stable matchings, in the enumeration order of the feasible stream."""
    return [
        m for m in enumerate_feasible(inst, cap) if check_stability(inst, m).stable
    ]


def find_any_stable(inst: Instance, cap: int = 10**7) -> Matching | None:
    """First stable matching in enumeration order, or None if there is none.

    Unlike :func:`enumerate_stable` this prunes with stability itself: once
    every acceptor of a hospital has been placed, its load is final, so a
    guaranteed blocking pair or coalition kills the branch.  ``cap`` bounds
    search nodes rather than yielded matchings.
    """
    residents = inst.residents
    n = len(residents)
    options = [
        [None] + [h for h in inst.hospitals if h in inst.accepted_hospitals(r)]
        for r in residents
    ]
    lower = {h: inst.lower_quota[h] for h in inst.hospitals}
    upper = {h: inst.upper_quota[h] for h in inst.hospitals}
    last_acceptor = {h: -1 for h in inst.hospitals}
    for i, r in enumerate(residents):
        for h in inst.accepted_hospitals(r):
            last_acceptor[h] = i
    finalized_at: dict[int, list[str]] = {}
    for h, i in last_acceptor.items():
        finalized_at.setdefault(i, []).append(h)
    count = {h: 0 for h in inst.hospitals}
    remaining = {h: 0 for h in inst.hospitals}
    for r in residents:
        for h in inst.accepted_hospitals(r):
            remaining[h] += 1
    assignment: Matching = {}
    nodes = 0

    def blocked_when_final(h: str, upto: int) -> bool:
        k = count[h]
        if k == 0:
            wanting = sum(
                1
                for i in range(upto + 1)
                if h in inst.accepted_hospitals(residents[i])
                and inst.r_rank(residents[i], h)
                < inst.r_rank(residents[i], assignment.get(residents[i]))
            )
            return wanting >= lower[h]
        assigned = [r for r, hh in assignment.items() if hh == h]
        for i in range(upto + 1):
            r = residents[i]
            if h not in inst.accepted_hospitals(r):
                continue
            if inst.r_rank(r, h) >= inst.r_rank(r, assignment.get(r)):
                continue
            if k < upper[h]:
                return True
            if h not in inst.indifferent and any(
                inst.h_rank(h, r) < inst.h_rank(h, r2) for r2 in assigned
            ):
                return True
        return False

    def recurse(i: int) -> Matching | None:
        nonlocal nodes
        if i == n:
            if check_stability(inst, assignment).stable:
                return dict(assignment)
            return None
        r = residents[i]
        accepted = inst.accepted_hospitals(r)
        for h in accepted:
            remaining[h] -= 1
        try:
            for choice in options[i]:
                nodes += 1
                if nodes > cap:
                    raise EnumerationOverflowError("stable search exceeded its cap")
                if choice is not None:
                    if count[choice] + 1 > upper[choice]:
                        continue
                    count[choice] += 1
                    assignment[r] = choice
                doomed = any(
                    0 < count[h] and count[h] + remaining[h] < lower[h]
                    for h in accepted
                )
                if not doomed and not any(
                    blocked_when_final(h, i) for h in finalized_at.get(i, ())
                ):
                    found = recurse(i + 1)
                    if found is not None:
                        return found
                if choice is not None:
                    count[choice] -= 1
                    del assignment[r]
            return None
        finally:
            for h in accepted:
                remaining[h] += 1
    return recurse(0)


@dataclass
class RuralReport:
    """Summary of how uniform the stable matchings of an instance are."""

    stable_count: int
    matched_set_uniform: bool
    open_count_uniform: bool
    matched_residents: frozenset[str] | None
    open_counts: list[int]


def rural_check(inst: Instance, cap: int = DEFAULT_CAP) -> RuralReport:
    """Check the rural-hospitals property over all stable matchings.

    The property (same matched residents, same number of open hospitals) is
    guaranteed only when all lower quotas are at most two, but the report can
    be computed for any instance.
    """
    stables = enumerate_stable(inst, cap)
    matched_sets = [frozenset(m.keys()) for m in stables]
    open_counts = [len(set(m.values())) for m in stables]
    matched_uniform = len(set(matched_sets)) <= 1
    open_uniform = len(set(open_counts)) <= 1
    return RuralReport(
        stable_count=len(stables),
        matched_set_uniform=matched_uniform,
        open_count_uniform=open_uniform,
        matched_residents=matched_sets[0] if matched_uniform and stables else None,
        open_counts=open_counts,
    )
