"""Subset-enumeration solvers, exponential only in the hard hospitals.

Only hospitals with lower quota at least two (``quota hospitals``) need to be
guessed open or closed; unit-lower-quota hospitals can always be added to the
candidate pool since they may legally end up closed.  Subsets are visited by
increasing popcount, then binary value, so minimal open sets are found first.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterator

from .core import Instance, Matching, check_stability
from .errors import RejectedInputError, WrongVariantError
from .openset import (
    gale_shapley_resident_optimal,
    solve_fixed_open_hrqlu,
    solve_fixed_open_strict_noupper,
    solve_fixed_open_ties_noupper,
    top_open_group,
)

OPEN = "open"
CLOSED = "closed"


def _quota_subsets(quota_hospitals: list[str]) -> Iterator[frozenset[str]]:
    by_value = []
    for mask in range(1 << len(quota_hospitals)):
        subset = frozenset(
            h for i, h in enumerate(quota_hospitals) if mask >> i & 1
        )
        by_value.append((bin(mask).count("1"), mask, subset))
    for _, _, subset in sorted(by_value, key=lambda t: (t[0], t[1])):
        yield subset


def iter_subset_verdicts(
    inst: Instance,
) -> Iterator[tuple[frozenset[str], Matching | None]]:
    """Per-subset candidate matchings, for tests that want every verdict."""
    if inst.has_resident_ties() or inst.has_hospital_ties():
        raise WrongVariantError("use solve_fpt_subsets_ties for ties")
    unit = [h for h in inst.hospitals if inst.lower_quota[h] == 1]
    quota = [h for h in inst.hospitals if inst.lower_quota[h] >= 2]
    noupper = not inst.has_bounded_upper()
    for subset in _quota_subsets(quota):
        pool = frozenset(unit) | subset
        if noupper:
            m = _top_choice_candidate(inst, pool)
        else:
            m = gale_shapley_resident_optimal(inst, pool)
        yield subset, (m if check_stability(inst, m).stable else None)


def _top_choice_candidate(inst: Instance, pool: frozenset[str]) -> Matching:
    m: Matching = {}
    for r in inst.residents:
        best = None
        best_rank = None
        for h, rank in inst.accepted_hospitals(r).items():
            if h in pool and (best is None or rank < best_rank):
                best, best_rank = h, rank
        if best is not None:
            m[r] = best
    return m


def solve_fpt_subsets(inst: Instance) -> Matching | None:
    """Strict-preference solver enumerating open sets of quota hospitals."""
    for _, m in iter_subset_verdicts(inst):
        if m is not None:
            return m
    return None


def solve_fpt_subsets_ties(inst: Instance) -> Matching | None:
    """Ties solver (unbounded upper quotas) enumerating quota-hospital subsets.

    For each guessed subset, residents preferring some unit hospital to all
    guessed-open quota hospitals may take it, and the rest is the fixed-open
    machinery with matching copies only for the guessed subset.
    """
    if inst.has_bounded_upper():
        raise WrongVariantError("ties subset solver needs unbounded upper quotas")
    unit = [h for h in inst.hospitals if inst.lower_quota[h] == 1]
    quota = [h for h in inst.hospitals if inst.lower_quota[h] >= 2]
    for subset in _quota_subsets(quota):
        m = _ties_candidate(inst, frozenset(unit), subset)
        if m is not None:
            return m
    return None


def _ties_candidate(
    inst: Instance, unit: frozenset[str], subset: frozenset[str]
) -> Matching | None:
    from .openset import hopcroft_karp  # local import keeps module load light

    pool = unit | subset
    groups = {r: top_open_group(inst, r, pool) for r in inst.residents}
    group_rank = {
        r: (inst.r_rank(r, groups[r][0]) if groups[r] else None)
        for r in inst.residents
    }

    # Residents whose whole top group is unit hospitals are pre-assigned;
    # they still count against coalitions of hospitals they strictly prefer.
    for h in inst.hospitals:
        if h in pool:
            continue
        wanting = sum(
            1
            for r in inst.residents
            if (rank := inst.accepted_hospitals(r).get(h)) is not None
            and (group_rank[r] is None or rank < group_rank[r])
        )
        if wanting >= inst.lower_quota[h]:
            return None

    copies: list[str] = []
    for h in sorted(subset, key=inst.hospital_index):
        copies.extend([h] * inst.lower_quota[h])
    edges = [
        (inst.resident_index(r), j)
        for r in inst.residents
        for j, h in enumerate(copies)
        if h in groups[r]
    ]
    matched = hopcroft_karp(inst.n, len(copies), edges)
    if len(matched) < len(copies):
        return None
    m: Matching = {}
    for u, v in matched:
        m[inst.residents[u]] = copies[v]
    for r in inst.residents:
        if r not in m and groups[r]:
            m[r] = min(groups[r], key=inst.hospital_index)
    return m if check_stability(inst, m).stable else None


def solve_count_open(inst: Instance, k: int, mode: str = OPEN) -> Matching | None:
    """Is there a stable matching with exactly k open (or closed) hospitals?"""
    if mode not in (OPEN, CLOSED):
        raise RejectedInputError(f"mode must be {OPEN!r} or {CLOSED!r}")
    if not 0 <= k <= inst.m:
        raise RejectedInputError(f"count {k} out of range [0, {inst.m}]")
    if inst.has_resident_ties() or inst.has_hospital_ties():
        raise WrongVariantError("counting solver needs strict preferences")
    size = k if mode == OPEN else inst.m - k
    noupper = not inst.has_bounded_upper()
    for subset in combinations(inst.hospitals, size):
        if noupper:
            m = solve_fixed_open_strict_noupper(inst, subset)
        else:
            m = solve_fixed_open_hrqlu(inst, subset)
        if m is not None:
            return m
    return None
