"""Deciders for "stable matching opening exactly this hospital set".

Three variant shapes are covered: unbounded upper quotas with strict
preferences (assign everyone to their top open choice), bounded upper quotas
with strict preferences (resident-optimal deferred acceptance plus quota and
stability checks), and unbounded upper quotas with ties (a reduction to
bipartite maximum matching).  All functions are pure.
"""

from __future__ import annotations

from collections import deque

from .core import Instance, Matching, check_stability, hospital_loads
from .errors import InternalInvariantError, RejectedInputError, WrongVariantError

OpenSet = frozenset


def _require_strict(inst: Instance) -> None:
    if inst.has_resident_ties():
        raise WrongVariantError("resident preferences contain ties")


def _require_open_subset(inst: Instance, open_set) -> frozenset[str]:
    open_set = frozenset(open_set)
    unknown = open_set - set(inst.hospitals)
    if unknown:
        raise RejectedInputError(f"unknown hospitals in open set: {sorted(unknown)}")
    return open_set


def solve_fixed_open_strict_noupper(inst: Instance, open_set) -> Matching | None:
    """Unbounded-upper shape: everyone goes to her best open hospital.

    Returns the induced matching iff it is feasible, opens exactly the given
    set, and is stable; otherwise None.
    """
    _require_strict(inst)
    if inst.has_bounded_upper():
        raise WrongVariantError("upper quotas are bounded; use the general solver")
    open_set = _require_open_subset(inst, open_set)

    m: Matching = {}
    for r in inst.residents:
        best = None
        best_rank = None
        for h, rank in inst.accepted_hospitals(r).items():
            if h in open_set and (best is None or rank < best_rank):
                best, best_rank = h, rank
        if best is not None:
            m[r] = best
    loads = hospital_loads(inst, m)
    if {h for h in inst.hospitals if loads[h]} != open_set:
        return None
    report = check_stability(inst, m)
    return m if report.stable else None


def gale_shapley_resident_optimal(inst: Instance, open_set) -> Matching:
    """Resident-proposing deferred acceptance over the open hospitals.

    Lower quotas are ignored; hospitals keep their best proposals up to the
    upper quota.  The result is the unique resident-optimal stable matching
    of the upper-quota-only restriction.
    """
    _require_strict(inst)
    if inst.has_hospital_ties():
        raise WrongVariantError("hospital preferences contain ties")
    open_set = _require_open_subset(inst, open_set)

    next_choice = {r: 0 for r in inst.residents}
    choices = {
        r: [h for g in inst.resident_prefs.get(r, ()) for h in g if h in open_set]
        for r in inst.residents
    }
    held: dict[str, list[str]] = {h: [] for h in open_set}
    free = deque(inst.residents)
    while free:
        r = free.popleft()
        while next_choice[r] < len(choices[r]):
            h = choices[r][next_choice[r]]
            cap = min(inst.effective_upper(h), inst.n)
            if len(held[h]) < cap:
                held[h].append(r)
                break
            worst = max(held[h], key=lambda x: inst.h_rank(h, x))
            if inst.h_rank(h, r) < inst.h_rank(h, worst):
                held[h].remove(worst)
                held[h].append(r)
                next_choice[worst] += 1
                free.append(worst)
                break
            next_choice[r] += 1
    return {r: h for h, rs in held.items() for r in rs}


def solve_fixed_open_hrqlu(inst: Instance, open_set) -> Matching | None:
    """Bounded-upper shape: deferred acceptance, then quota and stability checks.

    By the rural-hospitals argument the resident-optimal matching of the
    restriction decides the question: it is returned iff every guessed-open
    hospital meets its quota band and no pair or coalition blocks.
    """
    open_set = _require_open_subset(inst, open_set)
    m = gale_shapley_resident_optimal(inst, open_set)
    loads = hospital_loads(inst, m)
    for h in open_set:
        if not inst.lower_quota[h] <= len(loads[h]) <= inst.upper_quota[h]:
            return None
    report = check_stability(inst, m)
    return m if report.stable else None


def hopcroft_karp(
    left_size: int, right_size: int, edges: list[tuple[int, int]]
) -> list[tuple[int, int]]:
    """Maximum-cardinality matching of a bipartite graph given as an edge list.

    Vertices are 0-based indices on each side.  The matching itself may not
    be unique, but its size is.
    """
    adj: list[list[int]] = [[] for _ in range(left_size)]
    for u, v in edges:
        if not (0 <= u < left_size and 0 <= v < right_size):
            raise RejectedInputError(f"edge ({u}, {v}) out of range")
        adj[u].append(v)
    INF = float("inf")
    match_l: list[int | None] = [None] * left_size
    match_r: list[int | None] = [None] * right_size
    dist = [INF] * left_size

    def bfs() -> bool:
        queue = deque()
        for u in range(left_size):
            if match_l[u] is None:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        reachable_free = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w is None:
                    reachable_free = True
                elif dist[w] is INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return reachable_free

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w is None or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = INF
        return False

    while bfs():
        for u in range(left_size):
            if match_l[u] is None:
                dfs(u)
    return [(u, v) for u, v in enumerate(match_l) if v is not None]


def top_open_group(inst: Instance, r: str, open_set) -> list[str]:
    """The best tie group of ``r`` restricted to the open hospitals."""
    for group in inst.resident_prefs.get(r, ()):
        hits = [h for h in group if h in open_set]
        if hits:
            return hits
    return []


def solve_fixed_open_ties_noupper(inst: Instance, open_set) -> Matching | None:
    """Ties shape with unbounded upper quotas, via bipartite matching.

    Every resident must land in her top open tie group, so the only freedom
    is which member gets her; lower quotas are covered by matching residents
    onto l(h) copies of each open hospital, and leftovers go to the first
    member of their group.
    """
    if inst.has_bounded_upper():
        raise WrongVariantError("upper quotas are bounded; ties solver needs HR-Q_L-T")
    open_set = _require_open_subset(inst, open_set)

    groups = {r: top_open_group(inst, r, open_set) for r in inst.residents}
    group_rank = {
        r: (inst.r_rank(r, groups[r][0]) if groups[r] else None)
        for r in inst.residents
    }

    # A closed hospital strictly preferred by l(h) residents to their best
    # open group can always be opened, whatever the assignment.
    for h in inst.hospitals:
        if h in open_set:
            continue
        wanting = 0
        for r in inst.residents:
            rank = inst.accepted_hospitals(r).get(h)
            if rank is None:
                continue
            if group_rank[r] is None or rank < group_rank[r]:
                wanting += 1
        if wanting >= inst.lower_quota[h]:
            return None

    open_list = sorted(open_set, key=inst.hospital_index)
    copies: list[str] = []
    for h in open_list:
        copies.extend([h] * inst.lower_quota[h])
    by_resident = {r: i for i, r in enumerate(inst.residents)}
    edges = [
        (by_resident[r], j)
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
    if not check_stability(inst, m).stable:
        raise InternalInvariantError("ties fixed-open construction is unstable")
    return m
