"""Instance and matching model plus feasibility and weak-stability checks.

Every solver in this package works on the same :class:`Instance` shape:
residents and hospitals with symmetric acceptability, per-hospital lower and
upper quotas, and preference lists given as ordered tie groups (singleton
groups encode strict preferences).  Hospitals may instead be flagged
indifferent, in which case they accept an explicit resident set and rank all
of them equally (the house-allocation reading).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import RejectedInputError

ResidentId = str
HospitalId = str
AgentId = str

#: Ordered tie groups; earlier groups are strictly preferred.
PrefList = tuple[tuple[AgentId, ...], ...]

#: A matching maps residents to hospitals; absent residents are unmatched.
Matching = dict[ResidentId, HospitalId]

#: Upper-quota sentinel, strictly greater than every integer.
UNBOUNDED = math.inf


def pref_list(groups) -> PrefList:
    """Normalize a list of tie groups (or plain ids for strict lists)."""
    out = []
    for group in groups:
        if isinstance(group, str):
            out.append((group,))
        else:
            out.append(tuple(group))
    return tuple(out)


@dataclass
class Instance:
    """A hospital-residents instance with lower and upper quotas.

    ``indifferent`` lists hospitals whose preferences are a single tie over
    everyone they accept; their ``hospital_prefs`` entry must be at most one
    tie group.
    """

    residents: tuple[ResidentId, ...]
    hospitals: tuple[HospitalId, ...]
    lower_quota: dict[HospitalId, int]
    upper_quota: dict[HospitalId, float]
    resident_prefs: dict[ResidentId, PrefList]
    hospital_prefs: dict[HospitalId, PrefList]
    indifferent: frozenset[HospitalId] = frozenset()

    _r_rank: dict[ResidentId, dict[HospitalId, int]] = field(init=False, repr=False)
    _h_rank: dict[HospitalId, dict[ResidentId, int]] = field(init=False, repr=False)
    _r_index: dict[ResidentId, int] = field(init=False, repr=False)
    _h_index: dict[HospitalId, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.residents = tuple(self.residents)
        self.hospitals = tuple(self.hospitals)
        self.resident_prefs = {r: pref_list(p) for r, p in self.resident_prefs.items()}
        self.hospital_prefs = {h: pref_list(p) for h, p in self.hospital_prefs.items()}
        self.indifferent = frozenset(self.indifferent)
        self._r_rank = {
            r: _rank_map(self.resident_prefs.get(r, ())) for r in self.residents
        }
        self._h_rank = {
            h: _rank_map(self.hospital_prefs.get(h, ())) for h in self.hospitals
        }
        self._r_index = {r: i for i, r in enumerate(self.residents)}
        self._h_index = {h: i for i, h in enumerate(self.hospitals)}

    @property
    def n(self) -> int:
        return len(self.residents)

    @property
    def m(self) -> int:
        return len(self.hospitals)

    def accepted_hospitals(self, r: ResidentId) -> dict[HospitalId, int]:
        """Hospitals acceptable to ``r`` mapped to their tie-group rank."""
        return self._r_rank[r]

    def accepted_residents(self, h: HospitalId) -> dict[ResidentId, int]:
        return self._h_rank[h]

    def r_rank(self, r: ResidentId, h: HospitalId | None) -> float:
        """Tie-group rank of ``h`` for ``r``; unmatched ranks below everything."""
        if h is None:
            return math.inf
        return self._r_rank[r][h]

    def h_rank(self, h: HospitalId, r: ResidentId) -> int:
        if h in self.indifferent:
            return 0
        return self._h_rank[h][r]

    def effective_upper(self, h: HospitalId) -> int:
        """Upper quota with the unbounded sentinel read as n + 1."""
        u = self.upper_quota[h]
        return self.n + 1 if u == UNBOUNDED else int(u)

    def resident_index(self, r: ResidentId) -> int:
        return self._r_index[r]

    def hospital_index(self, h: HospitalId) -> int:
        return self._h_index[h]

    def has_resident_ties(self) -> bool:
        return any(
            len(g) > 1 for p in self.resident_prefs.values() for g in p
        )

    def has_hospital_ties(self) -> bool:
        if self.indifferent:
            return True
        return any(
            len(g) > 1 for p in self.hospital_prefs.values() for g in p
        )

    def has_bounded_upper(self) -> bool:
        return any(self.upper_quota[h] != UNBOUNDED for h in self.hospitals)

    def is_ha_shape(self) -> bool:
        """All hospitals indifferent (house-allocation reading)."""
        return set(self.indifferent) == set(self.hospitals)


def _rank_map(prefs: PrefList) -> dict[AgentId, int]:
    rank: dict[AgentId, int] = {}
    for level, group in enumerate(prefs):
        for a in group:
            rank[a] = level
    return rank


@dataclass
class StabilityReport:
    feasible: bool
    blocking_pairs: list[tuple[ResidentId, HospitalId]]
    blocked_closed_hospitals: list[tuple[HospitalId, tuple[ResidentId, ...]]]
    stable: bool


def validate_instance(inst: Instance) -> list[str]:
    """Return one description per violated instance invariant (empty if sound)."""
    problems: list[str] = []
    if len(set(inst.residents)) != len(inst.residents):
        problems.append("duplicate resident id")
    if len(set(inst.hospitals)) != len(inst.hospitals):
        problems.append("duplicate hospital id")
    residents = set(inst.residents)
    hospitals = set(inst.hospitals)

    for h in inst.hospitals:
        lo = inst.lower_quota.get(h)
        up = inst.upper_quota.get(h)
        if lo is None or lo < 1:
            problems.append(f"lower quota of {h} must be a positive integer")
        elif up is not None and lo > up:
            problems.append(f"l>u at {h}")
        if up is not None and up != UNBOUNDED and int(up) != up:
            problems.append(f"upper quota of {h} must be integral or unbounded")
        if h in inst.indifferent and len(inst.hospital_prefs.get(h, ())) > 1:
            problems.append(f"indifferent hospital {h} has more than one tie group")

    for r in inst.residents:
        seen: set[AgentId] = set()
        for group in inst.resident_prefs.get(r, ()):
            for h in group:
                if h in seen:
                    problems.append(f"{h} appears twice in preferences of {r}")
                seen.add(h)
                if h not in hospitals:
                    problems.append(f"unknown hospital {h} in preferences of {r}")
    for h in inst.hospitals:
        seen = set()
        for group in inst.hospital_prefs.get(h, ()):
            for r in group:
                if r in seen:
                    problems.append(f"{r} appears twice in preferences of {h}")
                seen.add(r)
                if r not in residents:
                    problems.append(f"unknown resident {r} in preferences of {h}")

    # Acceptability must be symmetric.
    for r in inst.residents:
        for h in inst.accepted_hospitals(r):
            if h in hospitals and r not in inst.accepted_residents(h):
                problems.append(f"{r} lists {h} but {h} does not list {r}")
    for h in inst.hospitals:
        for r in inst.accepted_residents(h):
            if r in residents and h not in inst.accepted_hospitals(r):
                problems.append(f"{h} lists {r} but {r} does not list {h}")
    return problems


def _check_ids(inst: Instance, m: Matching) -> None:
    for r, h in m.items():
        if r not in inst._r_index:
            raise RejectedInputError(f"unknown resident {r} in matching")
        if h not in inst._h_index:
            raise RejectedInputError(f"unknown hospital {h} in matching")


def hospital_loads(inst: Instance, m: Matching) -> dict[HospitalId, list[ResidentId]]:
    """Assignees of every hospital, in instance resident order."""
    loads: dict[HospitalId, list[ResidentId]] = {h: [] for h in inst.hospitals}
    for r in inst.residents:
        h = m.get(r)
        if h is not None:
            loads[h].append(r)
    return loads


def is_feasible(inst: Instance, m: Matching) -> bool:
    """True iff every hospital is closed or within quota and all pairs are mutual."""
    _check_ids(inst, m)
    for r, h in m.items():
        if h not in inst.accepted_hospitals(r) or r not in inst.accepted_residents(h):
            return False
    for h, assigned in hospital_loads(inst, m).items():
        k = len(assigned)
        if k == 0:
            continue
        if k < inst.lower_quota[h] or k > inst.upper_quota[h]:
            return False
    return True


def find_blocking_pairs(inst: Instance, m: Matching) -> list[tuple[ResidentId, HospitalId]]:
    """Blocking pairs (r, h) against an open hospital, in instance order.

    With indifferent hospitals the preference disjunct never fires, which
    reproduces the house-allocation blocking rule (h must be undersubscribed).
    """
    if not is_feasible(inst, m):
        raise RejectedInputError("matching is infeasible")
    loads = hospital_loads(inst, m)
    pairs = []
    for r in inst.residents:
        current = inst.r_rank(r, m.get(r))
        for h, rank in inst.accepted_hospitals(r).items():
            if rank >= current:
                continue
            assigned = loads[h]
            if not assigned:
                continue  # closed hospitals block via coalitions only
            if len(assigned) < inst.upper_quota[h]:
                pairs.append((r, h))
            elif h not in inst.indifferent and any(
                inst.h_rank(h, r) < inst.h_rank(h, r2) for r2 in assigned
            ):
                pairs.append((r, h))
    return pairs


def find_blocking_coalitions(
    inst: Instance, m: Matching
) -> list[tuple[HospitalId, tuple[ResidentId, ...]]]:
    """One witness coalition per blocked closed hospital.

    The witness is the l(h) first members of C(h) in instance resident order;
    full subset enumeration is deliberately not performed.
    """
    if not is_feasible(inst, m):
        raise RejectedInputError("matching is infeasible")
    loads = hospital_loads(inst, m)
    blocked = []
    for h in inst.hospitals:
        if loads[h]:
            continue
        wanting = [
            r
            for r in inst.residents
            if h in inst.accepted_hospitals(r)
            and inst.r_rank(r, h) < inst.r_rank(r, m.get(r))
        ]
        if len(wanting) >= inst.lower_quota[h]:
            blocked.append((h, tuple(wanting[: inst.lower_quota[h]])))
    return blocked


def check_stability(inst: Instance, m: Matching) -> StabilityReport:
    """Compose feasibility, blocking-pair, and blocking-coalition checks."""
    _check_ids(inst, m)
    if not is_feasible(inst, m):
        return StabilityReport(False, [], [], False)
    pairs = find_blocking_pairs(inst, m)
    coalitions = find_blocking_coalitions(inst, m)
    return StabilityReport(True, pairs, coalitions, not pairs and not coalitions)


def canonical(m: Matching) -> frozenset[tuple[ResidentId, HospitalId]]:
    """Hashable form of a matching, for set membership in tests."""
    return frozenset(m.items())
