"""Polynomial solver for instances whose lower quotas are all at most two.

The algorithm alternates a propose-and-reject phase (which deletes
hospital-resident pairs that can appear in no stable matching), a splitting
phase (which replaces hospitals known to be open by unit-capacity copies),
and the elimination of generalized rotations, until every resident has at
most one hospital left.  Hospitals with lower quota one are called quota-one
hospitals, those with lower quota two quota-two hospitals.

Solver state is mutable and single-owner; distinct instances may be solved
concurrently.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .core import Instance, Matching, check_stability
from .errors import InternalInvariantError, NotApplicableError, WrongVariantError

#: Runtime verification of the quiescence invariants; disable for big runs.
DEBUG_CHECKS = True


class PhaseTrace:
    """Line-oriented event log of one solver run."""

    def __init__(self):
        self.lines: list[str] = []

    def log(self, event: str, *args: str) -> None:
        self.lines.append(" ".join((event,) + args))

    def rotation(self, pairs) -> None:
        self.lines.append("ROTATION " + "".join(f"({a},{b})" for a, b in pairs))

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.text())


class _Prefs:
    """Ordered preference list with O(1) deletion and cached end pointers."""

    __slots__ = ("items", "active", "rank", "_lo", "_hi")

    def __init__(self, items: list[str], rank: dict[str, tuple]):
        self.items = list(items)
        self.active = set(items)
        self.rank = rank
        self._lo = 0
        self._hi = len(self.items) - 1

    def __len__(self) -> int:
        return len(self.active)

    def __contains__(self, x: str) -> bool:
        return x in self.active

    def first(self) -> str:
        items = self.items
        while items[self._lo] not in self.active:
            self._lo += 1
        return items[self._lo]

    def last(self) -> str:
        items = self.items
        while items[self._hi] not in self.active:
            self._hi -= 1
        return items[self._hi]

    def actives(self) -> list[str]:
        return [x for x in self.items if x in self.active]

    def prefix(self, k: int, exclude: str | None = None) -> list[str]:
        """The first ``k`` active entries, optionally skipping one agent."""
        out = []
        for x in self.items[self._lo :]:
            if x in self.active and x != exclude:
                out.append(x)
                if len(out) == k:
                    break
        return out

    def delete(self, x: str) -> None:
        self.active.discard(x)

    def replace(self, x: str, copies: list[str]) -> None:
        i = self.items.index(x)
        self.items[i : i + 1] = copies
        self.active.discard(x)
        self.active.update(copies)
        self._lo = 0
        self._hi = len(self.items) - 1


@dataclass
class RotationPair:
    a: str
    b: str
    ba_tag: str
    ab_tag: str
    first_hospital: str | None  # h(a) at discovery time, when a is a resident


@dataclass
class Rotation:
    pairs: list[RotationPair]

    def as_tuples(self) -> list[tuple[str, str]]:
        return [(p.a, p.b) for p in self.pairs]


@dataclass
class PhaseState:
    """Mutable solver state: shrinking preference lists plus proposal ledger."""

    inst: Instance
    residents: tuple[str, ...]
    hospitals: list[str]  # live hospitals in creation order, copies included
    lower: dict[str, int]
    upper: dict[str, int]
    lineage: dict[str, str]
    prefs: dict[str, _Prefs]
    holds: dict[str, list[str]]  # target -> proposers currently held
    issued: dict[str, set[str]]  # proposer -> targets holding its proposal
    activated: set[str] = field(default_factory=set)
    S: set[str] | None = None
    trace: PhaseTrace | None = None

    _resident_set: frozenset[str] = field(default_factory=frozenset)
    _dead: set[str] = field(default_factory=set)
    _order: dict[str, int] = field(default_factory=dict)
    _queue: deque = field(default_factory=deque)
    _queued: set[str] = field(default_factory=set)
    _pending_q2: deque = field(default_factory=deque)
    _emptied_residents: set[str] = field(default_factory=set)
    _multi_residents: set[str] = field(default_factory=set)
    _copy_serial: int = 0

    # -- classification ----------------------------------------------------

    def is_resident(self, a: str) -> bool:
        return a in self._resident_set

    def is_q1(self, a: str) -> bool:
        return not self.is_resident(a) and self.lower[a] == 1

    def is_q2(self, a: str) -> bool:
        return not self.is_resident(a) and self.lower[a] == 2

    def alive(self, a: str) -> bool:
        return a not in self._dead

    def live_hospitals(self) -> list[str]:
        return [h for h in self.hospitals if h not in self._dead]

    def preferences(self) -> dict[str, tuple[str, ...]]:
        """Current preference lists of residents and live hospitals."""
        snap = {r: tuple(self.prefs[r].actives()) for r in self.residents}
        for h in self.live_hospitals():
            snap[h] = tuple(self.prefs[h].actives())
        return snap

    def agent_key(self, a: str):
        return (0 if self.is_resident(a) else 1, self._order[a])

    def fresh_copy_names(self, base: str, k: int) -> list[str]:
        taken = set(self.hospitals) | set(self.residents)
        names = []
        for i in range(1, k + 1):
            name = f"{base}~{i}"
            while name in taken:
                name += "'"
            taken.add(name)
            names.append(name)
        return names

    # -- mutation primitives ------------------------------------------------

    def _log(self, event: str, *args: str) -> None:
        if self.trace is not None:
            self.trace.log(event, *args)

    def enqueue(self, a: str) -> None:
        if a not in self._queued and self.alive(a):
            self._queued.add(a)
            self._queue.append(a)

    def activate(self, h: str) -> None:
        if h not in self.activated and self.alive(h):
            self.activated.add(h)
            self._log("ACTIVATE", h)
        self.enqueue(h)

    def deactivate(self, h: str) -> None:
        if h in self.activated:
            self.activated.discard(h)
            self._log("DEACTIVATE", h)

    def delete_pair(self, a: str, b: str, expect_no_proposals: bool = False) -> None:
        """Remove mutual acceptability of ``a`` and ``b`` and drop any proposal
        in flight between them, waking up whoever has to react."""
        for x, y in ((a, b), (b, a)):
            if y in self.issued[x]:
                if expect_no_proposals:
                    raise InternalInvariantError(
                        f"cleanup deletion of {x}/{y} would break a live proposal"
                    )
                self.issued[x].discard(y)
                self.holds[y].remove(x)
                # x lost an issued proposal and has to act again.
                if self.is_q2(x):
                    self.activate(x)
                else:
                    self.enqueue(x)
        for x, y in ((a, b), (b, a)):
            if y in self.prefs[x]:
                self.prefs[x].delete(y)
        for x in (a, b):
            if self.is_resident(x):
                k = len(self.prefs[x])
                if k == 0:
                    self._emptied_residents.add(x)
                if k < 2:
                    self._multi_residents.discard(x)
            elif self.is_q2(x) and not expect_no_proposals:
                self._pending_q2.append(x)

    def reject(self, t: str, p: str) -> None:
        """Agent ``t`` rejects the proposal of ``p``; the pair is deleted."""
        self._log("REJECT", t, p)
        self.delete_pair(t, p)

    def drain_q2_checks(self) -> None:
        # A quota-two hospital whose list shrank to one resident can never
        # open, so it rejects whatever proposal it still holds.
        while self._pending_q2:
            h = self._pending_q2.popleft()
            if self.alive(h) and len(self.prefs[h]) <= 1:
                for p in list(self.holds[h]):
                    self.reject(h, p)


def normalize(inst: Instance, trace: PhaseTrace | None = None) -> PhaseState:
    """Build solver state, expanding quota-one hospitals into unit copies.

    Upper quotas are first capped at the number of residents (extra capacity
    is inert) so the copy count stays bounded.
    """
    if any(inst.lower_quota[h] >= 3 for h in inst.hospitals):
        raise NotApplicableError("some lower quota is at least 3")
    if inst.has_resident_ties() or inst.has_hospital_ties():
        raise WrongVariantError("the quota-two solver needs strict preferences")

    n = inst.n
    state = PhaseState(
        inst=inst,
        residents=inst.residents,
        hospitals=[],
        lower={},
        upper={},
        lineage={},
        prefs={},
        holds={},
        issued={},
        trace=trace,
    )
    state._resident_set = frozenset(inst.residents)

    expansion: dict[str, list[str]] = {}
    for h in inst.hospitals:
        lo = inst.lower_quota[h]
        cap = min(inst.effective_upper(h), max(n, lo))
        if lo == 1 and cap > 1:
            copies = state.fresh_copy_names(h, cap)
        else:
            copies = [h]
        expansion[h] = copies
        for c in copies:
            state.hospitals.append(c)
            state.lower[c] = lo if len(copies) == 1 else 1
            state.upper[c] = cap if len(copies) == 1 else 1
            state.lineage[c] = h
            state._order[c] = len(state._order)

    for idx, r in enumerate(inst.residents):
        items: list[str] = []
        rank: dict[str, tuple] = {}
        pos = 0
        for group in inst.resident_prefs.get(r, ()):
            for h in group:
                for j, c in enumerate(expansion[h]):
                    items.append(c)
                    rank[c] = (pos, j)
                pos += 1
        state.prefs[r] = _Prefs(items, rank)
        state.holds[r] = []
        state.issued[r] = set()
        state._order[r] = idx
        if len(items) >= 2:
            state._multi_residents.add(r)

    for h in inst.hospitals:
        items = []
        rank = {}
        pos = 0
        for group in inst.hospital_prefs.get(h, ()):
            for r in group:
                items.append(r)
                rank[r] = (pos,)
                pos += 1
        for c in expansion[h]:
            state.prefs[c] = _Prefs(items, rank)
            state.holds[c] = []
            state.issued[c] = set()
    return state


# -- Phase 1a ----------------------------------------------------------------


def _propose(state: PhaseState, p: str, t: str) -> None:
    state._log("PROPOSE", p, t)
    if state.is_q2(t):
        state.activate(t)  # any received proposal activates the hospital
        if len(state.prefs[t]) <= 1:
            state.reject(t, p)  # rejected by all but one resident already
            return
        held = state.holds[t]
        if len(held) < state.upper[t]:
            held.append(p)
            state.issued[p].add(t)
            return
        rank = state.prefs[t].rank
        worst = max(held, key=lambda x: rank[x])
        if rank[p] < rank[worst]:
            held.append(p)
            state.issued[p].add(t)
            state.reject(t, worst)
        else:
            state.reject(t, p)
        return

    held = state.holds[t]
    if not held:
        held.append(p)
        state.issued[p].add(t)
        return
    rank = state.prefs[t].rank
    incumbent = held[0]
    if rank[p] < rank[incumbent]:
        held.append(p)
        state.issued[p].add(t)
        state.reject(t, incumbent)
    else:
        state.reject(t, p)


def _process_proposer(state: PhaseState, a: str) -> None:
    while len(state.prefs[a]) > 0 and not state.issued[a]:
        t = state.prefs[a].first()
        _propose(state, a, t)
        state.drain_q2_checks()


def _q2_window(state: PhaseState, h: str) -> tuple[list[str], str | None]:
    """Current proposal targets of an activated quota-two hospital."""
    held = state.holds[h]
    u = state.upper[h]
    special = None
    if len(held) == 1 and held[0] in state.prefs[h].prefix(u):
        special = held[0]
    if special is not None:
        return state.prefs[h].prefix(u - 1, exclude=special), special
    return state.prefs[h].prefix(u), None


def _process_q2(state: PhaseState, h: str) -> None:
    while h in state.activated and state.alive(h):
        if len(state.prefs[h]) <= 1:
            for p in list(state.holds[h]):
                state.reject(h, p)
            state.drain_q2_checks()
            state.deactivate(h)
            return
        window, _ = _q2_window(state, h)
        targets = [w for w in window if w not in state.issued[h]]
        if not targets:
            state.deactivate(h)
            return
        _propose(state, h, targets[0])
        state.drain_q2_checks()


def phase1a(state: PhaseState) -> PhaseState:
    """Propose-and-reject rounds to quiescence, then the end-of-phase cleanup."""
    state._queue.clear()
    state._queued.clear()
    # Quota-two hospitals that lost list entries between phases react first.
    state.drain_q2_checks()
    for r in state.residents:
        if len(state.prefs[r]) > 0 and not state.issued[r]:
            state.enqueue(r)
    for h in state.live_hospitals():
        if state.is_q1(h):
            if len(state.prefs[h]) > 0 and not state.issued[h]:
                state.enqueue(h)
        elif h in state.activated:
            state.enqueue(h)

    while state._queue:
        a = state._queue.popleft()
        state._queued.discard(a)
        if not state.alive(a):
            continue
        if state.is_q2(a):
            if a in state.activated:
                _process_q2(state, a)
        else:
            _process_proposer(state, a)

    _cleanup(state)
    return state


def _cleanup(state: PhaseState) -> None:
    # Truncate below the held proposal, restoring symmetry as we go.
    for a in list(state.residents) + [h for h in state.live_hospitals() if state.is_q1(h)]:
        if not state.holds[a]:
            continue
        rank = state.prefs[a].rank
        held_key = rank[state.holds[a][0]]
        for x in state.prefs[a].actives():
            if rank[x] > held_key:
                state._log("DELETE", a, x)
                state.delete_pair(a, x, expect_no_proposals=True)
    # Quota-two hospitals left with at most one resident can never open.
    for h in state.live_hospitals():
        if state.is_q2(h) and len(state.prefs[h]) <= 1:
            if state.holds[h] or state.issued[h]:
                raise InternalInvariantError(
                    f"dying hospital {h} still has proposals in flight"
                )
            for r in state.prefs[h].actives():
                state._log("DELETE", h, r)
                state.delete_pair(h, r, expect_no_proposals=True)
            state._dead.add(h)
            state.deactivate(h)


# -- Phase 1b ----------------------------------------------------------------


def phase1b(state: PhaseState) -> bool:
    """Split every quota-two hospital holding two or more proposals.

    Returns whether any hospital was split, so the caller can re-run
    phase 1a until no more splits happen.
    """
    to_split = [
        h
        for h in state.live_hospitals()
        if state.is_q2(h) and len(state.holds[h]) >= 2
    ]
    for h in to_split:
        _split(state, h)
    return bool(to_split)


def _split(state: PhaseState, h: str) -> None:
    k = state.upper[h]
    copies = state.fresh_copy_names(h, k)
    state._log("SPLIT", h, str(k))
    origin = state.lineage[h]
    residents_of_h = state.prefs[h].actives()

    for p in list(state.holds[h]):
        state.issued[p].discard(h)
        state.enqueue(p)
    for w in list(state.issued[h]):
        state.holds[w].remove(h)
    state.holds[h] = []
    state.issued[h] = set()
    state.deactivate(h)
    state._dead.add(h)

    for j, c in enumerate(copies):
        state.hospitals.append(c)
        state.lower[c] = 1
        state.upper[c] = 1
        state.lineage[c] = origin
        state._order[c] = len(state._order)
        state.prefs[c] = _Prefs(residents_of_h, state.prefs[h].rank)
        state.holds[c] = []
        state.issued[c] = set()

    for r in residents_of_h:
        rprefs = state.prefs[r]
        base_key = rprefs.rank[h]
        for j, c in enumerate(copies):
            rprefs.rank[c] = base_key + (j + 1,)
        rprefs.replace(h, copies)
        if len(rprefs) >= 2:
            state._multi_residents.add(r)


# -- Phase 2: generalized rotations -------------------------------------------


def _is_flexible(state: PhaseState, h: str) -> bool:
    # A quota-two hospital with more than two residents left on its list.
    return state.is_q2(h) and len(state.prefs[h]) > 2


def _ab_successor(state: PhaseState, a: str) -> tuple[str, str, str | None]:
    """Successor b_{i+1} of a_i, with the rule tag and h(a_i) if a is a resident."""
    if not state.is_resident(a):
        seconds = state.prefs[a].prefix(2)
        if len(seconds) < 2:
            raise InternalInvariantError(f"rotation rule AB+-1 stuck at {a}")
        return seconds[1], "AB+-1", None
    h = state.prefs[a].first()
    if _is_flexible(state, h):
        others = state.prefs[h].prefix(2, exclude=a)
        if len(others) < 2:
            raise InternalInvariantError(f"rotation rule AB+-2 stuck at {a}")
        return others[1], "AB+-2", h
    seconds = state.prefs[a].prefix(2)
    if len(seconds) < 2:
        raise InternalInvariantError(f"rotation rule AB+-3 stuck at {a}")
    g = seconds[1]
    if state.is_q1(g):
        return g, "AB+-3a", h
    if state.holds[g]:
        if len(state.holds[g]) != 1:
            raise InternalInvariantError(f"{g} holds several proposals in phase 2")
        return state.holds[g][0], "AB+-3b(i)", h
    firsts = state.prefs[g].prefix(1, exclude=a)
    if not firsts:
        raise InternalInvariantError(f"rotation rule AB+-3b(ii) stuck at {a}")
    return firsts[0], "AB+-3b(ii)", h


def _ba_successor(state: PhaseState, b: str) -> tuple[str, str]:
    """Predecessor-side successor a_i of b_i, with the rule tag."""
    if not state.is_resident(b):
        return state.prefs[b].last(), "BA-1"
    h = state.prefs[b].last()
    if state.is_q1(h):
        return h, "BA-2"
    holders = state.holds[h]
    if len(holders) != 1:
        raise InternalInvariantError(
            f"rotation rule BA-3: {h} holds {len(holders)} proposals"
        )
    return holders[0], "BA-3"


def find_rotation(state: PhaseState) -> Rotation | None:
    """Find a generalized rotation, or None once all residents are settled.

    The walk is seeded with the lowest-id resident that still has two
    hospitals and follows the successor rules until it cycles.
    """
    seed = None
    for r in state.residents:
        if r in state._multi_residents:
            seed = r
            break
    if seed is None:
        return None

    a_seq = [seed]
    b_seq: list[str | None] = [None]
    ab_tags: list[str] = []
    ba_tags: list[str | None] = [None]
    h_of: list[str | None] = []
    pos = {seed: 0}
    while True:
        b_next, ab_tag, ha = _ab_successor(state, a_seq[-1])
        ab_tags.append(ab_tag)
        h_of.append(ha)
        a_next, ba_tag = _ba_successor(state, b_next)
        if a_next in pos:
            j = pos[a_next]
            pairs = []
            cycle = list(range(j + 1, len(a_seq))) + [len(a_seq)]
            for t in cycle:
                a = a_seq[t] if t < len(a_seq) else a_next
                pairs.append(
                    RotationPair(
                        a=a,
                        b=b_seq[t] if t < len(b_seq) else b_next,
                        ba_tag=ba_tags[t] if t < len(ba_tags) else ba_tag,
                        ab_tag=ab_tags[t] if t < len(ab_tags) else ab_tags[j],
                        first_hospital=h_of[t] if t < len(h_of) else h_of[j],
                    )
                )
            return _canonical_rotation(state, pairs)
        b_seq.append(b_next)
        a_seq.append(a_next)
        ba_tags.append(ba_tag)
        pos[a_next] = len(a_seq) - 1


def _canonical_rotation(state: PhaseState, pairs: list[RotationPair]) -> Rotation:
    rot = Rotation(pairs)
    start = min(range(len(pairs)), key=lambda i: state.agent_key(pairs[i].a))
    rot.pairs = pairs[start:] + pairs[:start]
    if DEBUG_CHECKS:
        bs = [p.b for p in rot.pairs]
        if len(set(bs)) != len(bs):
            raise InternalInvariantError("rotation has a repeated b_i")
        for p in rot.pairs:
            for agent in (p.a, p.b):
                if len(state.prefs[agent]) < 2:
                    raise InternalInvariantError(
                        f"rotation member {agent} has fewer than two entries"
                    )
    return rot


def eliminate_rotation(state: PhaseState, rot: Rotation) -> PhaseState:
    """Delete the acceptabilities prescribed by the rotation."""
    if state.trace is not None:
        state.trace.rotation(rot.as_tuples())
    deletions: list[tuple[str, str]] = []
    for p in rot.pairs:
        if state.is_resident(p.a) and state.is_resident(p.b):
            deletions.append((p.first_hospital, p.b))
        else:
            deletions.append((p.a, p.b))
    seen = set()
    for x, y in deletions:
        key = (x, y) if x <= y else (y, x)
        if key in seen:
            continue
        seen.add(key)
        state._log("DELETE", x, y)
        state.delete_pair(x, y)
    return state


# -- the full algorithm --------------------------------------------------------


def _rejects_per_cor413(state: PhaseState, rot: Rotation) -> bool:
    """Early NO conditions after a rotation elimination.

    A resident whose list emptied or consists only of quota-two hospitals
    that have a single resident left cannot be matched, nor can a quota-one
    hospital whose list emptied be open; either kills the instance.
    """
    touched_residents: set[str] = set()
    touched_q1: set[str] = set()
    for p in rot.pairs:
        for agent in (p.a, p.b):
            if state.is_resident(agent):
                touched_residents.add(agent)
            elif state.is_q1(agent):
                touched_q1.add(agent)
        if p.first_hospital is not None and state.is_q2(p.first_hospital):
            touched_residents.update(state.prefs[p.first_hospital].actives())
    for r in touched_residents:
        entries = state.prefs[r].actives()
        if not entries:
            return True
        if all(state.is_q2(h) and len(state.prefs[h]) <= 1 for h in entries):
            return True
    for h in touched_q1:
        if state.alive(h) and len(state.prefs[h]) == 0:
            return True
    return False


def _check_quiescent(state: PhaseState) -> None:
    """Invariants of a phase-1 quiescent point (debug builds only)."""
    snap = state.preferences()
    for a, entries in snap.items():
        held = len(state.holds[a])
        issued = len(state.issued[a])
        if held > 1 or issued > 1 or (held == 1) != (issued == 1):
            raise InternalInvariantError(
                f"{a} holds {held} and issues {issued} proposals at quiescence"
            )
        for b in entries:
            if a not in state.prefs[b]:
                raise InternalInvariantError(f"asymmetric pair {a}/{b}")
            if len(entries) > 1 and len(state.prefs[b]) <= 1:
                raise InternalInvariantError(
                    f"{b} has a single entry but appears on the list of {a}"
                )
    for h in state.live_hospitals():
        if not state.is_q2(h) or not state.holds[h]:
            continue
        holder = state.holds[h][0]
        two_left = len(state.prefs[h]) == 2
        top_two = state.upper[h] == 2 and holder in state.prefs[h].prefix(2)
        if not (two_left or top_two):
            raise InternalInvariantError(f"{h} violates the quiescence shape")


def _run_phase1(state: PhaseState) -> None:
    phase1a(state)
    while any(
        state.is_q2(h) and len(state.holds[h]) >= 2 for h in state.live_hospitals()
    ):
        phase1b(state)
        phase1a(state)


def solve_q2(
    inst: Instance, trace: PhaseTrace | None = None
) -> Matching | None:
    """Return a stable matching, or None when the instance has none.

    Only applicable when every lower quota is at most two and preferences are
    strict; the returned matching is re-checked for stability before being
    handed back.
    """
    state = normalize(inst, trace)
    phase1a(state)
    state.S = {r for r in state.residents if len(state.prefs[r]) > 0}

    while state._multi_residents:
        _run_phase1(state)
        if state._emptied_residents & state.S:
            return None
        if DEBUG_CHECKS:
            _check_quiescent(state)
        if not state._multi_residents:
            break
        rot = find_rotation(state)
        if rot is None:
            raise InternalInvariantError("a rotation must exist here")
        eliminate_rotation(state, rot)
        if _rejects_per_cor413(state, rot):
            return None

    if any(len(state.prefs[r]) != 1 for r in state.S):
        return None
    matching: Matching = {}
    for r in state.residents:
        if len(state.prefs[r]) == 1:
            matching[r] = state.lineage[state.prefs[r].first()]
    # The phase lemmas guarantee that whenever the input is solvable, the
    # surviving assignment is stable; an unstable survivor therefore proves
    # the instance has no stable matching at all.
    if not check_stability(inst, matching).stable:
        return None
    return matching
