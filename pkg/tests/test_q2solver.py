import random

import pytest

from quotamatch import fixtures
from quotamatch.core import Instance, UNBOUNDED, canonical, check_stability
from quotamatch.errors import NotApplicableError, WrongVariantError
from quotamatch.oracle import enumerate_stable
from quotamatch.q2solver import (
    PhaseTrace,
    eliminate_rotation,
    find_rotation,
    normalize,
    phase1a,
    phase1b,
    solve_q2,
)

from conftest import random_instance


def test_normalize_keeps_f3_intact():
    state = normalize(fixtures.f3())
    assert state.live_hospitals() == ["h1", "h2", "h3", "h4"]
    assert state.preferences()["r2"] == ("h4", "h2", "h3")


def test_normalize_expands_unit_lower_quota_capacity():
    inst = Instance(
        residents=("r1",),
        hospitals=("h1",),
        lower_quota={"h1": 1},
        upper_quota={"h1": 3},
        resident_prefs={"r1": ["h1"]},
        hospital_prefs={"h1": ["r1"]},
    )
    state = normalize(inst)
    copies = state.live_hospitals()
    assert len(copies) == 1  # capacity capped at n = 1
    inst2 = Instance(
        residents=("r1", "r2", "r3"),
        hospitals=("h1",),
        lower_quota={"h1": 1},
        upper_quota={"h1": 3},
        resident_prefs={r: ["h1"] for r in ("r1", "r2", "r3")},
        hospital_prefs={"h1": ["r1", "r2", "r3"]},
    )
    state2 = normalize(inst2)
    copies = state2.live_hospitals()
    assert len(copies) == 3
    assert [state2.lineage[c] for c in copies] == ["h1", "h1", "h1"]
    assert state2.preferences()["r1"] == tuple(copies)


def test_normalize_leaves_quota_two_instances_untouched():
    state = normalize(fixtures.f1())
    assert state.live_hospitals() == ["h1", "h2", "h3"]


def test_normalize_rejects_large_lower_quota():
    inst = fixtures.f2()  # h3 has lower quota four
    with pytest.raises(NotApplicableError):
        normalize(inst)


def test_normalize_rejects_ties():
    inst = Instance(
        residents=("r1",),
        hospitals=("h1", "h2"),
        lower_quota={"h1": 1, "h2": 1},
        upper_quota={"h1": 1, "h2": 1},
        resident_prefs={"r1": [["h1", "h2"]]},
        hospital_prefs={"h1": ["r1"], "h2": ["r1"]},
    )
    with pytest.raises(WrongVariantError):
        normalize(inst)


def test_phase1a_f3_reaches_figure_state():
    # Propose-and-reject must end in the reduced instance: h4 deleted, r2 and
    # r3 each lost h4, everything else untouched.
    state = phase1a(normalize(fixtures.f3()))
    prefs = state.preferences()
    assert prefs["r1"] == ("h1", "h2")
    assert prefs["r2"] == ("h2", "h3")
    assert prefs["r3"] == ("h3", "h1")
    assert prefs["h1"] == ("r3", "r1")
    assert prefs["h2"] == ("r1", "r2")
    assert prefs["h3"] == ("r2", "r3")
    assert "h4" not in prefs
    assert not phase1b(state)  # no hospital holds two proposals


def test_phase1a_f4_holds_without_deletions():
    state = phase1a(normalize(fixtures.f4()))
    prefs = state.preferences()
    assert prefs["r1"] == ("h1", "h2")
    assert prefs["r2"] == ("h2", "h3")
    assert prefs["r3"] == ("h3", "h1")
    assert state.holds["h1"] == ["r1"]
    assert state.holds["h2"] == ["r2"]
    assert state.holds["h3"] == ["r3"]
    assert not phase1b(state)


def test_phase1a_single_mutual_pair():
    inst = Instance(
        residents=("r1",),
        hospitals=("h1",),
        lower_quota={"h1": 1},
        upper_quota={"h1": 1},
        resident_prefs={"r1": ["h1"]},
        hospital_prefs={"h1": ["r1"]},
    )
    state = phase1a(normalize(inst))
    assert state.holds["h1"] == ["r1"] and state.holds["r1"] == ["h1"]
    assert state.preferences() == {"r1": ("h1",), "h1": ("r1",)}


def test_phase1b_splits_on_two_proposals():
    inst = Instance(
        residents=("r1", "r2"),
        hospitals=("h1",),
        lower_quota={"h1": 2},
        upper_quota={"h1": 2},
        resident_prefs={"r1": ["h1"], "r2": ["h1"]},
        hospital_prefs={"h1": ["r1", "r2"]},
    )
    state = phase1a(normalize(inst))
    assert len(state.holds["h1"]) == 2
    assert phase1b(state)
    copies = state.live_hospitals()
    assert len(copies) == 2
    assert all(state.lineage[c] == "h1" for c in copies)


def test_f4_rotation_and_elimination_matches_figure():
    state = phase1a(normalize(fixtures.f4()))
    rot = find_rotation(state)
    assert rot.as_tuples() == [("r1", "h1"), ("r3", "r2")]
    tags = [(p.ba_tag, p.ab_tag) for p in rot.pairs]
    assert tags == [("BA-1", "AB+-3b(i)"), ("BA-3", "AB+-3a")]
    eliminate_rotation(state, rot)
    prefs = state.preferences()
    assert prefs["h1"] == ("r3",)
    assert prefs["r1"] == ("h2",)
    assert prefs["h2"] == ("r1", "r2")
    assert prefs["r2"] == ("h2",)
    assert prefs["h3"] == ("r3",)
    assert prefs["r3"] == ("h3", "h1")


def test_f3_rotation_exists_and_is_structurally_valid():
    state = phase1a(normalize(fixtures.f3()))
    rot = find_rotation(state)
    assert rot is not None
    agents = [p.a for p in rot.pairs]
    assert len(set(agents)) == len(agents)
    bs = [p.b for p in rot.pairs]
    assert len(set(bs)) == len(bs)
    for p in rot.pairs:
        assert len(state.prefs[p.a]) >= 2
        assert len(state.prefs[p.b]) >= 2


def test_find_rotation_none_when_settled():
    inst = Instance(
        residents=("r1",),
        hospitals=("h1",),
        lower_quota={"h1": 1},
        upper_quota={"h1": 1},
        resident_prefs={"r1": ["h1"]},
        hospital_prefs={"h1": ["r1"]},
    )
    state = phase1a(normalize(inst))
    assert find_rotation(state) is None


def test_solve_f4():
    assert solve_q2(fixtures.f4()) == fixtures.f4_stable()


def test_solve_f4_trace_contains_rotation_event():
    trace = PhaseTrace()
    m = solve_q2(fixtures.f4(), trace=trace)
    assert m == fixtures.f4_stable()
    assert "ROTATION (r1,h1)(r3,r2)" in trace.lines


def test_solve_f1_no():
    assert solve_q2(fixtures.f1()) is None


def test_solve_f3_member_of_oracle_set():
    got = solve_q2(fixtures.f3())
    assert got is not None
    assert canonical(got) in {canonical(m) for m in enumerate_stable(fixtures.f3())}


def test_matched_residents_equal_proposal_holders_after_first_phase():
    # Whoever survives the first propose-and-reject round is matched.
    rng = random.Random(99)
    for _ in range(120):
        inst = random_instance(rng, n_max=6, m_max=4, max_lower=2)
        state = phase1a(normalize(inst))
        survivors = {r for r in inst.residents if len(state.prefs[r]) > 0}
        m = solve_q2(inst)
        if m is not None:
            assert set(m.keys()) == survivors


def test_oracle_equivalence_quota_two_corpus():
    rng = random.Random(1234)
    yes = no = 0
    for _ in range(500):
        inst = random_instance(rng, n_max=7, m_max=5, max_lower=2)
        got = solve_q2(inst)
        stable = enumerate_stable(inst)
        if got is None:
            assert stable == [], f"solver said NO, oracle found {stable[0]}"
            no += 1
        else:
            assert canonical(got) in {canonical(m) for m in stable}
            yes += 1
    assert yes and no  # the corpus must exercise both verdicts
