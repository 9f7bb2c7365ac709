import random

import pytest

from quotamatch import fixtures
from quotamatch.core import (
    Instance,
    UNBOUNDED,
    check_stability,
    find_blocking_coalitions,
    find_blocking_pairs,
    is_feasible,
    validate_instance,
)
from quotamatch.errors import RejectedInputError

from conftest import random_instance


def test_fixtures_validate():
    for make in (fixtures.f1, fixtures.f2, fixtures.f3, fixtures.f4):
        assert validate_instance(make()) == []


def test_validate_flags_inverted_quota():
    inst = fixtures.f1()
    bad = Instance(
        residents=inst.residents,
        hospitals=inst.hospitals,
        lower_quota={**inst.lower_quota, "h1": 3},
        upper_quota={**inst.upper_quota, "h1": 2},
        resident_prefs=inst.resident_prefs,
        hospital_prefs=inst.hospital_prefs,
    )
    problems = validate_instance(bad)
    assert problems == ["l>u at h1"]


def test_validate_flags_asymmetry():
    inst = fixtures.f1()
    bad = Instance(
        residents=inst.residents,
        hospitals=inst.hospitals,
        lower_quota=inst.lower_quota,
        upper_quota=inst.upper_quota,
        resident_prefs=inst.resident_prefs,
        hospital_prefs={**inst.hospital_prefs, "h1": []},
    )
    problems = validate_instance(bad)
    assert any("does not list" in p for p in problems)


def test_is_feasible_f2():
    inst = fixtures.f2()
    assert is_feasible(inst, fixtures.f2_m1())
    assert not is_feasible(inst, {"r2": "h2"})  # |M(h2)| = 1 < l(h2) = 2
    assert is_feasible(fixtures.f1(), {})


def test_is_feasible_rejects_unknown_ids():
    with pytest.raises(RejectedInputError):
        is_feasible(fixtures.f1(), {"nobody": "h1"})


def test_blocking_pairs_f2_m2_empty():
    inst = fixtures.f2()
    assert find_blocking_pairs(inst, fixtures.f2_m2()) == []


def test_blocking_pairs_f4_stable_empty():
    inst = fixtures.f4()
    assert find_blocking_pairs(inst, fixtures.f4_stable()) == []


def test_blocking_pairs_requires_feasible_input():
    with pytest.raises(RejectedInputError):
        find_blocking_pairs(fixtures.f2(), {"r2": "h2"})


def test_coalitions_f1_partial_matching():
    # With h1 open on {r1, r3}, residents r2 and r3 both strictly prefer h3.
    inst = fixtures.f1()
    got = find_blocking_coalitions(inst, {"r1": "h1", "r3": "h1"})
    assert got == [("h3", ("r2", "r3"))]


def test_coalitions_f1_empty_matching():
    inst = fixtures.f1()
    got = dict(find_blocking_coalitions(inst, {}))
    assert set(got) == {"h1", "h2", "h3"}
    assert got["h1"] == ("r1", "r3")


def test_coalitions_f2_m1_empty():
    assert find_blocking_coalitions(fixtures.f2(), fixtures.f2_m1()) == []


def test_check_stability_reports():
    inst = fixtures.f2()
    assert check_stability(inst, fixtures.f2_m2()).stable
    report = check_stability(fixtures.f1(), {})
    assert not report.stable
    assert len(report.blocked_closed_hospitals) == 3
    assert check_stability(fixtures.f4(), fixtures.f4_stable()).stable


def test_check_stability_infeasible_input():
    report = check_stability(fixtures.f2(), {"r2": "h2"})
    assert not report.feasible and not report.stable
    assert report.blocking_pairs == [] and report.blocked_closed_hospitals == []


def test_ha_blocking_needs_undersubscribed_hospital():
    # With indifferent hospitals, a full hospital never appears in a pair.
    rng = random.Random(7)
    for _ in range(100):
        inst = random_instance(rng, n_max=5, m_max=3, ha=True)
        m = _greedy_feasible(inst)
        if m is None or not is_feasible(inst, m):
            continue
        loads = {}
        for r, h in m.items():
            loads.setdefault(h, []).append(r)
        for _, h in find_blocking_pairs(inst, m):
            assert len(loads.get(h, [])) < inst.upper_quota[h]


def test_witnesses_have_exactly_lower_quota_members():
    rng = random.Random(11)
    for _ in range(100):
        inst = random_instance(rng, n_max=6, m_max=4, max_lower=3)
        m = _greedy_feasible(inst)
        if m is None:
            continue
        for h, witness in find_blocking_coalitions(inst, m):
            assert len(witness) == inst.lower_quota[h]
            for r in witness:
                assert inst.r_rank(r, h) < inst.r_rank(r, m.get(r))


def test_strict_instances_agree_with_tie_group_encoding():
    # Encoding a strict list as singleton groups must not change any verdict.
    rng = random.Random(3)
    for _ in range(200):
        inst = random_instance(rng, n_max=5, m_max=3)
        m = _greedy_feasible(inst)
        if m is None:
            continue
        flat = Instance(
            residents=inst.residents,
            hospitals=inst.hospitals,
            lower_quota=inst.lower_quota,
            upper_quota=inst.upper_quota,
            resident_prefs={
                r: [h for g in inst.resident_prefs[r] for h in g]
                for r in inst.residents
            },
            hospital_prefs={
                h: [r for g in inst.hospital_prefs[h] for r in g]
                for h in inst.hospitals
            },
        )
        assert find_blocking_pairs(inst, m) == find_blocking_pairs(flat, m)
        assert find_blocking_coalitions(inst, m) == find_blocking_coalitions(flat, m)


def _greedy_feasible(inst):
    """First feasible matching by greedy fill, or None."""
    m = {}
    loads = {h: 0 for h in inst.hospitals}
    for r in inst.residents:
        for h in inst.accepted_hospitals(r):
            if loads[h] + 1 <= inst.upper_quota[h]:
                m[r] = h
                loads[h] += 1
                break
    for h, k in loads.items():
        if 0 < k < inst.lower_quota[h]:
            drop = [r for r, hh in m.items() if hh == h]
            for r in drop:
                del m[r]
    return m if is_feasible(inst, m) else None
