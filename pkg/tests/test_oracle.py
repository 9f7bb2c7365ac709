import itertools
import random

import pytest

from quotamatch import fixtures
from quotamatch.core import UNBOUNDED, Instance, canonical, check_stability, is_feasible
from quotamatch.errors import EnumerationOverflowError
from quotamatch.oracle import enumerate_feasible, enumerate_stable, rural_check

from conftest import random_instance


def test_f1_feasible_matchings():
    # Hand enumeration: empty, or one hospital taking its two acceptors.
    got = [canonical(m) for m in enumerate_feasible(fixtures.f1())]
    expected = [
        canonical({}),
        canonical({"r1": "h1", "r3": "h1"}),
        canonical({"r1": "h2", "r2": "h2"}),
        canonical({"r2": "h3", "r3": "h3"}),
    ]
    assert sorted(got, key=sorted) == sorted(expected, key=sorted)
    assert canonical({}) in got


def test_f2_feasible_contains_both_stable_matchings():
    got = {canonical(m) for m in enumerate_feasible(fixtures.f2())}
    assert canonical(fixtures.f2_m1()) in got
    assert canonical(fixtures.f2_m2()) in got


def test_enumerate_stable_f1_empty():
    assert enumerate_stable(fixtures.f1()) == []


def test_enumerate_stable_f2_exactly_two():
    got = {canonical(m) for m in enumerate_stable(fixtures.f2())}
    assert got == {canonical(fixtures.f2_m1()), canonical(fixtures.f2_m2())}


def test_enumerate_stable_f4():
    # F4 has a second stable matching besides the one the solver constructs:
    # h2 stays closed and only r2 would want to open it.
    got = {canonical(m) for m in enumerate_stable(fixtures.f4())}
    assert got == {
        canonical(fixtures.f4_stable()),
        canonical({"r1": "h1", "r2": "h3", "r3": "h3"}),
    }


def test_cap_overflow():
    inst = fixtures.f2()
    with pytest.raises(EnumerationOverflowError):
        list(enumerate_feasible(inst, cap=2))


def test_every_stable_matching_passes_the_checker():
    rng = random.Random(23)
    for _ in range(60):
        inst = random_instance(rng, n_max=5, m_max=4, max_lower=3)
        for m in enumerate_stable(inst):
            assert check_stability(inst, m).stable


def test_feasible_count_matches_naive_product_scan():
    rng = random.Random(5)
    for _ in range(40):
        inst = random_instance(rng, n_max=5, m_max=3, max_lower=3)
        got = sum(1 for _ in enumerate_feasible(inst))
        options = [[None] + list(inst.hospitals) for _ in inst.residents]
        naive = 0
        for combo in itertools.product(*options):
            m = {
                r: h
                for r, h in zip(inst.residents, combo)
                if h is not None
            }
            if all(h in inst.accepted_hospitals(r) for r, h in m.items()):
                if is_feasible(inst, m):
                    naive += 1
        assert got == naive


def test_rural_f4():
    report = rural_check(fixtures.f4())
    assert report.stable_count == 2
    assert report.matched_set_uniform and report.open_count_uniform
    assert report.matched_residents == frozenset({"r1", "r2", "r3"})


def test_rural_two_hospital_example():
    report = rural_check(fixtures.rural_two_hospitals())
    assert report.stable_count == 2
    assert report.matched_set_uniform
    assert report.matched_residents == frozenset({"r1", "r2"})
    assert report.open_count_uniform
    assert report.open_counts == [1, 1]


def test_rural_f2_outside_guarantee():
    # Lower quota four present: the matched sets legitimately differ.
    report = rural_check(fixtures.f2())
    assert report.stable_count == 2
    assert not report.matched_set_uniform
    assert report.open_counts in ([1, 2], [2, 1])


def test_rural_holds_on_quota_two_corpus():
    rng = random.Random(42)
    checked = 0
    for _ in range(300):
        inst = random_instance(rng, n_max=6, m_max=4, max_lower=2)
        report = rural_check(inst)
        assert report.matched_set_uniform, inst
        assert report.open_count_uniform, inst
        checked += 1
    assert checked == 300
