import random

import pytest

from quotamatch import fixtures
from quotamatch.core import Instance, canonical, check_stability
from quotamatch.errors import RejectedInputError, WrongVariantError
from quotamatch.enumsolver import (
    CLOSED,
    OPEN,
    iter_subset_verdicts,
    solve_count_open,
    solve_fpt_subsets,
    solve_fpt_subsets_ties,
)
from quotamatch.oracle import enumerate_stable
from quotamatch.q2solver import solve_q2

from conftest import cycle_flavored_instance, random_instance


def test_fpt_f1_no_after_all_subsets():
    assert solve_fpt_subsets(fixtures.f1()) is None
    assert sum(1 for _ in iter_subset_verdicts(fixtures.f1())) == 8


def test_fpt_f2_finds_a_stable_matching():
    got = solve_fpt_subsets(fixtures.f2())
    assert canonical(got) in {
        canonical(fixtures.f2_m1()),
        canonical(fixtures.f2_m2()),
    }


def test_fpt_f4_member_of_stable_set():
    got = solve_fpt_subsets(fixtures.f4())
    assert canonical(got) in {canonical(m) for m in enumerate_stable(fixtures.f4())}


def test_fpt_rejects_ties():
    inst = random_instance(random.Random(1), ties=True, unbounded_only=True)
    with pytest.raises(WrongVariantError):
        solve_fpt_subsets(inst)


def test_fpt_ties_f1():
    assert solve_fpt_subsets_ties(fixtures.f1()) is None


def test_fpt_ties_single_pair():
    inst = Instance(
        residents=("r1",),
        hospitals=("h1",),
        lower_quota={"h1": 1},
        upper_quota={"h1": float("inf")},
        resident_prefs={"r1": ["h1"]},
        hospital_prefs={"h1": ["r1"]},
    )
    assert solve_fpt_subsets_ties(inst) == {"r1": "h1"}


def test_count_open_f2():
    inst = fixtures.f2()
    assert solve_count_open(inst, 1, OPEN) == fixtures.f2_m1()
    assert solve_count_open(inst, 2, OPEN) == fixtures.f2_m2()
    assert solve_count_open(inst, 3, OPEN) is None
    # Dual counting: 3 hospitals, so 2 closed == 1 open.
    assert solve_count_open(inst, 2, CLOSED) == fixtures.f2_m1()


def test_count_open_bounds():
    with pytest.raises(RejectedInputError):
        solve_count_open(fixtures.f2(), 7, OPEN)
    with pytest.raises(RejectedInputError):
        solve_count_open(fixtures.f2(), 1, "sideways")


def test_fpt_agrees_with_oracle_any_lower_quota():
    rng = random.Random(555)
    yes = no = 0
    for _ in range(300):
        inst = random_instance(rng, n_max=6, m_max=4, max_lower=4)
        got = solve_fpt_subsets(inst)
        stable = enumerate_stable(inst)
        if got is None:
            assert stable == []
            no += 1
        else:
            assert canonical(got) in {canonical(m) for m in stable}
            yes += 1
    assert yes and no


def test_fpt_ties_agrees_with_oracle():
    rng = random.Random(777)
    yes = no = 0
    for i in range(200):
        if i % 3 == 0:
            # Unsolvable ties instances need a planted coalition cycle;
            # uniformly random ones essentially always have a solution.
            inst = cycle_flavored_instance(rng, ties=True)
        else:
            inst = random_instance(
                rng, n_max=6, m_max=4, max_lower=3, ties=True, unbounded_only=True
            )
        got = solve_fpt_subsets_ties(inst)
        stable = enumerate_stable(inst)
        if got is None:
            assert stable == [], f"missed {stable[0]}"
            no += 1
        else:
            assert check_stability(inst, got).stable
            yes += 1
    assert yes and no


def test_count_open_agrees_with_oracle():
    rng = random.Random(888)
    for _ in range(150):
        inst = random_instance(rng, n_max=6, m_max=4, max_lower=3)
        by_count = {len(set(m.values())) for m in enumerate_stable(inst)}
        for k in range(inst.m + 1):
            got = solve_count_open(inst, k, OPEN)
            if got is None:
                assert k not in by_count
            else:
                assert len(set(got.values())) == k
                assert check_stability(inst, got).stable


def test_fpt_matches_q2_verdicts_on_quota_two_corpus():
    rng = random.Random(31337)
    for _ in range(200):
        inst = random_instance(rng, n_max=6, m_max=4, max_lower=2)
        assert (solve_fpt_subsets(inst) is None) == (solve_q2(inst) is None)
