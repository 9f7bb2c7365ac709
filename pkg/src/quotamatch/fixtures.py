"""Canonical worked instances used across the test suite and the generators.

F1 is the three-agent cycle with no stable matching, F2 the four-resident
instance with exactly two stable matchings, and F3/F4 are the two small
instances whose solver traces are checked step by step.  Hospital preference
lists in F1/F2 are irrelevant to stability (no hospital can ever be full) and
are fixed to resident id order.
"""

from __future__ import annotations

from .core import Instance, Matching, UNBOUNDED


def f1() -> Instance:
    """Cyclic instance with lower quotas two and no stable matching."""
    return Instance(
        residents=("r1", "r2", "r3"),
        hospitals=("h1", "h2", "h3"),
        lower_quota={"h1": 2, "h2": 2, "h3": 2},
        upper_quota={"h1": UNBOUNDED, "h2": UNBOUNDED, "h3": UNBOUNDED},
        resident_prefs={
            "r1": ["h1", "h2"],
            "r2": ["h2", "h3"],
            "r3": ["h3", "h1"],
        },
        hospital_prefs={
            "h1": ["r1", "r3"],
            "h2": ["r1", "r2"],
            "h3": ["r2", "r3"],
        },
    )


def f2() -> Instance:
    """Instance with exactly the two stable matchings ``f2_m1``/``f2_m2``."""
    return Instance(
        residents=("r1", "r2", "r3", "r4"),
        hospitals=("h1", "h2", "h3"),
        lower_quota={"h1": 1, "h2": 2, "h3": 4},
        upper_quota={"h1": UNBOUNDED, "h2": UNBOUNDED, "h3": UNBOUNDED},
        resident_prefs={
            "r1": ["h3", "h1"],
            "r2": ["h2", "h3"],
            "r3": ["h3", "h2"],
            "r4": ["h3"],
        },
        hospital_prefs={
            "h1": ["r1"],
            "h2": ["r2", "r3"],
            "h3": ["r1", "r2", "r3", "r4"],
        },
    )


def f2_m1() -> Matching:
    return {"r1": "h3", "r2": "h3", "r3": "h3", "r4": "h3"}


def f2_m2() -> Matching:
    return {"r1": "h1", "r2": "h2", "r3": "h2"}


def f3() -> Instance:
    """Four-hospital propose-and-reject example; h4 empties during Phase 1."""
    return Instance(
        residents=("r1", "r2", "r3"),
        hospitals=("h1", "h2", "h3", "h4"),
        lower_quota={"h1": 1, "h2": 2, "h3": 2, "h4": 2},
        upper_quota={"h1": 1, "h2": 2, "h3": 2, "h4": 2},
        resident_prefs={
            "r1": ["h1", "h2"],
            "r2": ["h4", "h2", "h3"],
            "r3": ["h3", "h1", "h4"],
        },
        hospital_prefs={
            "h1": ["r3", "r1"],
            "h2": ["r1", "r2"],
            "h3": ["r2", "r3"],
            "h4": ["r2", "r3"],
        },
    )


def f4() -> Instance:
    """Three-hospital rotation example with unique stable matching ``f4_stable``."""
    return Instance(
        residents=("r1", "r2", "r3"),
        hospitals=("h1", "h2", "h3"),
        lower_quota={"h1": 1, "h2": 2, "h3": 2},
        upper_quota={"h1": 1, "h2": 2, "h3": 2},
        resident_prefs={
            "r1": ["h1", "h2"],
            "r2": ["h2", "h3"],
            "r3": ["h3", "h1"],
        },
        hospital_prefs={
            "h1": ["r3", "r1"],
            "h2": ["r1", "r2"],
            "h3": ["r2", "r3"],
        },
    )


def f4_stable() -> Matching:
    return {"r1": "h2", "r2": "h2", "r3": "h1"}


def rural_two_hospitals() -> Instance:
    """Two quota-two hospitals wanted by two residents with opposed orders.

    Has two stable matchings that open different hospitals but match the same
    residents, illustrating the weakened rural-hospitals property.  (With
    identical resident orders the losing hospital would be blocked by a
    coalition, leaving only one stable matching.)
    """
    return Instance(
        residents=("r1", "r2"),
        hospitals=("h1", "h2"),
        lower_quota={"h1": 2, "h2": 2},
        upper_quota={"h1": 2, "h2": 2},
        resident_prefs={"r1": ["h1", "h2"], "r2": ["h2", "h1"]},
        hospital_prefs={"h1": ["r1", "r2"], "h2": ["r1", "r2"]},
    )
