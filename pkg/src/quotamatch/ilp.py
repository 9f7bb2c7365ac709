"""Integer models for the house-allocation and ties variants, solved exactly.

Residents are grouped into types (identical preference relations, plus
identical hospital signatures on the ties path), which bounds the variable
count by a function of the hospital count.  Models are solved by a naive
depth-first search with per-constraint interval propagation; Lenstra-style
machinery is deliberately out of scope at desk sizes.

The no-coalition conditions here are strict (< l(h)) and count unmatched
residents as willing to open a closed hospital; see the tests for the
instances that force both points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator

from .core import Instance, Matching, check_stability
from .errors import (
    InternalInvariantError,
    RejectedInputError,
    SolverBudgetError,
    WrongVariantError,
)

DEFAULT_NODE_BUDGET = 5_000_000
DEFAULT_SPACE_BUDGET = 10**18


@dataclass(frozen=True)
class IlpVariable:
    name: str
    lower: int
    upper: int
    binary: bool = False  # section marker for the LP export, not a bound


@dataclass(frozen=True)
class IlpConstraint:
    coeffs: tuple[tuple[str, int], ...]  # (variable name, coefficient)
    relation: str  # one of '<=', '>=', '='
    constant: int
    label: str = ""


@dataclass
class ResidentType:
    prefs: tuple  # canonical preference relation (tuple of tie groups)
    members: tuple[str, ...]
    signature: tuple | None = None

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass
class IlpModel:
    variables: list[IlpVariable]
    constraints: list[IlpConstraint]
    metadata: dict[str, tuple]
    types: list[ResidentType] = field(default_factory=list)

    def __post_init__(self):
        declared = {v.name for v in self.variables}
        if len(declared) != len(self.variables):
            raise RejectedInputError("duplicate variable name in model")
        for c in self.constraints:
            for name, _ in c.coeffs:
                if name not in declared:
                    raise RejectedInputError(f"constraint references unknown {name}")


def resident_types(
    inst: Instance, signatures: dict[str, tuple] | None = None
) -> list[ResidentType]:
    """Group residents by preference relation (and signature, when given).

    Without signatures the instance must be house-allocation shaped, since
    hospital preferences would otherwise distinguish same-preference
    residents.
    """
    if signatures is None and not inst.is_ha_shape():
        raise WrongVariantError("typing without signatures needs indifferent hospitals")
    buckets: dict[tuple, list[str]] = {}
    for r in inst.residents:
        key = tuple(tuple(g) for g in inst.resident_prefs.get(r, ()))
        if signatures is not None:
            key = (key, signatures[r])
        buckets.setdefault(key, []).append(r)
    out = []
    for key in sorted(buckets, key=lambda k: inst.resident_index(buckets[k][0])):
        members = tuple(buckets[key])
        if signatures is None:
            out.append(ResidentType(prefs=key, members=members))
        else:
            out.append(ResidentType(prefs=key[0], members=members, signature=key[1]))
    return out


def _rank_of(prefs: tuple) -> dict[str, int]:
    return {h: level for level, group in enumerate(prefs) for h in group}


def build_haqlu_model(inst: Instance) -> IlpModel:
    """Feasibility ILP for house-allocation instances, one x per (type, hospital)."""
    if not inst.is_ha_shape():
        raise WrongVariantError("model needs all hospitals indifferent")
    types = resident_types(inst)
    n = inst.n
    variables: list[IlpVariable] = []
    metadata: dict[str, tuple] = {}
    x_name: dict[tuple[int, str], str] = {}
    for j, h in enumerate(inst.hospitals):
        o, y = f"o_h{j}", f"y_h{j}"
        variables.append(IlpVariable(o, 0, 1, binary=True))
        variables.append(IlpVariable(y, 0, 1, binary=True))
        metadata[o] = ("open", h)
        metadata[y] = ("undersubscribed", h)
        for i, t in enumerate(types):
            name = f"x_{i}_h{j}"
            variables.append(IlpVariable(name, 0, t.count))
            metadata[name] = ("x", i, h)
            x_name[(i, h)] = name

    constraints: list[IlpConstraint] = []
    ranks = [_rank_of(t.prefs) for t in types]
    for j, h in enumerate(inst.hospitals):
        u_eff = inst.effective_upper(h)
        o, y = f"o_h{j}", f"y_h{j}"
        # (1) y_h = 1 whenever h is open and undersubscribed.
        constraints.append(
            IlpConstraint(
                tuple(
                    [(x_name[(i, h)], 1) for i in range(len(types))]
                    + [(y, n), (o, -u_eff)]
                ),
                ">=",
                0,
                label=f"undersub_link[{h}]",
            )
        )
        # (2) no blocking pair against an undersubscribed open hospital.
        for i, t in enumerate(types):
            if h not in ranks[i]:
                continue
            better = [
                x_name[(i, h2)]
                for h2 in inst.hospitals
                if h2 in ranks[i] and ranks[i][h2] <= ranks[i][h]
            ]
            constraints.append(
                IlpConstraint(
                    tuple([(v, 1) for v in better] + [(y, -n)]),
                    ">=",
                    t.count - n,
                    label=f"no_pair[{i},{h}]",
                )
            )
        # (3) no blocking coalition: fewer than l(h) residents may sit
        # strictly below a closed h, counting the unmatched ones.
        coeffs: list[tuple[str, int]] = []
        willing = 0
        for i, t in enumerate(types):
            if h not in ranks[i]:
                continue
            willing += t.count
            for h2 in inst.hospitals:
                if h2 in ranks[i] and ranks[i][h2] <= ranks[i][h]:
                    coeffs.append((x_name[(i, h2)], -1))
        if willing >= inst.lower_quota[h]:
            constraints.append(
                IlpConstraint(
                    tuple(coeffs + [(o, -n)]),
                    "<=",
                    inst.lower_quota[h] - 1 - willing,
                    label=f"no_coalition[{h}]",
                )
            )
        # (4) closed or within the quota band.
        load = tuple((x_name[(i, h)], 1) for i in range(len(types)))
        constraints.append(
            IlpConstraint(
                load + ((o, -inst.lower_quota[h]),), ">=", 0, label=f"quota_lo[{h}]"
            )
        )
        constraints.append(
            IlpConstraint(load + ((o, -u_eff),), "<=", 0, label=f"quota_hi[{h}]")
        )
    # (5) type counts and (6) acceptance zeros.
    for i, t in enumerate(types):
        constraints.append(
            IlpConstraint(
                tuple((x_name[(i, h)], 1) for h in inst.hospitals),
                "<=",
                t.count,
                label=f"type_count[{i}]",
            )
        )
        for h in inst.hospitals:
            if h not in ranks[i]:
                constraints.append(
                    IlpConstraint(
                        ((x_name[(i, h)], 1),), "=", 0, label=f"reject[{i},{h}]"
                    )
                )
    return IlpModel(variables, constraints, metadata, types)


@dataclass
class Guess:
    """One branch of the ties solver: open set, per-hospital worst resident,
    and the subset of open hospitals guessed full."""

    open_set: frozenset[str]
    worst_resident: dict[str, str]
    full_set: frozenset[str]


def _signature(inst: Instance, r: str, guess: Guess, open_order: list[str]) -> tuple:
    sig = []
    for h in open_order:
        accepted = inst.accepted_residents(h)
        if r not in accepted:
            sig.append(-1)
            continue
        mine = inst.h_rank(h, r)
        worst = inst.h_rank(h, guess.worst_resident[h])
        sig.append(1 if mine < worst else (0 if mine == worst else -1))
    return tuple(sig)


def validate_guess(inst: Instance, guess: Guess) -> None:
    if not guess.open_set <= set(inst.hospitals):
        raise RejectedInputError("guess opens unknown hospitals")
    if not guess.full_set <= guess.open_set:
        raise RejectedInputError("full hospitals must be open")
    if set(guess.worst_resident) != set(guess.open_set):
        raise RejectedInputError("need exactly one worst resident per open hospital")
    for h, r in guess.worst_resident.items():
        if r not in inst.accepted_residents(h):
            raise RejectedInputError(f"{r} is not accepted by {h}")


def build_hrqlut_model(inst: Instance, guess: Guess) -> IlpModel:
    """Feasibility ILP for one guess of the ties solver (conditions 1a-10)."""
    validate_guess(inst, guess)
    open_order = sorted(guess.open_set, key=inst.hospital_index)
    signatures = {r: _signature(inst, r, guess, open_order) for r in inst.residents}
    types = resident_types(inst, signatures)
    sig_index = {h: k for k, h in enumerate(open_order)}
    ranks = [_rank_of(t.prefs) for t in types]

    variables: list[IlpVariable] = []
    metadata: dict[str, tuple] = {}
    x_name: dict[tuple[int, str], str] = {}
    for j, h in enumerate(open_order):
        for i, t in enumerate(types):
            name = f"x_{i}_h{j}"
            variables.append(IlpVariable(name, 0, t.count))
            metadata[name] = ("x", i, h, t.signature)
            x_name[(i, h)] = name

    def weakly_better(i: int, h: str) -> list[str]:
        return [
            x_name[(i, h2)]
            for h2 in open_order
            if h2 in ranks[i] and ranks[i][h2] <= ranks[i][h]
        ]

    constraints: list[IlpConstraint] = []
    for h in open_order:
        for i, t in enumerate(types):
            if h not in ranks[i]:
                continue
            sig = t.signature[sig_index[h]]
            # (1a) residents the hospital prefers to its guessed worst must
            # not end up strictly below h.
            if sig == 1:
                constraints.append(
                    IlpConstraint(
                        tuple((v, 1) for v in weakly_better(i, h)),
                        ">=",
                        t.count,
                        label=f"no_pair_preferred[{i},{h}]",
                    )
                )
            # (1b) nobody sits strictly below an undersubscribed hospital.
            if h not in guess.full_set:
                constraints.append(
                    IlpConstraint(
                        tuple((v, 1) for v in weakly_better(i, h)),
                        ">=",
                        t.count,
                        label=f"no_pair_undersub[{i},{h}]",
                    )
                )
            # (8) nobody below the guessed worst is assigned to h.
            if sig == -1:
                constraints.append(
                    IlpConstraint(
                        ((x_name[(i, h)], 1),), "=", 0, label=f"below_worst[{i},{h}]"
                    )
                )
        # (3) quota band, (6)/(7) fullness, and (9) the worst guess is hit.
        load = tuple((x_name[(i, h)], 1) for i in range(len(types)))
        constraints.append(
            IlpConstraint(load, ">=", inst.lower_quota[h], label=f"quota_lo[{h}]")
        )
        constraints.append(
            IlpConstraint(
                load, "<=", inst.effective_upper(h), label=f"quota_hi[{h}]"
            )
        )
        if h in guess.full_set:
            constraints.append(
                IlpConstraint(load, "=", inst.effective_upper(h), label=f"full[{h}]")
            )
        else:
            constraints.append(
                IlpConstraint(
                    load, "<=", inst.effective_upper(h) - 1, label=f"undersub[{h}]"
                )
            )
        tied = tuple(
            (x_name[(i, h)], 1)
            for i, t in enumerate(types)
            if t.signature[sig_index[h]] == 0
        )
        constraints.append(
            IlpConstraint(tied, ">=", 1, label=f"worst_is_matched[{h}]")
        )
    # (2) no coalition opens a closed hospital; unmatched residents count.
    for h in inst.hospitals:
        if h in guess.open_set:
            continue
        coeffs: list[tuple[str, int]] = []
        willing = 0
        for i, t in enumerate(types):
            if h not in ranks[i]:
                continue
            willing += t.count
            for v in weakly_better(i, h):
                coeffs.append((v, -1))
        if willing >= inst.lower_quota[h]:
            constraints.append(
                IlpConstraint(
                    tuple(coeffs),
                    "<=",
                    inst.lower_quota[h] - 1 - willing,
                    label=f"no_coalition[{h}]",
                )
            )
    # (4) type counts and (5) acceptance zeros.
    for i, t in enumerate(types):
        constraints.append(
            IlpConstraint(
                tuple((x_name[(i, h)], 1) for h in open_order),
                "<=",
                t.count,
                label=f"type_count[{i}]",
            )
        )
        for h in open_order:
            if h not in ranks[i]:
                constraints.append(
                    IlpConstraint(
                        ((x_name[(i, h)], 1),), "=", 0, label=f"reject[{i},{h}]"
                    )
                )
    return IlpModel(variables, constraints, metadata, types)


def enumerate_guesses(inst: Instance) -> Iterator[Guess]:
    """All well-formed guesses: open set, worst resident per open hospital,
    full subset (only over bounded-capacity hospitals)."""
    hs = list(inst.hospitals)
    subsets = sorted(
        range(1 << len(hs)), key=lambda mask: (bin(mask).count("1"), mask)
    )
    for mask in subsets:
        open_list = [h for i, h in enumerate(hs) if mask >> i & 1]
        candidates = []
        for h in open_list:
            accepted = [
                r for r in inst.residents if r in inst.accepted_residents(h)
            ]
            candidates.append(accepted)
        if any(not c for c in candidates):
            continue  # an open hospital nobody accepts can never open
        fullable = [h for h in open_list if inst.effective_upper(h) <= inst.n]
        full_masks = sorted(
            range(1 << len(fullable)),
            key=lambda fm: (bin(fm).count("1"), fm),
        )
        for worst in product(*candidates):
            for fm in full_masks:
                yield Guess(
                    open_set=frozenset(open_list),
                    worst_resident=dict(zip(open_list, worst)),
                    full_set=frozenset(
                        h for i, h in enumerate(fullable) if fm >> i & 1
                    ),
                )


def solve_naive(
    model: IlpModel,
    node_budget: int = DEFAULT_NODE_BUDGET,
    space_budget: int = DEFAULT_SPACE_BUDGET,
) -> dict[str, int] | None:
    """First feasible assignment by depth-first search, or None.

    Values are tried in increasing order, so the answer is deterministic.
    Raises SolverBudgetError when the variable ranges multiply out beyond
    ``space_budget`` or the search visits more than ``node_budget`` nodes.
    """
    space = 1
    for v in model.variables:
        space *= v.upper - v.lower + 1
        if space > space_budget:
            raise SolverBudgetError("search space exceeds the configured budget")

    index = {v.name: i for i, v in enumerate(model.variables)}
    nvars = len(model.variables)
    rows: list[tuple[str, int, list[tuple[int, int]]]] = []
    for c in model.constraints:
        terms: dict[int, int] = {}
        for name, coeff in c.coeffs:
            terms[index[name]] = terms.get(index[name], 0) + coeff
        rows.append((c.relation, c.constant, sorted(terms.items())))

    lo = [v.lower for v in model.variables]
    hi = [v.upper for v in model.variables]
    # Residual bounds per row: min/max contribution of unassigned variables.
    minrest = []
    maxrest = []
    current = []
    for rel, k, terms in rows:
        mn = sum(c * (lo[i] if c > 0 else hi[i]) for i, c in terms)
        mx = sum(c * (hi[i] if c > 0 else lo[i]) for i, c in terms)
        minrest.append(mn)
        maxrest.append(mx)
        current.append(0)

    by_var: list[list[tuple[int, int]]] = [[] for _ in range(nvars)]
    for ci, (_, _, terms) in enumerate(rows):
        for vi, coeff in terms:
            by_var[vi].append((ci, coeff))

    def violated(ci: int) -> bool:
        rel, k, _ = rows[ci]
        lo_v = current[ci] + minrest[ci]
        hi_v = current[ci] + maxrest[ci]
        if rel == "<=":
            return lo_v > k
        if rel == ">=":
            return hi_v < k
        return lo_v > k or hi_v < k

    if any(violated(ci) for ci in range(len(rows))):
        return None

    nodes = 0
    assignment = [0] * nvars

    def assign(vi: int, value: int) -> list[int]:
        touched = []
        for ci, coeff in by_var[vi]:
            current[ci] += coeff * value
            if coeff > 0:
                minrest[ci] -= coeff * lo[vi]
                maxrest[ci] -= coeff * hi[vi]
            else:
                minrest[ci] -= coeff * hi[vi]
                maxrest[ci] -= coeff * lo[vi]
            touched.append(ci)
        return touched

    def undo(vi: int, value: int) -> None:
        for ci, coeff in by_var[vi]:
            current[ci] -= coeff * value
            if coeff > 0:
                minrest[ci] += coeff * lo[vi]
                maxrest[ci] += coeff * hi[vi]
            else:
                minrest[ci] += coeff * hi[vi]
                maxrest[ci] += coeff * lo[vi]

    def dfs(vi: int) -> bool:
        nonlocal nodes
        if vi == nvars:
            return True
        for value in range(lo[vi], hi[vi] + 1):
            nodes += 1
            if nodes > node_budget:
                raise SolverBudgetError("node budget exhausted")
            assignment[vi] = value
            touched = assign(vi, value)
            if not any(violated(ci) for ci in touched) and dfs(vi + 1):
                return True
            undo(vi, value)
        return False

    if not dfs(0):
        return None
    return {v.name: assignment[i] for i, v in enumerate(model.variables)}


def decode_solution(
    inst: Instance, model: IlpModel, assignment: dict[str, int]
) -> Matching:
    """Turn per-type counts back into a concrete matching, lowest ids first."""
    m: Matching = {}
    cursor = {i: 0 for i in range(len(model.types))}
    for name, value in assignment.items():
        meta = model.metadata.get(name)
        if not meta or meta[0] != "x" or value == 0:
            continue
        i, h = meta[1], meta[2]
        members = model.types[i].members
        if cursor[i] + value > len(members):
            raise InternalInvariantError(f"type {i} over-assigned in solution")
        for r in members[cursor[i] : cursor[i] + value]:
            m[r] = h
        cursor[i] += value
    return m


def solve_haqlu(inst: Instance, node_budget: int = DEFAULT_NODE_BUDGET) -> Matching | None:
    """House-allocation solver: build the type ILP, search, decode."""
    model = build_haqlu_model(inst)
    assignment = solve_naive(model, node_budget=node_budget)
    if assignment is None:
        return None
    m = decode_solution(inst, model, assignment)
    if not check_stability(inst, m).stable:
        raise InternalInvariantError("decoded house-allocation matching unstable")
    return m


def solve_hrqlut_xp(
    inst: Instance, node_budget: int = DEFAULT_NODE_BUDGET
) -> Matching | None:
    """Ties solver: enumerate guesses, solve each model, decode the first hit."""
    for guess in enumerate_guesses(inst):
        if any(
            len(inst.accepted_residents(h)) < inst.lower_quota[h]
            for h in guess.open_set
        ):
            continue
        model = build_hrqlut_model(inst, guess)
        assignment = solve_naive(model, node_budget=node_budget)
        if assignment is None:
            continue
        m = decode_solution(inst, model, assignment)
        if not check_stability(inst, m).stable:
            raise InternalInvariantError("decoded ties matching unstable")
        return m
    return None


def export_lp(model: IlpModel) -> str:
    """CPLEX-LP text of a model; byte-deterministic across runs."""
    out = ["Minimize", " obj: 0", "Subject To"]
    rel_map = {"<=": "<=", ">=": ">=", "=": "="}
    for ci, c in enumerate(model.constraints):
        if not c.coeffs:
            continue
        terms = []
        for idx, (name, coeff) in enumerate(c.coeffs):
            if coeff >= 0:
                sign = "+ " if idx else ""
            else:
                sign = "- "
            terms.append(f"{sign}{abs(coeff)} {name}")
        label = c.label or f"c{ci}"
        out.append(f" {label}: {' '.join(terms)} {rel_map[c.relation]} {c.constant}")
    out.append("Bounds")
    for v in model.variables:
        if not v.binary:
            out.append(f" {v.lower} <= {v.name} <= {v.upper}")
    generals = [v.name for v in model.variables if not v.binary]
    if generals:
        out.append("Generals")
        out.append(" " + " ".join(generals))
    binaries = [v.name for v in model.variables if v.binary]
    if binaries:
        out.append("Binaries")
        out.append(" " + " ".join(binaries))
    out.append("End")
    return "\n".join(out) + "\n"
