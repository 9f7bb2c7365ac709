"""Certified instance generators from hardness constructions.

Each generator builds an instance whose stable matchings correspond exactly
to solutions of a source problem (satisfiability, multicolored independent
set, clique, stable marriage with ties), which makes them structured test
fixtures with a known verdict.  Brute-force deciders for the source problems
live here too so the correspondence can be checked at desk scale.

Order choices the constructions leave open (incident-edge order, acceptor
order) are fixed to input order; the demo builders reproduce the papers'
hand-drawn examples, including their ad-hoc neighbor orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .core import Instance, Matching, UNBOUNDED, pref_list
from .errors import RejectedInputError
from .fixtures import f1


def gen_counterexample() -> Instance:
    """The three-agent cycle without a stable matching."""
    return f1()


# -- satisfiability ------------------------------------------------------------


@dataclass(frozen=True)
class CnfFormula:
    """3-literal clauses; every variable occurs exactly twice positively and
    twice negatively.  Literals are signed 1-based variable indices."""

    variables: int
    clauses: tuple[tuple[int, int, int], ...]

    def validate(self) -> None:
        pos = {i: 0 for i in range(1, self.variables + 1)}
        neg = {i: 0 for i in range(1, self.variables + 1)}
        for clause in self.clauses:
            if len(clause) != 3:
                raise RejectedInputError("clauses must have exactly three literals")
            if len(set(clause)) != 3:
                raise RejectedInputError("repeated literal inside a clause")
            for lit in clause:
                v = abs(lit)
                if not 1 <= v <= self.variables:
                    raise RejectedInputError(f"literal {lit} out of range")
                (pos if lit > 0 else neg)[v] += 1
        for v in range(1, self.variables + 1):
            if pos[v] != 2 or neg[v] != 2:
                raise RejectedInputError(
                    f"variable {v} occurs {pos[v]}+/{neg[v]}- (need 2/2)"
                )


def sat_satisfiable(f: CnfFormula) -> bool:
    for bits in range(1 << f.variables):
        truth = {i + 1: bool(bits >> i & 1) for i in range(f.variables)}
        if all(
            any(truth[abs(l)] == (l > 0) for l in clause) for clause in f.clauses
        ):
            return True
    return False


@dataclass
class SatGadget:
    instance: Instance
    formula: CnfFormula

    def matching_for(self, true_vars: set[int]) -> Matching:
        """The stable matching induced by a satisfying assignment."""
        m: Matching = {}
        for i in range(1, self.formula.variables + 1):
            if i in true_vars:
                m[f"x{i}"] = f"h{i}"
                m[f"d1_{i}"] = f"h{i}"
                m[f"d2_{i}"] = f"h{i}"
                m[f"xbar{i}"] = f"hbarstar{i}"
                m[f"sstar{i}"] = f"hbarstar{i}"
            else:
                m[f"xbar{i}"] = f"hbar{i}"
                m[f"d1_{i}"] = f"hbar{i}"
                m[f"d2_{i}"] = f"hbar{i}"
                m[f"x{i}"] = f"hstar{i}"
                m[f"sstar{i}"] = f"hstar{i}"
            m[f"s1_{i}"] = f"hp3_{i}"
            m[f"s2_{i}"] = f"hp3_{i}"
        return m

    def assignment_for(self, m: Matching) -> set[int]:
        """True variables read off a stable matching."""
        return {
            i
            for i in range(1, self.formula.variables + 1)
            if m.get(f"x{i}") != f"hstar{i}"
        }


def gen_sat(f: CnfFormula) -> SatGadget:
    """Instance with a stable matching iff the formula is satisfiable."""
    f.validate()
    occ_pos: dict[int, list[int]] = {i: [] for i in range(1, f.variables + 1)}
    occ_neg: dict[int, list[int]] = {i: [] for i in range(1, f.variables + 1)}
    for ci, clause in enumerate(f.clauses, start=1):
        for lit in clause:
            (occ_pos if lit > 0 else occ_neg)[abs(lit)].append(ci)

    residents: list[str] = []
    hospitals: list[str] = []
    lower: dict[str, int] = {}
    rprefs: dict[str, list] = {}

    for i in range(1, f.variables + 1):
        for h, lo in (
            (f"h{i}", 3),
            (f"hbar{i}", 3),
            (f"hstar{i}", 2),
            (f"hbarstar{i}", 2),
            (f"hp1_{i}", 2),
            (f"hp2_{i}", 2),
            (f"hp3_{i}", 2),
        ):
            hospitals.append(h)
            lower[h] = lo
    for ci in range(1, len(f.clauses) + 1):
        hospitals.append(f"hc{ci}")
        lower[f"hc{ci}"] = 3

    for i in range(1, f.variables + 1):
        cp, cn = occ_pos[i], occ_neg[i]
        residents += [f"x{i}", f"xbar{i}", f"d1_{i}", f"d2_{i}",
                      f"sstar{i}", f"s1_{i}", f"s2_{i}"]
        rprefs[f"x{i}"] = [f"h{i}", f"hc{cp[0]}", f"hc{cp[1]}", f"hstar{i}"]
        rprefs[f"xbar{i}"] = [f"hbar{i}", f"hc{cn[0]}", f"hc{cn[1]}", f"hbarstar{i}"]
        rprefs[f"d1_{i}"] = [f"h{i}", f"hbar{i}"]
        rprefs[f"d2_{i}"] = [f"hbar{i}", f"h{i}"]
        rprefs[f"sstar{i}"] = [f"hstar{i}", f"hbarstar{i}", f"hp1_{i}", f"hp2_{i}"]
        rprefs[f"s1_{i}"] = [f"hp2_{i}", f"hp3_{i}"]
        rprefs[f"s2_{i}"] = [f"hp3_{i}", f"hp1_{i}"]

    inst = _assemble_hr(residents, hospitals, lower, rprefs)
    return SatGadget(instance=inst, formula=f)


# -- multicolored independent set -----------------------------------------------


@dataclass(frozen=True)
class ColoredGraph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    coloring: dict[str, str]

    def colors(self) -> list[str]:
        seen: list[str] = []
        for v in self.vertices:
            c = self.coloring[v]
            if c not in seen:
                seen.append(c)
        return seen

    def validate(self, regular: bool = True) -> None:
        vs = set(self.vertices)
        for u, v in self.edges:
            if u not in vs or v not in vs:
                raise RejectedInputError(f"edge ({u},{v}) uses unknown vertices")
            if self.coloring[u] == self.coloring[v]:
                raise RejectedInputError("edges within one color are not allowed")
        if not regular:
            return
        degrees = {v: 0 for v in self.vertices}
        for u, v in self.edges:
            degrees[u] += 1
            degrees[v] += 1
        if len(set(degrees.values())) > 1:
            raise RejectedInputError("graph is not regular")
        sizes = {}
        for v in self.vertices:
            sizes[self.coloring[v]] = sizes.get(self.coloring[v], 0) + 1
        if len(set(sizes.values())) > 1:
            raise RejectedInputError("color classes have different sizes")


def has_multicolored_independent_set(g: ColoredGraph) -> bool:
    adjacent = {frozenset(e) for e in g.edges}
    classes = [
        [v for v in g.vertices if g.coloring[v] == c] for c in g.colors()
    ]
    for pick in product(*classes):
        if all(
            frozenset((a, b)) not in adjacent for a, b in combinations(pick, 2)
        ):
            return True
    return False


def _edge_id(u: str, v: str) -> str:
    return f"he_{u}_{v}"


def gen_mcis(
    g: ColoredGraph,
    k: int,
    neighbor_order: dict[str, list[str]] | None = None,
    demo: bool = False,
) -> Instance:
    """Instance with a stable matching iff the graph has a multicolored
    independent set (one vertex per color, pairwise non-adjacent).

    ``neighbor_order`` overrides the per-vertex incident-vertex list z(v, .);
    the default is input edge order.  ``demo`` skips the regularity check so
    the papers' illustrative non-regular example can be reproduced.
    """
    g.validate(regular=not demo)
    colors = g.colors()
    if k != len(colors):
        raise RejectedInputError(f"k={k} but the graph has {len(colors)} colors")

    edge_of: dict[frozenset, tuple[str, str]] = {
        frozenset(e): e for e in g.edges
    }
    neighbors: dict[str, list[str]] = {v: [] for v in g.vertices}
    for u, v in g.edges:
        neighbors[u].append(v)
        neighbors[v].append(u)
    if neighbor_order is not None:
        for v, order in neighbor_order.items():
            if sorted(order) != sorted(neighbors[v]):
                raise RejectedInputError(f"neighbor order of {v} is not a permutation")
            neighbors[v] = list(order)

    residents: list[str] = []
    hospitals: list[str] = []
    lower: dict[str, int] = {}
    rprefs: dict[str, list] = {}

    for v in g.vertices:
        hospitals.append(f"hv_{v}")
        lower[f"hv_{v}"] = 3
    for u, v in g.edges:
        hospitals.append(_edge_id(u, v))
        lower[_edge_id(u, v)] = 4
    for c in colors:
        for t in (1, 2, 3):
            hospitals.append(f"hp{t}_{c}")
            lower[f"hp{t}_{c}"] = 2

    def vertex_block(v: str) -> list[str]:
        block = [
            _edge_id(*edge_of[frozenset((v, w))]) for w in neighbors[v]
        ]
        block.append(f"hv_{v}")
        return block

    for c in colors:
        members = [v for v in g.vertices if g.coloring[v] == c]
        residents += [f"r1_{c}", f"r2_{c}", f"sstar_{c}", f"s1_{c}", f"s2_{c}"]
        forward: list[str] = []
        for v in members:
            forward += vertex_block(v)
        backward: list[str] = []
        for v in reversed(members):
            backward += vertex_block(v)
        rprefs[f"r1_{c}"] = forward
        rprefs[f"r2_{c}"] = backward
        rprefs[f"sstar_{c}"] = [f"hv_{v}" for v in members] + [
            f"hp1_{c}",
            f"hp2_{c}",
        ]
        rprefs[f"s1_{c}"] = [f"hp2_{c}", f"hp3_{c}"]
        rprefs[f"s2_{c}"] = [f"hp3_{c}", f"hp1_{c}"]

    return _assemble_hr(residents, hospitals, lower, rprefs)


def fig_mcis_demo() -> tuple[ColoredGraph, Instance]:
    """The illustrative two-color example, with its hand-picked neighbor order."""
    g = ColoredGraph(
        vertices=("v1c", "v2c", "v3c", "v1d", "v2d", "v3d"),
        edges=(("v1c", "v1d"), ("v1c", "v2d"), ("v2c", "v3d"), ("v3c", "v3d")),
        coloring={
            "v1c": "c", "v2c": "c", "v3c": "c",
            "v1d": "d", "v2d": "d", "v3d": "d",
        },
    )
    inst = gen_mcis(g, 2, neighbor_order={"v3d": ["v3c", "v2c"]}, demo=True)
    return g, inst


# -- clique ----------------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def validate(self) -> None:
        vs = set(self.vertices)
        seen = set()
        for u, v in self.edges:
            if u not in vs or v not in vs or u == v:
                raise RejectedInputError(f"bad edge ({u},{v})")
            if frozenset((u, v)) in seen:
                raise RejectedInputError(f"duplicate edge ({u},{v})")
            seen.add(frozenset((u, v)))


def has_clique(g: Graph, k: int) -> bool:
    adjacent = {frozenset(e) for e in g.edges}
    if k <= 1:
        return k == 1 and len(g.vertices) > 0 or k <= 0
    return any(
        all(frozenset((a, b)) in adjacent for a, b in combinations(pick, 2))
        for pick in combinations(g.vertices, k)
    )


def gen_clique(g: Graph, k: int) -> Instance:
    """House-allocation instance with a stable matching iff the graph has a
    clique of size k.  All hospitals are indifferent."""
    g.validate()
    if k < 1:
        raise RejectedInputError("k must be positive")
    incident: dict[str, list[tuple[str, str]]] = {v: [] for v in g.vertices}
    for e in g.edges:
        incident[e[0]].append(e)
        incident[e[1]].append(e)

    residents: list[str] = []
    hospitals: list[str] = []
    lower: dict[str, int] = {}
    upper: dict[str, float] = {}
    rprefs: dict[str, list] = {}

    def add_hospital(h: str, lo: int, up: int) -> None:
        hospitals.append(h)
        lower[h] = lo
        upper[h] = up

    for v in g.vertices:
        add_hospital(f"hv_{v}", 1, 1)
    for u, v in g.edges:
        add_hospital(_edge_id(u, v), 1, 1)
    vertex_sel = [f"hsel{j}" for j in range(1, k + 1)]
    edge_sel = [f"hesel{j}" for j in range(1, k * (k - 1) // 2 + 1)]
    for h in vertex_sel + edge_sel:
        add_hospital(h, 1, 1)
    for h in ("hp1", "hp2", "hp3"):
        add_hospital(h, 2, 2)

    for v in g.vertices:
        residents.append(f"rv_{v}")
        rprefs[f"rv_{v}"] = (
            vertex_sel + [_edge_id(*e) for e in incident[v]] + [f"hv_{v}"]
        )
    for u, v in g.edges:
        residents.append(f"re_{u}_{v}")
        rprefs[f"re_{u}_{v}"] = edge_sel + [_edge_id(u, v)]
    for j in range(1, k + 1):
        residents.append(f"rfill{j}")
        rprefs[f"rfill{j}"] = [f"hv_{v}" for v in g.vertices]
    residents += ["rstar", "rp1", "rp2", "rp3"]
    rprefs["rstar"] = [f"hv_{v}" for v in g.vertices] + ["hp1"]
    rprefs["rp1"] = ["hp1", "hp2"]
    rprefs["rp2"] = ["hp2", "hp3"]
    rprefs["rp3"] = ["hp3", "hp1"]

    acceptors: dict[str, list[str]] = {h: [] for h in hospitals}
    for r in residents:
        for h in rprefs[r]:
            acceptors[h].append(r)
    return Instance(
        residents=tuple(residents),
        hospitals=tuple(hospitals),
        lower_quota=lower,
        upper_quota=upper,
        resident_prefs=rprefs,
        hospital_prefs={h: [acceptors[h]] if acceptors[h] else [] for h in hospitals},
        indifferent=frozenset(hospitals),
    )


def fig_clique_demo() -> tuple[Graph, int, Instance]:
    """The illustrative four-vertex input with k = 2."""
    g = Graph(
        vertices=("v1", "v2", "v3", "v4"),
        edges=(("v1", "v2"), ("v1", "v3"), ("v2", "v3"), ("v1", "v4"), ("v3", "v4")),
    )
    return g, 2, gen_clique(g, 2)


# -- stable marriage with ties and incomplete lists -------------------------------


@dataclass
class SmtiGadget:
    instance: Instance
    men: dict[str, list]
    women: dict[str, list]

    def matching_for(self, pairs: dict[str, str]) -> Matching:
        """Stable matching induced by a complete stable marriage matching."""
        m: Matching = {}
        for man, woman in pairs.items():
            m[f"rm_{man}"] = f"hp_{man}_{woman}"
            m[f"rw_{woman}"] = f"hp_{man}_{woman}"
        for man in self.men:
            m[f"rstar_{man}"] = f"h_{man}"
            m[f"rp1_{man}"] = f"h_{man}"
            m[f"rp2_{man}"] = f"hpp_{man}"
            m[f"rp3_{man}"] = f"hpp_{man}"
        return m

    def pairs_for(self, m: Matching) -> dict[str, str]:
        pairs: dict[str, str] = {}
        for man in self.men:
            h = m.get(f"rm_{man}")
            if h and h.startswith("hp_"):
                pairs[man] = h[len(f"hp_{man}_") :]
        return pairs


def smti_complete_stable_exists(
    men: dict[str, list], women: dict[str, list]
) -> bool:
    """Brute force: is there a stable matching marrying every man?"""
    men_rank = {m: _level_rank(p) for m, p in men.items()}
    women_rank = {w: _level_rank(p) for w, p in women.items()}
    man_list = list(men)
    woman_options = [
        [w for w in men_rank[m]] for m in man_list
    ]
    for pick in product(*woman_options):
        if len(set(pick)) != len(pick):
            continue
        wife = dict(zip(man_list, pick))
        husband = {w: m for m, w in wife.items()}
        stable = True
        for m in man_list:
            for w in men_rank[m]:
                if m not in women_rank[w]:
                    continue
                m_better = men_rank[m][w] < men_rank[m][wife[m]]
                cur = husband.get(w)
                w_better = cur is None or women_rank[w][m] < women_rank[w][cur]
                if m_better and w_better:
                    stable = False
                    break
            if not stable:
                break
        if stable:
            return True
    return False


def _level_rank(groups: list) -> dict[str, int]:
    rank: dict[str, int] = {}
    for level, group in enumerate(pref_list(groups)):
        for x in group:
            rank[x] = level
    return rank


def gen_smti(men: dict[str, list], women: dict[str, list]) -> SmtiGadget:
    """Ties instance with a stable matching iff the marriage instance admits
    a complete weakly-stable matching."""
    men_rank = {m: _level_rank(p) for m, p in men.items()}
    women_rank = {w: _level_rank(p) for w, p in women.items()}
    for m, ranked in men_rank.items():
        for w in ranked:
            if w not in women_rank or m not in women_rank[w]:
                raise RejectedInputError(f"acceptability of {m}/{w} is one-sided")
    for w, ranked in women_rank.items():
        for m in ranked:
            if m not in men_rank or w not in men_rank[m]:
                raise RejectedInputError(f"acceptability of {w}/{m} is one-sided")

    residents: list[str] = []
    hospitals: list[str] = []
    lower: dict[str, int] = {}
    rprefs: dict[str, list] = {}

    for m in men:
        for w in men_rank[m]:
            h = f"hp_{m}_{w}"
            hospitals.append(h)
            lower[h] = 2
    for m in men:
        for h in (f"hstar_{m}", f"h_{m}", f"hprime_{m}", f"hpp_{m}"):
            hospitals.append(h)
            lower[h] = 2

    for m, prefs in men.items():
        residents.append(f"rm_{m}")
        rprefs[f"rm_{m}"] = [
            [f"hp_{m}_{w}" for w in group] for group in pref_list(prefs)
        ] + [[f"hstar_{m}"]]
    for w, prefs in women.items():
        residents.append(f"rw_{w}")
        rprefs[f"rw_{w}"] = [
            [f"hp_{m}_{w}" for m in group] for group in pref_list(prefs)
        ]
    for m in men:
        residents += [f"rstar_{m}", f"rp1_{m}", f"rp2_{m}", f"rp3_{m}"]
        rprefs[f"rstar_{m}"] = [f"hstar_{m}", f"h_{m}"]
        rprefs[f"rp1_{m}"] = [f"h_{m}", f"hprime_{m}"]
        rprefs[f"rp2_{m}"] = [f"hprime_{m}", f"hpp_{m}"]
        rprefs[f"rp3_{m}"] = [f"hpp_{m}", f"h_{m}"]

    inst = _assemble_hr(residents, hospitals, lower, rprefs, single_tie=True)
    return SmtiGadget(instance=inst, men=men, women=women)


def _assemble_hr(
    residents: list[str],
    hospitals: list[str],
    lower: dict[str, int],
    rprefs: dict[str, list],
    single_tie: bool = False,
) -> Instance:
    """Finish a generator: unbounded uppers, hospital lists from acceptors.

    Hospital preferences are irrelevant in these no-upper-quota instances;
    they are fixed to acceptor order (one big tie for the ties variant)."""
    acceptors: dict[str, list[str]] = {h: [] for h in hospitals}
    for r in residents:
        for h in _flat(rprefs[r]):
            acceptors[h].append(r)
    if single_tie:
        hprefs = {h: [acceptors[h]] if acceptors[h] else [] for h in hospitals}
    else:
        hprefs = {h: acceptors[h] for h in hospitals}
    return Instance(
        residents=tuple(residents),
        hospitals=tuple(hospitals),
        lower_quota=lower,
        upper_quota={h: UNBOUNDED for h in hospitals},
        resident_prefs=rprefs,
        hospital_prefs=hprefs,
        indifferent=frozenset(),
    )


def _flat(groups) -> list[str]:
    out = []
    for g in pref_list(groups):
        out.extend(g)
    return out
