"""Taxonomical cluster spaces maintained online under the g-relation.

A ``ClusterSpace`` is the Hasse diagram of the g-codes of one feature (I or
O).  Node ``p`` is a parent of node ``c`` when ``p`` strictly subsumes ``c``
(``c`` carries every bit of ``p``) and no other node lies between them.
Services with identical g-codes share one concrete node.  Abstract nodes
carry the AND of two sibling codes and act as their common cover.

Insertion descends from the roots along plug-in branches to find the most
specific parents (MSP), creates abstract covers for sibling matches, then
searches the least specific children (LSC) below the MSP.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ClusterSpaceError, StaleCodeError
from .matchmaker import EXACT, PLUG_IN, SIBLING, SUBSUME, classify
from .service import FEATURES

CONCRETE = "concrete"
ABSTRACT = "abstract"
ABSTRACTION_MODES = ("rootless", "roots", "all")


@dataclass(eq=False)
class TaxonomyNode:
    id: int
    kind: str
    code: int
    services: set = field(default_factory=set)
    parents: set = field(default_factory=set)
    children: set = field(default_factory=set)
    # OR of the codes of all strict descendants; lets the LSC search skip
    # subtrees that cannot contain a node carrying every bit of the sample.
    below: int = 0

    @property
    def gcode_hex(self) -> str:
        return format(self.code, "x")


@dataclass(frozen=True)
class Placement:
    service_id: str
    node_id: int
    exact: bool
    parents: frozenset
    children: frozenset
    abstracts: tuple
    comparisons: int


class ClusterSpace:
    """Hasse diagram of services under the g-relation for one feature.

    ``abstraction`` decides when sibling matches produce abstract covers:
    ``"rootless"`` only for a sample that found no parent, ``"roots"`` for
    any sibling among the roots, ``"all"`` for siblings met at any depth of
    the MSP descent.
    """

    def __init__(self, feature: str = "O", *, generation: int = 0, abstraction: str = "rootless"):
        if feature not in FEATURES:
            raise ValueError(f"feature must be one of {FEATURES}")
        if abstraction not in ABSTRACTION_MODES:
            raise ValueError(f"abstraction must be one of {ABSTRACTION_MODES}")
        self.feature = feature
        self.generation = generation
        self.abstraction = abstraction
        self.nodes: dict[int, TaxonomyNode] = {}
        self.comparisons = 0
        self.insert_log: list[tuple[int, int]] = []
        self._roots: set[int] = set()
        self._by_code: dict[int, int] = {}
        self._service_node: dict[str, int] = {}
        self._next_id = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, service_id) -> bool:
        return service_id in self._service_node

    @property
    def roots(self) -> list[int]:
        return sorted(self._roots)

    @property
    def service_ids(self) -> list[str]:
        return sorted(self._service_node)

    def node_of(self, service_id: str) -> TaxonomyNode:
        try:
            return self.nodes[self._service_node[service_id]]
        except KeyError:
            raise ClusterSpaceError(f"unknown service {service_id!r}") from None

    def node_by_code(self, code: int) -> TaxonomyNode | None:
        nid = self._by_code.get(code)
        return None if nid is None else self.nodes[nid]

    def concrete_nodes(self) -> list[TaxonomyNode]:
        return [n for n in self.nodes.values() if n.kind == CONCRETE]

    # -- search -----------------------------------------------------------

    def _cmp(self, a: int, b: int):
        self.comparisons += 1
        return classify(a, b)

    def _search(self, code: int):
        """Depth-first descent along plug-in branches.

        Returns ``(exact_node, msp, sibling_codes)``.  Every node is compared
        at most once per search (the transient "visited" marking).
        """
        nodes = self.nodes
        seen: dict[int, object] = {}
        msp: set[int] = set()
        siblings: set[int] = set()
        expanded: set[int] = set()
        stack: list = [None]
        every_level = self.abstraction == "all"
        while stack:
            x = stack.pop()
            kids = self._roots if x is None else nodes[x].children
            plug_child = False
            for c in kids:
                r = seen.get(c)
                if r is None:
                    r = seen[c] = self._cmp(code, nodes[c].code)
                if r is EXACT:
                    return c, set(), set()
                if r is PLUG_IN:
                    plug_child = True
                    if c not in expanded:
                        expanded.add(c)
                        stack.append(c)
                elif r is SIBLING and (x is None or every_level):
                    siblings.add(code & nodes[c].code)
            if x is not None and not plug_child:
                msp.add(x)
        return None, msp, siblings

    def _find_lsc(self, code: int, msp: set[int]) -> set[int]:
        nodes = self.nodes
        if msp:
            # every LSC member lies below every MSP member; start from the
            # most specific one
            start = nodes[max(msp, key=lambda i: (nodes[i].code.bit_count(), -i))]
            if start.below & code != code:
                return set()
            stack = list(start.children)
        else:
            stack = list(self._roots)
        found: set[int] = set()
        seen: set[int] = set()
        while stack:
            d = stack.pop()
            if d in seen:
                continue
            seen.add(d)
            n = nodes[d]
            if self._cmp(code, n.code) is SUBSUME:
                found.add(d)
            elif n.below & code == code:
                stack.extend(n.children)
        if len(found) > 1:
            found = {
                c for c in found
                if not any(o != c and self._cmp(nodes[o].code, nodes[c].code) is SUBSUME for o in found)
            }
        return found

    def find_msp(self, code: int) -> set[int]:
        """Most specific parents of a g-code (the parents of its node if it exists)."""
        exact, msp, _ = self._search(code)
        if exact is not None:
            return set(self.nodes[exact].parents)
        return msp

    def find_lsc(self, code: int, msp: set[int] | None = None) -> set[int]:
        """Least specific children of a g-code, searched below ``msp`` only."""
        nid = self._by_code.get(code)
        if nid is not None:
            return set(self.nodes[nid].children)
        if msp is None:
            msp = self.find_msp(code)
        return self._find_lsc(code, msp)

    # -- mutation ---------------------------------------------------------

    def insert(self, service) -> Placement:
        """Place a service (anything with ``id``, ``generation`` and ``code(feature)``)."""
        if service.generation != self.generation:
            raise StaleCodeError(
                f"service {service.id!r} coded under generation {service.generation}, "
                f"space built under {self.generation}"
            )
        return self.add(service.id, service.code(self.feature))

    def add(self, service_id: str, code: int) -> Placement:
        if service_id in self._service_node:
            raise ClusterSpaceError(f"duplicate service id {service_id!r}")
        size, before = len(self.nodes), self.comparisons
        nid, exact, created = self._place(code, service_id)
        self._service_node[service_id] = nid
        spent = self.comparisons - before
        self.insert_log.append((size, spent))
        node = self.nodes[nid]
        return Placement(service_id, nid, exact, frozenset(node.parents), frozenset(node.children),
                         tuple(created), spent)

    def _place(self, code: int, service_id: str | None):
        created: list[int] = []
        while True:
            exact, msp, siblings = self._search(code)
            if msp and self.abstraction == "rootless":
                siblings = set()
            if exact is not None:
                node = self.nodes[exact]
                if service_id is not None:
                    node.services.add(service_id)
                    node.kind = CONCRETE
                return exact, True, created
            fresh = sorted(a for a in siblings if a not in self._by_code)
            if not fresh:
                break
            for a in fresh:
                if a in self._by_code:
                    continue
                nid, _, sub = self._place(a, None)
                created.extend(sub)
                created.append(nid)
        lsc = self._find_lsc(code, msp)
        nid = self._next_id
        self._next_id += 1
        kind = ABSTRACT if service_id is None else CONCRETE
        node = TaxonomyNode(nid, kind, code, {service_id} if service_id is not None else set())
        self.nodes[nid] = node
        self._by_code[code] = nid
        self._link(node, msp, lsc)
        return nid, False, created

    def _link(self, node: TaxonomyNode, msp: set[int], lsc: set[int]) -> None:
        nodes = self.nodes
        for p in msp:
            pc = nodes[p].children
            for c in lsc:
                if c in pc:
                    pc.discard(c)
                    nodes[c].parents.discard(p)
        for p in msp:
            nodes[p].children.add(node.id)
            node.parents.add(p)
        below = 0
        for c in lsc:
            child = nodes[c]
            child.parents.add(node.id)
            node.children.add(c)
            self._roots.discard(c)
            below |= child.code | child.below
        node.below = below
        if not msp:
            self._roots.add(node.id)
        self._raise_below(msp, node.code | below)

    def _raise_below(self, start: Iterable[int], bits: int) -> None:
        stack = list(start)
        while stack:
            n = self.nodes[stack.pop()]
            merged = n.below | bits
            if merged != n.below:
                n.below = merged
                stack.extend(n.parents)

    def remove(self, service_id: str) -> None:
        """Drop a service; an emptied node stays only as a cover of two or more children."""
        try:
            nid = self._service_node.pop(service_id)
        except KeyError:
            raise ClusterSpaceError(f"unknown service {service_id!r}") from None
        node = self.nodes[nid]
        node.services.discard(service_id)
        if node.services:
            return
        node.kind = ABSTRACT
        self._prune(nid)

    def _prune(self, nid: int) -> None:
        nodes = self.nodes
        work = [nid]
        while work:
            x = work.pop()
            node = nodes.get(x)
            if node is None or node.kind != ABSTRACT or len(node.children) >= 2:
                continue
            ancestors = self._ancestors(x)
            parents, kids = set(node.parents), set(node.children)
            for p in parents:
                nodes[p].children.discard(x)
            for c in kids:
                nodes[c].parents.discard(x)
            del nodes[x]
            del self._by_code[node.code]
            self._roots.discard(x)
            for c in kids:
                child = nodes[c]
                for p in parents:
                    if not self._reaches(p, child):
                        nodes[p].children.add(c)
                        child.parents.add(p)
                if not child.parents:
                    self._roots.add(c)
            self._recompute_below(ancestors)
            work.extend(parents)

    def _reaches(self, src: int, target: TaxonomyNode) -> bool:
        # only nodes subsuming the target can lie on a path to it
        nodes, tcode = self.nodes, target.code
        stack, seen = list(nodes[src].children), set()
        while stack:
            n = stack.pop()
            if n == target.id:
                return True
            if n in seen:
                continue
            seen.add(n)
            if nodes[n].code | tcode == tcode:
                stack.extend(nodes[n].children)
        return False

    def _ancestors(self, nid: int) -> set[int]:
        out, stack = set(), list(self.nodes[nid].parents)
        while stack:
            p = stack.pop()
            if p not in out:
                out.add(p)
                stack.extend(self.nodes[p].parents)
        return out

    def _descendants(self, nid: int) -> set[int]:
        out, stack = set(), list(self.nodes[nid].children)
        while stack:
            c = stack.pop()
            if c not in out:
                out.add(c)
                stack.extend(self.nodes[c].children)
        return out

    def _recompute_below(self, ids: Iterable[int]) -> None:
        nodes = self.nodes
        # a child always has strictly more bits than its parent
        for i in sorted((i for i in ids if i in nodes), key=lambda i: -nodes[i].code.bit_count()):
            below = 0
            for c in nodes[i].children:
                below |= nodes[c].code | nodes[c].below
            nodes[i].below = below

    # -- inspection -------------------------------------------------------

    def check_invariants(self) -> list[str]:
        """Structural problems, empty when the space is a well-formed Hasse diagram."""
        problems = []
        nodes = self.nodes
        for n in nodes.values():
            if n.id in n.parents or n.id in n.children:
                problems.append(f"self edge at {n.id}")
            for c in n.children:
                if c not in nodes or n.id not in nodes[c].parents:
                    problems.append(f"edge {n.id}->{c} missing back-reference")
                elif classify(nodes[c].code, n.code) is not PLUG_IN:
                    problems.append(f"edge {n.id}->{c} not a strict g-subsumption")
            for p in n.parents:
                if p not in nodes or n.id not in nodes[p].children:
                    problems.append(f"edge {p}->{n.id} missing forward reference")
            if (n.kind == CONCRETE) != bool(n.services):
                problems.append(f"node {n.id} kind {n.kind} with services {sorted(n.services)}")
            if self._by_code.get(n.code) != n.id:
                problems.append(f"node {n.id} missing from code index")
        if len(self._by_code) != len(nodes):
            problems.append("code index size mismatch")
        if self._roots != {i for i, n in nodes.items() if not n.parents}:
            problems.append("root set out of date")
        for sid, nid in self._service_node.items():
            if nid not in nodes or sid not in nodes[nid].services:
                problems.append(f"service {sid} index broken")
        if sum(len(n.services) for n in nodes.values()) != len(self._service_node):
            problems.append("service count mismatch")
        if problems:
            return problems

        order = self._topological_order()
        if order is None:
            return ["cycle detected"]
        for n in nodes.values():
            for c in n.children:
                child = nodes[c]
                # Hasse: no second path n -> ... -> c
                for other in n.children:
                    if other != c and (nodes[other].code | child.code == child.code) and self._reaches(other, child):
                        problems.append(f"transitive edge {n.id}->{c} (also via {other})")
                        break
            below = 0
            for d in self._descendants(n.id):
                below |= nodes[d].code
            if below != n.below:
                problems.append(f"descendant summary stale at {n.id}")
        return problems

    def _topological_order(self) -> list[int] | None:
        indeg = {i: len(n.parents) for i, n in self.nodes.items()}
        ready = [i for i, d in indeg.items() if d == 0]
        order = []
        while ready:
            i = ready.pop()
            order.append(i)
            for c in self.nodes[i].children:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        return order if len(order) == len(self.nodes) else None

    def taxonomies(self) -> dict[int, set[str]]:
        """Services of every taxonomy, keyed by root node id (taxonomies may overlap)."""
        out = {}
        for r in self.roots:
            members = set(self.nodes[r].services)
            for d in self._descendants(r):
                members |= self.nodes[d].services
            out[r] = members
        return out

    def canonical_form(self) -> tuple:
        key = {i: (n.gcode_hex, n.kind) for i, n in self.nodes.items()}
        nodes = sorted((*key[i], tuple(sorted(n.services))) for i, n in self.nodes.items())
        edges = sorted((key[i], key[c]) for i, n in self.nodes.items() for c in n.children)
        return tuple(nodes), tuple(edges)

    def concrete_form(self) -> tuple:
        """Hasse diagram over the concrete equivalence classes only.

        Derived from graph reachability, so abstract covers are looked through.
        """
        nodes = self.nodes
        desc: dict[int, set[int]] = {}
        for i in sorted(nodes, key=lambda i: -nodes[i].code.bit_count()):
            acc = set()
            for c in nodes[i].children:
                acc.add(c)
                acc |= desc[c]
            desc[i] = acc
        concrete = {i for i, n in nodes.items() if n.kind == CONCRETE}
        cdesc = {i: desc[i] & concrete for i in concrete}
        key = {i: (nodes[i].gcode_hex, tuple(sorted(nodes[i].services))) for i in concrete}
        edges = []
        for i in concrete:
            for j in cdesc[i]:
                if not any(j in cdesc[k] for k in cdesc[i] if k != j):
                    edges.append((key[i], key[j]))
        return tuple(sorted(key.values())), tuple(sorted(edges))

    def efficiency(self) -> dict:
        """Comparison statistics over all recorded inserts into a non-empty space."""
        log = [(size, spent) for size, spent in self.insert_log if size]
        total_cmp = sum(s for _, s in log)
        total_size = sum(n for n, _ in log)
        return {
            "inserts": len(self.insert_log),
            "comparisons": sum(s for _, s in self.insert_log),
            "amortized_fraction": total_cmp / total_size if total_size else 0.0,
            "mean_fraction": sum(s / n for n, s in log) / len(log) if log else 0.0,
            "mean_comparisons": total_cmp / len(log) if log else 0.0,
        }

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "generation": self.generation,
            "abstraction": self.abstraction,
            "comparisons": self.comparisons,
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind,
                    "services": sorted(n.services),
                    "gcode_hex": n.gcode_hex,
                    "parents": sorted(n.parents),
                    "children": sorted(n.children),
                }
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClusterSpace":
        space = cls(data["feature"], generation=data.get("generation", 0),
                    abstraction=data.get("abstraction", "rootless"))
        space.comparisons = data.get("comparisons", 0)
        for rec in data["nodes"]:
            n = TaxonomyNode(rec["id"], rec["kind"], int(rec["gcode_hex"], 16), set(rec["services"]),
                             set(rec["parents"]), set(rec["children"]))
            space.nodes[n.id] = n
            space._by_code[n.code] = n.id
            for sid in n.services:
                space._service_node[sid] = n.id
            if not n.parents:
                space._roots.add(n.id)
        space._next_id = max(space.nodes, default=-1) + 1
        space._recompute_below(space.nodes)
        return space

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1), encoding="utf-8")

    def to_dot(self) -> str:
        lines = [f'digraph "{self.feature}-space" {{', "  rankdir=TB;"]
        for n in sorted(self.nodes.values(), key=lambda n: n.id):
            label = ", ".join(sorted(n.services)) or "abstract"
            shape = "box" if n.kind == CONCRETE else "ellipse"
            lines.append(f'  n{n.id} [label="{label}\\n{n.gcode_hex}", shape={shape}];')
        for n in sorted(self.nodes.values(), key=lambda n: n.id):
            for c in sorted(n.children):
                lines.append(f"  n{n.id} -> n{c};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def converge(
    services: Sequence,
    *,
    shuffle: bool = False,
    seed: int | None = None,
    generation: int | None = None,
    abstraction: str = "rootless",
) -> tuple[ClusterSpace, ClusterSpace]:
    """Build the I- and O-cluster spaces by inserting every service once."""
    batch = list(services)
    if shuffle:
        random.Random(seed).shuffle(batch)
    if generation is None:
        generation = batch[0].generation if batch else 0
    i_space = ClusterSpace("I", generation=generation, abstraction=abstraction)
    o_space = ClusterSpace("O", generation=generation, abstraction=abstraction)
    for s in batch:
        i_space.insert(s)
        o_space.insert(s)
    return i_space, o_space
