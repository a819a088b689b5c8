"""Two-phase query discovery over converged O- and I-cluster spaces.

Phase 1 ranks services by how their outputs match the desired outputs.
Phase 2 keeps only the candidates whose inputs can be supplied, either by
the query directly or through the outputs of other invocable services.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .cluster import ClusterSpace
from .errors import ServiceValidationError, StaleCodeError
from .matchmaker import SIBLING, SUBSUME, MatchStrength, classify
from .ontology import Concept, DomainSpace
from .service import ServiceDescription, _resolve_all


@dataclass(frozen=True)
class Query:
    id: str
    inputs: frozenset[Concept]
    outputs: frozenset[Concept]
    i_code: int
    o_code: int
    generation: int


def build_query(raw: Mapping, domain: DomainSpace) -> Query:
    qid = str(raw.get("id", "query"))
    inputs, bad_in = _resolve_all(raw.get("inputs", ()), domain)
    outputs, bad_out = _resolve_all(raw.get("outputs", ()), domain)
    if bad_in or bad_out:
        raise ServiceValidationError(f"query {qid!r}: unresolvable concepts {bad_in + bad_out}",
                                     offending=bad_in + bad_out)
    if not outputs:
        raise ServiceValidationError(f"query {qid!r}: desired outputs must be non-empty")
    i_code = o_code = 0
    for c in inputs:
        i_code |= domain.code_value(c)
    for c in outputs:
        o_code |= domain.code_value(c)
    return Query(qid, inputs, outputs, i_code, o_code, domain.generation)


def load_queries(source, domain: DomainSpace) -> list[Query]:
    """Queries from a JSON file or object: one query document or a list of them."""
    if isinstance(source, (str, Path)):
        docs = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        docs = source
    if isinstance(docs, Mapping):
        docs = [docs]
    return [build_query(d, domain) for d in docs]


@dataclass(frozen=True)
class Hit:
    service_id: str
    strength: MatchStrength
    invocable: bool
    rank: int


@dataclass
class RetrievalResult:
    query_id: str
    hits: list[Hit]
    candidates: list[Hit]
    pruned: list[str] = field(default_factory=list)
    invocable: frozenset = frozenset()
    iterations: int = 0
    comparisons: int = 0

    @property
    def ranking(self) -> list[str]:
        return [h.service_id for h in self.hits]

    @property
    def phase1_ranking(self) -> list[str]:
        return [h.service_id for h in self.candidates]


def phase1(query: Query, o_space: ClusterSpace, *, include_siblings: bool = True):
    """Services matched on outputs, strongest first, ties by service id.

    Returns ``(ranked (service_id, strength) pairs, comparisons)``.
    """
    floor = SIBLING if include_siblings else SUBSUME
    q = query.o_code
    nodes = o_space.nodes
    found: list[tuple[str, MatchStrength]] = []
    seen: set[int] = set()
    stack = list(o_space.roots)
    comparisons = 0
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        n = nodes[nid]
        # nothing in this subtree shares a bit with the query
        if q and not (n.code | n.below) & q:
            continue
        comparisons += 1
        strength = classify(n.code, q)
        if strength >= floor:
            found.extend((sid, strength) for sid in n.services)
        stack.extend(n.children)
    found.sort(key=lambda p: (-p[1].value, p[0]))
    return found, comparisons


def invocable_services(query: Query, i_space: ClusterSpace,
                       services: Mapping[str, ServiceDescription], domain: DomainSpace) -> tuple[set[str], int]:
    """Fixpoint of services whose inputs the query can supply, directly or by chaining.

    A provided concept satisfies a required input when it is subsumed by it
    (equal or more specific).  Because every concept owns an identity bit,
    a service is satisfiable exactly when its I-code is covered by the OR of
    the available concept codes.  Returns ``(service ids, rounds)``.
    """
    pool = 0
    have = bool(query.inputs)
    for c in query.inputs:
        pool |= domain.code_value(c)
    nodes = i_space.nodes
    found: set[str] = set()
    rounds = 0
    while have:
        rounds += 1
        grown = pool
        seen: set[int] = set()
        stack = list(i_space.roots)
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            n = nodes[nid]
            # descendants carry more bits, so they fail too
            if n.code | pool != pool:
                continue
            for sid in n.services:
                if sid not in found:
                    found.add(sid)
                    grown |= services[sid].o_code
            stack.extend(n.children)
        if grown == pool:
            break
        pool = grown
    return found, rounds


def discover(query: Query, o_space: ClusterSpace, i_space: ClusterSpace,
             services: Mapping[str, ServiceDescription] | Sequence[ServiceDescription],
             domain: DomainSpace, *, include_siblings: bool = True) -> RetrievalResult:
    if not query.outputs:
        raise ServiceValidationError(f"query {query.id!r}: desired outputs must be non-empty")
    for gen in (o_space.generation, i_space.generation, domain.generation):
        if gen != query.generation:
            raise StaleCodeError(f"query {query.id!r} coded under generation {query.generation}, expected {gen}")
    if not isinstance(services, Mapping):
        services = {s.id: s for s in services}
    ranked, comparisons = phase1(query, o_space, include_siblings=include_siblings)
    ok, rounds = invocable_services(query, i_space, services, domain)
    candidates = [Hit(sid, st, sid in ok, k) for k, (sid, st) in enumerate(ranked, 1)]
    kept = [h for h in candidates if h.invocable]
    hits = [Hit(h.service_id, h.strength, True, k) for k, h in enumerate(kept, 1)]
    pruned = [h.service_id for h in candidates if not h.invocable]
    return RetrievalResult(query.id, hits, candidates, pruned, frozenset(ok), rounds, comparisons)


def match_strength(service: ServiceDescription, query: Query) -> MatchStrength:
    """Output-side strength of a single service against a query."""
    return classify(service.o_code, query.o_code)
