"""Concept lattices and their bit-code (b-code) encoding.

Every concept receives one identity bit, assigned in topological visit
order, and inherits the bits of all of its parents.  Subsumption then
reduces to a single bitwise test::

    cx is subsumed by cy   <=>   code(cx) | code(cy) == code(cx)

Bit position ``i`` (1-indexed from the least significant end) belongs to the
concept visited ``i``-th.  The universal parent ``Thing`` is all zeros and the
universal child ``Nothing`` is all ones at the current width.

Codes are plain Python integers internally, so a test costs ``O(N / W)`` word
operations for ``N`` concepts and machine word length ``W``.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from os import PathLike
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CycleDetected, OntologyError, StaleCodeError

TOP_NAME = "Thing"
BOTTOM_NAME = "Nothing"

CODE_CSV_HEADER = ("concept", "hex_code", "width", "generation")


@dataclass(frozen=True, order=True)
class Concept:
    ontology: str
    id: int
    name: str

    @property
    def qualname(self) -> str:
        return f"{self.ontology}#{self.name}"

    def __str__(self) -> str:
        return self.qualname


@dataclass(frozen=True)
class BCode:
    """A bit code together with the width and generation it was issued under."""

    value: int
    width: int
    generation: int = 0

    @property
    def bits(self) -> tuple[int, ...]:
        """1-indexed positions of the set bits, least significant first."""
        v, out, i = self.value, [], 1
        while v:
            if v & 1:
                out.append(i)
            v >>= 1
            i += 1
        return tuple(out)

    def hex(self) -> str:
        digits = max(1, (self.width + 3) // 4)
        return format(self.value, f"0{digits}x")

    @classmethod
    def from_hex(cls, text: str, width: int, generation: int = 0) -> "BCode":
        return cls(int(text, 16), width, generation)

    def pattern(self) -> str:
        """Binary rendering with the implicit zero extension written as ``0*``."""
        return "0*" + (format(self.value, "b") if self.value else "")

    def _check(self, other: "BCode") -> None:
        if self.generation != other.generation:
            raise StaleCodeError(
                f"codes from generations {self.generation} and {other.generation}"
            )

    def __or__(self, other: "BCode") -> "BCode":
        self._check(other)
        return BCode(self.value | other.value, max(self.width, other.width), self.generation)

    def __and__(self, other: "BCode") -> "BCode":
        self._check(other)
        return BCode(self.value & other.value, max(self.width, other.width), self.generation)

    def subsumed_by(self, other: "BCode") -> bool:
        self._check(other)
        return self.value | other.value == self.value


def code_subsumes(cx: BCode, cy: BCode) -> bool:
    """True iff the concept coded ``cx`` is subsumed by the one coded ``cy``."""
    return cx.subsumed_by(cy)


@dataclass(frozen=True)
class _Encoding:
    # Never mutated once published; mutations swap in a new instance.
    codes: dict
    identity: dict
    width: int
    generation: int


def _read_document(source) -> dict:
    if isinstance(source, Mapping):
        return dict(source)
    if isinstance(source, PathLike):
        return json.loads(Path(source).read_text(encoding="utf-8"))
    if isinstance(source, str):
        if source.lstrip().startswith("{"):
            return json.loads(source)
        return json.loads(Path(source).read_text(encoding="utf-8"))
    raise OntologyError(f"cannot read ontology document from {source!r}")


class BaseOntology:
    """A concept DAG closed into a lattice by ``Thing`` and ``Nothing``.

    Reads go through an immutable encoding snapshot; mutations publish a new
    snapshot in a single attribute assignment.
    """

    def __init__(self, name: str = "ontology"):
        self.name = name
        self._concepts: dict[str, Concept] = {}
        self._by_id: dict[int, Concept] = {}
        self._parents: dict[int, frozenset[int]] = {}
        self._children: dict[int, set[int]] = {}
        self._next_id = 0
        self.top = self._new_concept(TOP_NAME)
        self.bottom = self._new_concept(BOTTOM_NAME)
        self._enc = _Encoding({self.top.id: 0, self.bottom.id: 0b11}, {}, 2, 0)

    # -- construction -----------------------------------------------------

    def _new_concept(self, name: str) -> Concept:
        c = Concept(self.name, self._next_id, name)
        self._next_id += 1
        self._concepts[name] = c
        self._by_id[c.id] = c
        return c

    @classmethod
    def from_document(cls, document) -> "BaseOntology":
        doc = _read_document(document)
        entries = doc.get("concepts", [])
        names: list[str] = []
        declared: dict[str, list[str]] = {}
        for entry in entries:
            name = entry["name"]
            if name in declared or (name in (TOP_NAME, BOTTOM_NAME) and name in names):
                raise OntologyError(f"duplicate concept name {name!r}")
            names.append(name)
            parents = [p for p in entry.get("parents", []) if p != TOP_NAME]
            if name == TOP_NAME:
                if parents:
                    raise OntologyError(f"{TOP_NAME} cannot have parents")
                continue
            if name == BOTTOM_NAME:
                continue
            if BOTTOM_NAME in parents:
                raise OntologyError(f"{BOTTOM_NAME} cannot be a parent of {name!r}")
            declared[name] = parents
        for name, parents in declared.items():
            missing = [p for p in parents if p not in declared]
            if missing:
                raise OntologyError(f"concept {name!r} references unknown parents {missing}")
        try:
            TopologicalSorter(declared).prepare()
        except CycleError as exc:
            raise CycleDetected(exc.args[1]) from None

        onto = cls(doc.get("name", "ontology"))
        for name in declared:
            onto._new_concept(name)
        for name, parents in declared.items():
            cid = onto._concepts[name].id
            pids = frozenset(onto._concepts[p].id for p in parents)
            onto._parents[cid] = pids
            onto._children.setdefault(cid, set())
            for p in pids:
                onto._children.setdefault(p, set()).add(cid)
        onto.encode()
        return onto

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "concepts": [
                {"name": c.name, "parents": sorted(self._by_id[p].name for p in self._parents[c.id])}
                for c in self.declared_concepts
            ],
        }

    # -- encoding ---------------------------------------------------------

    def encode(self) -> dict[str, BCode]:
        """Assign b-codes by a topological span from ``Thing``.

        Among concepts whose parents have all been visited, the one with the
        smallest name is visited next.  Always bumps the generation.
        """
        pending = {cid: len(ps) for cid, ps in self._parents.items()}
        ready = [(self._by_id[cid].name, cid) for cid, n in pending.items() if n == 0]
        heapq.heapify(ready)
        codes = {self.top.id: 0}
        identity = {}
        pos = 0
        while ready:
            _, cid = heapq.heappop(ready)
            pos += 1
            code = 1 << (pos - 1)
            for p in self._parents[cid]:
                code |= codes[p]
            codes[cid] = code
            identity[cid] = pos
            for ch in self._children[cid]:
                pending[ch] -= 1
                if pending[ch] == 0:
                    heapq.heappush(ready, (self._by_id[ch].name, ch))
        width = pos + 2
        codes[self.bottom.id] = (1 << width) - 1
        self._enc = _Encoding(codes, identity, width, self._enc.generation + 1)
        return self.code_table()

    @property
    def generation(self) -> int:
        return self._enc.generation

    @property
    def width(self) -> int:
        return self._enc.width

    def add_concept(self, name: str, parents=(), children=()) -> Concept:
        """Insert a concept below ``parents`` (default ``Thing``) and above ``children``.

        A concept without children gets one appended identity bit and leaves
        every other code and the generation untouched.  Inserting above
        existing concepts forces a full re-encode (generation bump), since the
        children must inherit the new bit.
        """
        if name in self._concepts:
            raise OntologyError(f"duplicate concept name {name!r}")
        pids = {self._lookup(p).id for p in parents} - {self.top.id}
        cids = {self._lookup(c).id for c in children} - {self.bottom.id}
        if self.bottom.id in pids:
            raise OntologyError(f"{BOTTOM_NAME} cannot be a parent")
        if self.top.id in cids:
            raise OntologyError(f"{TOP_NAME} cannot be a child")
        codes = self._enc.codes
        for c in cids:
            for p in pids:
                # child must not already be an ancestor-or-self of a parent
                if codes[p] | codes[c] == codes[p]:
                    raise CycleDetected([self._by_id[c].name, name, self._by_id[p].name])

        concept = self._new_concept(name)
        self._parents[concept.id] = frozenset(pids)
        self._children[concept.id] = set(cids)
        for p in pids:
            self._children[p].add(concept.id)
        for c in cids:
            self._parents[c] = self._parents[c] | {concept.id}

        if cids:
            self.encode()
        else:
            enc = self._enc
            pos = enc.width + 1
            code = 1 << (pos - 1)
            for p in pids:
                code |= enc.codes[p]
            new_codes = dict(enc.codes)
            new_codes[concept.id] = code
            new_codes[self.bottom.id] = (1 << pos) - 1
            new_identity = dict(enc.identity)
            new_identity[concept.id] = pos
            self._enc = _Encoding(new_codes, new_identity, pos, enc.generation)
        return concept

    # -- queries ----------------------------------------------------------

    def _lookup(self, ref) -> Concept:
        if isinstance(ref, Concept):
            if self._by_id.get(ref.id) != ref:
                raise OntologyError(f"concept {ref} does not belong to ontology {self.name!r}")
            return ref
        if isinstance(ref, int):
            try:
                return self._by_id[ref]
            except KeyError:
                raise OntologyError(f"unknown concept id {ref}") from None
        try:
            return self._concepts[ref]
        except KeyError:
            raise OntologyError(f"unknown concept {ref!r} in ontology {self.name!r}") from None

    def __contains__(self, ref) -> bool:
        try:
            self._lookup(ref)
        except OntologyError:
            return False
        return True

    def __len__(self) -> int:
        return len(self._by_id)

    def concept(self, ref) -> Concept:
        return self._lookup(ref)

    @property
    def concepts(self) -> list[Concept]:
        return [self._by_id[i] for i in sorted(self._by_id)]

    @property
    def declared_concepts(self) -> list[Concept]:
        return [c for c in self.concepts if c.id not in (self.top.id, self.bottom.id)]

    def parents_of(self, ref) -> set[Concept]:
        c = self._lookup(ref)
        if c == self.top:
            return set()
        if c == self.bottom:
            return {self._by_id[i] for i, ch in self._children.items() if not ch} or {self.top}
        return {self._by_id[p] for p in self._parents[c.id]} or {self.top}

    def children_of(self, ref) -> set[Concept]:
        c = self._lookup(ref)
        if c == self.bottom:
            return set()
        if c == self.top:
            return {self._by_id[i] for i, ps in self._parents.items() if not ps} or {self.bottom}
        return {self._by_id[ch] for ch in self._children[c.id]} or {self.bottom}

    def code_value(self, ref) -> int:
        return self._enc.codes[self._lookup(ref).id]

    def code(self, ref) -> BCode:
        enc = self._enc
        return BCode(enc.codes[self._lookup(ref).id], enc.width, enc.generation)

    def identity_bit(self, ref) -> int | None:
        """Bit position owned by the concept; ``None`` for ``Thing`` and ``Nothing``."""
        return self._enc.identity.get(self._lookup(ref).id)

    def code_table(self) -> dict[str, BCode]:
        enc = self._enc
        return {c.name: BCode(enc.codes[c.id], enc.width, enc.generation) for c in self.concepts}

    def subsumes(self, cx, cy) -> bool:
        """True iff ``cx`` is subsumed by ``cy`` (``cy`` is an ancestor-or-self of ``cx``)."""
        codes = self._enc.codes
        a = codes[self._lookup(cx).id]
        return a | codes[self._lookup(cy).id] == a

    def visit_order(self) -> list[Concept]:
        ident = self._enc.identity
        return [self._by_id[cid] for cid in sorted(ident, key=ident.__getitem__)]

    def dump_codes(self, out=None) -> str:
        """Write the code table as CSV (``concept,hex_code,width,generation``)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CODE_CSV_HEADER)
        enc = self._enc
        for c in [self.top, *self.visit_order(), self.bottom]:
            writer.writerow([c.name, BCode(enc.codes[c.id], enc.width).hex(), enc.width, enc.generation])
        text = buf.getvalue()
        if out is not None:
            Path(out).write_text(text, encoding="utf-8")
        return text


def load_ontology(document) -> BaseOntology:
    """Build an encoded ontology from a mapping, a JSON string or a file path."""
    return BaseOntology.from_document(document)


def baseonto_encode(ontology: BaseOntology) -> dict[str, BCode]:
    return ontology.encode()


def subsumes(cx, cy, ontology: BaseOntology) -> bool:
    """True iff ``cx`` is subsumed by ``cy``; ``BCode`` arguments are generation-checked."""
    if isinstance(cx, BCode) or isinstance(cy, BCode):
        if not (isinstance(cx, BCode) and isinstance(cy, BCode)):
            raise TypeError("pass two BCodes or two concept references")
        if cx.generation != ontology.generation:
            raise StaleCodeError(f"code from generation {cx.generation}, ontology at {ontology.generation}")
        return code_subsumes(cx, cy)
    return ontology.subsumes(cx, cy)


def add_concept(ontology: BaseOntology, name: str, parents=(), children=()) -> Concept:
    return ontology.add_concept(name, parents, children)


class DomainSpace:
    """Several ontologies laid out side by side in one composite code space.

    Each ontology owns a contiguous bit range; ranges follow registration
    order, so registering a new ontology never disturbs existing codes.  The
    domain generation is bumped whenever an already-issued composite code
    changes (a member re-encodes, or a member that is not last grows).
    """

    def __init__(self, ontologies: Iterable[BaseOntology] = ()):
        self._ontologies: dict[str, BaseOntology] = {}
        self._layout: tuple = ()
        self._offsets: dict[str, int] = {}
        self.generation = 0
        self.width = 0
        for onto in ontologies:
            self.add_ontology(onto)

    @classmethod
    def from_documents(cls, documents: Iterable) -> "DomainSpace":
        return cls(load_ontology(d) for d in documents)

    @classmethod
    def from_directory(cls, directory) -> "DomainSpace":
        paths = sorted(Path(directory).glob("*.json"))
        return cls.from_documents(paths)

    def to_documents(self) -> list[dict]:
        return [o.to_document() for o in self._ontologies.values()]

    def add_ontology(self, ontology: BaseOntology) -> None:
        if ontology.name in self._ontologies:
            raise OntologyError(f"duplicate ontology name {ontology.name!r}")
        self._ontologies[ontology.name] = ontology
        self._sync()

    def _sync(self) -> None:
        layout, off = [], 0
        for name, onto in self._ontologies.items():
            layout.append((name, onto.generation, off))
            off += onto.width
        layout = tuple(layout)
        if layout != self._layout:
            old = {n: (g, o) for n, g, o in self._layout}
            if any(old.get(n, (g, o)) != (g, o) for n, g, o in layout):
                self.generation += 1
            self._layout = layout
            self._offsets = {n: o for n, _, o in layout}
        self.width = off

    @property
    def ontologies(self) -> list[BaseOntology]:
        return list(self._ontologies.values())

    def ontology(self, name: str) -> BaseOntology:
        try:
            return self._ontologies[name]
        except KeyError:
            raise OntologyError(f"unknown ontology {name!r}") from None

    def resolve(self, ref) -> Concept:
        """Map ``Onto#Name``, a bare unique ``Name`` or a ``Concept`` to a concept."""
        if isinstance(ref, Concept):
            return self.ontology(ref.ontology).concept(ref)
        if "#" in ref:
            onto, name = ref.split("#", 1)
            return self.ontology(onto).concept(name)
        hits = [o.concept(ref) for o in self._ontologies.values() if ref in o]
        if not hits:
            raise OntologyError(f"unknown concept {ref!r}")
        if len(hits) > 1:
            raise OntologyError(f"ambiguous concept {ref!r}: qualify as one of {[h.qualname for h in hits]}")
        return hits[0]

    def code_value(self, ref) -> int:
        self._sync()
        c = self.resolve(ref)
        return self._ontologies[c.ontology].code_value(c) << self._offsets[c.ontology]

    def code(self, ref) -> BCode:
        return BCode(self.code_value(ref), self.width, self.generation)

    def subsumes(self, cx, cy) -> bool:
        a = self.code_value(cx)
        return a | self.code_value(cy) == a

    def add_concept(self, ontology: str, name: str, parents=(), children=()) -> Concept:
        c = self.ontology(ontology).add_concept(name, parents, children)
        self._sync()
        return c

    def concepts(self) -> list[Concept]:
        return [c for o in self._ontologies.values() for c in o.concepts]
