import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stc.errors import CycleDetected, OntologyError, StaleCodeError
from stc.ontology import BCode, BaseOntology, DomainSpace, load_ontology, subsumes

from conftest import VEHICLE_DOC


@st.composite
def dag_documents(draw, max_concepts=40):
    n = draw(st.integers(1, max_concepts))
    names = draw(st.permutations([f"c{i:03d}" for i in range(n)]))
    concepts = []
    for i in range(n):
        parents = draw(st.sets(st.integers(0, i - 1), max_size=3)) if i else set()
        concepts.append({"name": names[i], "parents": sorted(names[p] for p in parents)})
    return {"name": "rand", "concepts": concepts}


def ancestors(doc):
    parents = {c["name"]: c["parents"] for c in doc["concepts"]}
    out = {}
    for name in parents:
        seen, stack = set(), list(parents[name])
        while stack:
            p = stack.pop()
            if p not in seen:
                seen.add(p)
                stack.extend(parents[p])
        out[name] = seen
    return out


def test_vehicle_codes_match_worked_example(vehicle_onto):
    assert vehicle_onto.code("Vehicle").pattern() == "0*1"
    assert vehicle_onto.code("LandVehicle").pattern() == "0*11"
    assert vehicle_onto.code("Car").pattern() == "0*10011"
    assert vehicle_onto.subsumes("Car", "LandVehicle")
    assert not vehicle_onto.subsumes("LandVehicle", "Car")
    assert vehicle_onto.width == 12
    assert vehicle_onto.code("Car").hex() == "013"


def test_visit_order_takes_smallest_ready_name(vehicle_onto):
    assert [c.name for c in vehicle_onto.visit_order()] == [
        "Vehicle", "LandVehicle", "Bicycle", "Bus", "Car", "SUV", "Sedan", "WaterVehicle", "Boat", "Ship",
    ]


def test_top_and_bottom(vehicle_onto):
    top, bottom = vehicle_onto.top, vehicle_onto.bottom
    assert vehicle_onto.code_value(top) == 0
    assert vehicle_onto.code_value(bottom) == (1 << vehicle_onto.width) - 1
    for c in vehicle_onto.concepts:
        assert vehicle_onto.subsumes(c, top)
        assert vehicle_onto.subsumes(bottom, c)


def test_dump_codes_csv(vehicle_onto):
    lines = vehicle_onto.dump_codes().splitlines()
    assert lines[0] == "concept,hex_code,width,generation"
    assert lines[1].startswith("Thing,000,")
    assert "Car,013,12,1" in lines
    assert lines[-1] == "Nothing,fff,12,1"


@settings(max_examples=60, deadline=None)
@given(dag_documents())
def test_subsumption_equals_reachability(doc):
    onto = load_ontology(doc)
    anc = ancestors(doc)
    for a in anc:
        for b in anc:
            assert onto.subsumes(a, b) == (a == b or b in anc[a])


@settings(max_examples=40, deadline=None)
@given(dag_documents(), st.data())
def test_leaf_insertion_keeps_codes_and_generation(doc, data):
    onto = load_ontology(doc)
    before = {c.name: onto.code_value(c) for c in onto.declared_concepts}
    gen = onto.generation
    names = list(before)
    parents = data.draw(st.sets(st.sampled_from(names), max_size=3))
    onto.add_concept("fresh", parents=sorted(parents))
    assert onto.generation == gen
    assert {c: onto.code_value(c) for c in before} == before
    doc2 = {"name": "rand", "concepts": doc["concepts"] + [{"name": "fresh", "parents": sorted(parents)}]}
    anc = ancestors(doc2)
    for a in anc:
        for b in anc:
            assert onto.subsumes(a, b) == (a == b or b in anc[a])


@settings(max_examples=40, deadline=None)
@given(dag_documents(max_concepts=25), st.data())
def test_inner_insertion_reencodes_correctly(doc, data):
    onto = load_ontology(doc)
    anc = ancestors(doc)
    names = list(anc)
    child = data.draw(st.sampled_from(names))
    # parents must not lie below the child
    allowed = [n for n in names if n != child and child not in anc[n]]
    parents = sorted(data.draw(st.sets(st.sampled_from(allowed), max_size=2))) if allowed else []
    gen = onto.generation
    onto.add_concept("mid", parents=parents, children=[child])
    assert onto.generation == gen + 1
    concepts = [dict(c) for c in doc["concepts"]]
    for c in concepts:
        if c["name"] == child:
            c["parents"] = c["parents"] + ["mid"]
    concepts.append({"name": "mid", "parents": parents})
    anc = ancestors({"concepts": concepts})
    for a in anc:
        for b in anc:
            assert onto.subsumes(a, b) == (a == b or b in anc[a])


def test_cycle_rejected():
    doc = {"concepts": [{"name": "a", "parents": ["b"]}, {"name": "b", "parents": ["a"]}]}
    with pytest.raises(CycleDetected) as err:
        load_ontology(doc)
    assert set(err.value.cycle) >= {"a", "b"}


def test_add_concept_cycle_rejected(vehicle_onto):
    with pytest.raises(CycleDetected):
        vehicle_onto.add_concept("Loop", parents=["Car"], children=["Vehicle"])


@pytest.mark.parametrize("doc", [
    {"concepts": [{"name": "a"}, {"name": "a"}]},
    {"concepts": [{"name": "a", "parents": ["ghost"]}]},
    {"concepts": [{"name": "a", "parents": ["Nothing"]}]},
])
def test_malformed_documents(doc):
    with pytest.raises(OntologyError):
        load_ontology(doc)


def test_document_round_trip(vehicle_onto, tmp_path):
    path = tmp_path / "v.json"
    path.write_text(json.dumps(vehicle_onto.to_document()))
    again = load_ontology(path)
    assert again.code_table() == vehicle_onto.code_table()
    assert load_ontology(json.dumps(VEHICLE_DOC)).code_table() == vehicle_onto.code_table()


def test_stale_bcode_rejected(vehicle_onto):
    old = vehicle_onto.code("Car")
    vehicle_onto.add_concept("Truck", parents=["LandVehicle"], children=["SUV"])
    with pytest.raises(StaleCodeError):
        subsumes(old, vehicle_onto.code("Vehicle"), vehicle_onto)
    with pytest.raises(StaleCodeError):
        old | vehicle_onto.code("Vehicle")
    assert subsumes(vehicle_onto.code("SUV"), vehicle_onto.code("Truck"), vehicle_onto)


def test_bcode_helpers():
    c = BCode(0b10011, 12)
    assert c.bits == (1, 2, 5)
    assert BCode.from_hex(c.hex(), 12) == c
    assert BCode(0, 4).pattern() == "0*"


def test_domain_space_disjoint_ranges(travel_domain):
    d = travel_domain
    codes = {c: d.code_value(c) for c in d.concepts()}
    for a, ca in codes.items():
        for b, cb in codes.items():
            if a.ontology != b.ontology:
                assert ca & cb == 0
    assert d.subsumes("SUV", "vehicle")
    assert not d.subsumes("city", "vehicle")
    assert d.width == sum(o.width for o in d.ontologies)


def test_domain_generation_tracks_code_changes(travel_domain):
    d = travel_domain
    g = d.generation
    last = d.ontologies[-1].name
    d.add_concept(last, "debit_card", parents=["payment"])
    assert d.generation == g  # appended at the end of the last range
    d.add_concept("Vehicle", "truck", parents=["vehicle"])
    assert d.generation == g + 1  # later ranges shift
    assert d.subsumes("Vehicle#truck", "vehicle")


def test_resolve(travel_domain):
    assert travel_domain.resolve("Location#city").name == "city"
    assert travel_domain.resolve("city").ontology == "Location"
    with pytest.raises(OntologyError):
        travel_domain.resolve("Thing")  # every ontology has one
    with pytest.raises(OntologyError):
        travel_domain.resolve("nowhere")


def test_from_directory(tmp_path):
    from conftest import TRAVEL_DOCS
    for d in TRAVEL_DOCS:
        (tmp_path / f"{d['name']}.json").write_text(json.dumps(d))
    dom = DomainSpace.from_directory(tmp_path)
    assert [o.name for o in dom.ontologies] == sorted(d["name"] for d in TRAVEL_DOCS)


def test_empty_ontology():
    onto = BaseOntology("empty")
    assert onto.width == 2
    assert onto.subsumes("Nothing", "Thing")
