import itertools

import pytest

from stc.ontology import DomainSpace, load_ontology
from stc.service import load_services

VEHICLE_DOC = {
    "name": "Vehicles",
    "concepts": [
        {"name": "Vehicle", "parents": []},
        {"name": "LandVehicle", "parents": ["Vehicle"]},
        {"name": "WaterVehicle", "parents": ["Vehicle"]},
        {"name": "Bicycle", "parents": ["LandVehicle"]},
        {"name": "Bus", "parents": ["LandVehicle"]},
        {"name": "Car", "parents": ["LandVehicle"]},
        {"name": "Boat", "parents": ["WaterVehicle"]},
        {"name": "Ship", "parents": ["WaterVehicle"]},
        {"name": "SUV", "parents": ["Car"]},
        {"name": "Sedan", "parents": ["Car"]},
    ],
}

# three small taxonomies plus a payment one so services have inputs
TRAVEL_DOCS = [
    {"name": "Vehicle", "concepts": [
        {"name": "vehicle", "parents": []},
        {"name": "car", "parents": ["vehicle"]},
        {"name": "SUV", "parents": ["car"]},
    ]},
    {"name": "Location", "concepts": [
        {"name": "location", "parents": []},
        {"name": "city", "parents": ["location"]},
    ]},
    {"name": "Address", "concepts": [
        {"name": "address", "parents": []},
        {"name": "street_address", "parents": ["address"]},
    ]},
    {"name": "Payment", "concepts": [
        {"name": "payment", "parents": []},
        {"name": "credit_card", "parents": ["payment"]},
    ]},
]

TRAVEL_SERVICES = [
    {"id": "s1", "inputs": ["credit_card"], "outputs": ["car", "location"], "domain": "travel"},
    {"id": "s2", "inputs": ["payment"], "outputs": ["vehicle", "city", "address"], "domain": "travel"},
    {"id": "s3", "inputs": ["credit_card"], "outputs": ["SUV", "street_address"], "domain": "travel"},
]


@pytest.fixture
def vehicle_onto():
    return load_ontology(VEHICLE_DOC)


@pytest.fixture
def travel_domain():
    return DomainSpace.from_documents(TRAVEL_DOCS)


@pytest.fixture
def travel_services(travel_domain):
    return load_services(TRAVEL_SERVICES, travel_domain)


def brute_hasse(codes):
    """Cover relation of a set of distinct codes under bit inclusion: (parent, child) pairs."""
    codes = list(codes)
    edges = set()
    for p, c in itertools.permutations(codes, 2):
        if p | c == c and p != c:
            if not any(q not in (p, c) and p | q == q and q | c == c for q in codes):
                edges.add((p, c))
    return edges


def space_edges(space):
    return {(space.nodes[p].code, space.nodes[c].code) for p, n in space.nodes.items() for c in n.children}


_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
