"""Cluster three travel services in every arrival order and show the O-space is the same."""

import itertools

from stc.cluster import converge
from stc.ontology import DomainSpace
from stc.service import load_services

DOCS = [
    {"name": "Vehicle", "concepts": [
        {"name": "vehicle"}, {"name": "car", "parents": ["vehicle"]}, {"name": "SUV", "parents": ["car"]}]},
    {"name": "Location", "concepts": [{"name": "location"}, {"name": "city", "parents": ["location"]}]},
    {"name": "Address", "concepts": [{"name": "address"}, {"name": "street_address", "parents": ["address"]}]},
    {"name": "Payment", "concepts": [{"name": "payment"}, {"name": "credit_card", "parents": ["payment"]}]},
]
SERVICES = [
    {"id": "s1", "inputs": ["credit_card"], "outputs": ["car", "location"]},
    {"id": "s2", "inputs": ["payment"], "outputs": ["vehicle", "city", "address"]},
    {"id": "s3", "inputs": ["credit_card"], "outputs": ["SUV", "street_address"]},
]

domain = DomainSpace.from_documents(DOCS)
services = load_services(SERVICES, domain)

forms = set()
for order in itertools.permutations(services):
    _, o_space = converge(order)
    forms.add(o_space.concrete_form())
    print(" -> ".join(s.id for s in order), "|", len(o_space), "nodes,", o_space.comparisons, "comparisons")
print("distinct concrete topologies:", len(forms))

_, o_space = converge(services)
print(o_space.to_dot())
