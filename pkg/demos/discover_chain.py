"""Two-phase discovery: output matching, then pruning services the requester cannot invoke."""

from stc.cluster import converge
from stc.discovery import build_query, discover
from stc.ontology import DomainSpace
from stc.service import load_services

domain = DomainSpace.from_documents([{"name": "Chain", "concepts": [
    {"name": "x"}, {"name": "y"}, {"name": "z"}, {"name": "target"},
    {"name": "target_fine", "parents": ["target"]}, {"name": "w"},
]}])
services = load_services([
    {"id": "a_first", "inputs": ["x"], "outputs": ["y"]},
    {"id": "b_middle", "inputs": ["y"], "outputs": ["z"]},
    {"id": "c_end", "inputs": ["z"], "outputs": ["target"]},
    {"id": "d_stuck", "inputs": ["w"], "outputs": ["target_fine"]},
], domain)
i_space, o_space = converge(services)

query = build_query({"id": "q", "inputs": ["x"], "outputs": ["target"]}, domain)
result = discover(query, o_space, i_space, services, domain)
print("phase 1 (outputs match):", result.phase1_ranking)
print("invocable from {x}:", sorted(result.invocable), "after", result.iterations, "rounds")
print("phase 2 (final):", result.ranking, "pruned:", result.pruned)
