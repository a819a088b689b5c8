import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stc.bench import GenConfig, synthetic_batch
from stc.cluster import converge
from stc.discovery import build_query, discover, invocable_services
from stc.errors import ServiceValidationError, StaleCodeError
from stc.matchmaker import EXACT, PLUG_IN, SIBLING, SUBSUME
from stc.ontology import DomainSpace
from stc.service import load_services

CHAIN_DOCS = [{"name": "Chain", "concepts": [
    {"name": "x", "parents": []},
    {"name": "y", "parents": []},
    {"name": "y_special", "parents": ["y"]},
    {"name": "z", "parents": []},
    {"name": "target", "parents": []},
    {"name": "target_fine", "parents": ["target"]},
    {"name": "w", "parents": []},
]}]

CHAIN_SERVICES = [
    {"id": "a_first", "inputs": ["x"], "outputs": ["y_special"]},
    {"id": "b_middle", "inputs": ["y"], "outputs": ["z"]},
    {"id": "c_end", "inputs": ["z"], "outputs": ["target"]},
    {"id": "d_stuck", "inputs": ["w"], "outputs": ["target_fine"]},
]


@pytest.fixture
def chain():
    domain = DomainSpace.from_documents(CHAIN_DOCS)
    services = load_services(CHAIN_SERVICES, domain)
    i_space, o_space = converge(services)
    return domain, services, i_space, o_space


def naive_invocable(provided, services, domain):
    pool = set(provided)
    done = set()
    changed = True
    while changed:
        changed = False
        for s in services:
            if s.id in done:
                continue
            if all(any(domain.subsumes(p, i) for p in pool) for i in s.inputs):
                done.add(s.id)
                pool |= set(s.outputs)
                changed = True
    return done


def test_chain_keeps_indirect_end_and_prunes_stuck(chain):
    domain, services, i_space, o_space = chain
    q = build_query({"id": "q", "inputs": ["x"], "outputs": ["target"]}, domain)
    res = discover(q, o_space, i_space, services, domain)
    assert res.phase1_ranking == ["c_end", "d_stuck"]
    assert [h.strength for h in res.candidates] == [EXACT, PLUG_IN]
    assert res.ranking == ["c_end"]
    assert res.pruned == ["d_stuck"]
    assert res.invocable == {"a_first", "b_middle", "c_end"}
    assert res.hits[0].rank == 1


def test_exact_direct(chain):
    domain, services, i_space, o_space = chain
    q = build_query({"id": "q", "inputs": ["w"], "outputs": ["target_fine"]}, domain)
    res = discover(q, o_space, i_space, services, domain)
    assert res.ranking[0] == "d_stuck" and res.hits[0].strength is EXACT


def test_nothing_supplied_prunes_everything(chain):
    domain, services, i_space, o_space = chain
    q = build_query({"id": "q", "outputs": ["target"]}, domain)
    res = discover(q, o_space, i_space, services, domain)
    assert res.phase1_ranking and res.ranking == []


def test_more_general_input_does_not_satisfy(chain):
    domain, services, i_space, o_space = chain
    # a_first supplies y_special, which satisfies y; supplying y does not satisfy y_special
    ok, _ = invocable_services(build_query({"inputs": ["y"], "outputs": ["z"]}, domain), i_space,
                               {s.id: s for s in services}, domain)
    assert ok == {"b_middle", "c_end"}


def test_empty_outputs_rejected(chain):
    domain = chain[0]
    with pytest.raises(ServiceValidationError):
        build_query({"id": "q", "inputs": ["x"], "outputs": []}, domain)


def test_stale_query(chain):
    domain, services, i_space, o_space = chain
    q = build_query({"inputs": ["x"], "outputs": ["target"]}, domain)
    domain.add_concept("Chain", "early", children=["x"])
    with pytest.raises(StaleCodeError):
        discover(q, o_space, i_space, services, domain)


@pytest.fixture(scope="module")
def synthetic():
    cfg = GenConfig(ontology_count=3, avg_concepts=25, service_count=80, rng_seed=11, max_depth=4)
    domain, services = synthetic_batch(cfg)
    i_space, o_space = converge(services)
    return domain, services, i_space, o_space


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_against_naive_oracles(synthetic, data):
    domain, services, i_space, o_space = synthetic
    concepts = [c.qualname for o in domain.ontologies for c in o.declared_concepts]
    ins = data.draw(st.lists(st.sampled_from(concepts), max_size=4, unique=True))
    outs = data.draw(st.lists(st.sampled_from(concepts), min_size=1, max_size=3, unique=True))
    siblings = data.draw(st.booleans())
    q = build_query({"id": "q", "inputs": ins, "outputs": outs}, domain)
    res = discover(q, o_space, i_space, services, domain, include_siblings=siblings)

    floor = SIBLING if siblings else SUBSUME
    expected = []
    for s in services:
        a, b = s.o_code, q.o_code
        st_ = EXACT if a == b else PLUG_IN if a | b == a else SUBSUME if a | b == b else SIBLING if a & b else None
        if st_ is not None and st_ >= floor:
            expected.append((-st_.value, s.id))
    assert res.phase1_ranking == [sid for _, sid in sorted(expected)]

    ok = naive_invocable(q.inputs, services, domain)
    assert res.invocable == ok
    assert res.ranking == [sid for sid in res.phase1_ranking if sid in ok]
    strengths = [h.strength for h in res.hits]
    assert strengths == sorted(strengths, reverse=True)
    assert [h.rank for h in res.hits] == list(range(1, len(res.hits) + 1))
    assert res.iterations <= len(services) + 1
