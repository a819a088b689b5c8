import pytest
from hypothesis import given
from hypothesis import strategies as st

from stc.errors import MatchContractError, StaleCodeError
from stc.matchmaker import EXACT, NO_MATCH, PLUG_IN, SIBLING, SUBSUME, classify, g_subsumption
from stc.ontology import BCode
from stc.service import GCode

bitsets = st.frozensets(st.integers(0, 20), max_size=8)


def to_int(bits):
    return sum(1 << b for b in bits)


def set_oracle(a, b):
    if a == b:
        return EXACT
    if b < a:
        return PLUG_IN
    if a < b:
        return SUBSUME
    if a & b:
        return SIBLING
    return NO_MATCH


@given(bitsets, bitsets)
def test_classify_matches_set_oracle(a, b):
    assert classify(to_int(a), to_int(b)) is set_oracle(a, b)


@given(bitsets, bitsets)
def test_symmetry_and_abstract_parent(a, b):
    ga, gb = GCode("O", BCode(to_int(a), 21)), GCode("O", BCode(to_int(b), 21))
    ra, rb = g_subsumption(ga, gb), g_subsumption(gb, ga)
    flip = {PLUG_IN: SUBSUME, SUBSUME: PLUG_IN}
    assert rb.strength is flip.get(ra.strength, ra.strength)
    if ra.strength is SIBLING:
        p = ra.abstract_parent.value
        assert p == rb.abstract_parent.value == to_int(a & b) != 0
        assert ga.value | p == ga.value and gb.value | p == gb.value
    else:
        assert ra.abstract_parent is None


def test_strength_order():
    assert NO_MATCH < SIBLING < SUBSUME < PLUG_IN < EXACT
    assert max([SIBLING, EXACT, SUBSUME]) is EXACT


def test_travel_siblings(travel_domain, travel_services):
    s1, s2, s3 = travel_services
    r = g_subsumption(s1.gcode("O"), s2.gcode("O"))
    assert r.strength is SIBLING
    d = travel_domain
    assert r.abstract_parent.value == d.code_value("vehicle") | d.code_value("location")
    r = g_subsumption(s3.gcode("O"), s1.gcode("O"))
    assert r.strength is SIBLING
    assert r.abstract_parent.value == d.code_value("car")


def test_plug_in_direction(travel_domain):
    car = GCode("O", travel_domain.code("car"))
    vehicle = GCode("O", travel_domain.code("vehicle"))
    assert g_subsumption(car, vehicle).strength is PLUG_IN
    assert g_subsumption(vehicle, car).strength is SUBSUME


def test_contract_errors():
    with pytest.raises(MatchContractError):
        g_subsumption(GCode("I", BCode(1, 4)), GCode("O", BCode(1, 4)))
    with pytest.raises(StaleCodeError):
        g_subsumption(GCode("O", BCode(1, 4, 1)), GCode("O", BCode(1, 4, 2)))
