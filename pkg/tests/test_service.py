import json

import pytest

from stc.errors import ServiceValidationError, StaleCodeError
from stc.service import (
    build_service,
    check_current,
    compute_gcode,
    feature_stratify,
    load_services,
    refresh,
    validate_service,
)


def test_gcode_is_or_of_member_codes(travel_domain, travel_services):
    s1 = travel_services[0]
    d = travel_domain
    assert s1.o_code == d.code_value("car") | d.code_value("location")
    assert s1.i_code == d.code_value("credit_card")
    g = compute_gcode(s1.outputs, d, "O")
    assert g.value == s1.o_code and g.feature == "O"


def test_stratify_drops_conditions_with_warning(travel_domain):
    raw = {"id": "x", "inputs": ["payment"], "outputs": ["city"], "preconditions": ["paid"]}
    with pytest.warns(UserWarning, match="preconditions"):
        inputs, outputs = feature_stratify(raw, travel_domain)
    assert {c.name for c in inputs} == {"payment"}
    assert {c.name for c in outputs} == {"city"}


def test_unresolvable_concept(travel_domain):
    with pytest.raises(ServiceValidationError) as err:
        build_service({"id": "x", "inputs": ["payment"], "outputs": ["moon"]}, travel_domain)
    assert err.value.offending == ["moon"]


@pytest.mark.parametrize("raw", [
    {"id": "x", "inputs": [], "outputs": ["city"]},
    {"id": "x", "inputs": ["city"], "outputs": []},
    {"id": "x", "inputs": ["city", "payment"], "outputs": ["city"]},
])
def test_invalid_services(travel_domain, raw):
    with pytest.raises(ServiceValidationError):
        build_service(raw, travel_domain)


def test_equivalent_tops_rejected(travel_domain):
    # every Thing has code 0, so two of them are semantically equivalent
    with pytest.raises(ServiceValidationError):
        build_service({"id": "x", "inputs": ["Vehicle#Thing"], "outputs": ["Location#Thing"]}, travel_domain)


def test_bottom_cannot_type_a_parameter(travel_domain):
    with pytest.raises(ServiceValidationError):
        build_service({"id": "x", "inputs": ["city"], "outputs": ["Vehicle#Nothing"]}, travel_domain)


def test_validate_accepts_pairs(travel_domain):
    city = travel_domain.resolve("city")
    car = travel_domain.resolve("car")
    validate_service(({city}, {car}), travel_domain)
    with pytest.raises(ServiceValidationError):
        validate_service(({city}, {city}), travel_domain)


def test_round_trip_and_duplicates(travel_domain, travel_services, tmp_path):
    docs = [s.to_document() for s in travel_services]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(docs))
    again = load_services(path, travel_domain)
    assert [(s.i_code, s.o_code) for s in again] == [(s.i_code, s.o_code) for s in travel_services]
    with pytest.raises(ServiceValidationError):
        load_services(docs + docs[:1], travel_domain)


def test_refresh_after_reencode(travel_domain, travel_services):
    s = travel_services[0]
    travel_domain.add_concept("Vehicle", "van", parents=["vehicle"], children=["SUV"])
    with pytest.raises(StaleCodeError):
        check_current(s, travel_domain)
    fresh = refresh(s, travel_domain)
    check_current(fresh, travel_domain)
    assert fresh.o_code == travel_domain.code_value("car") | travel_domain.code_value("location")
