"""Service descriptions, feature stratification and per-feature g-codes.

A service is reduced to two concept sets (its I-array and O-array); each set
is folded into one g-code by OR-ing the member b-codes.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import OntologyError, ServiceValidationError, StaleCodeError
from .ontology import BCode, Concept, DomainSpace

FEATURES = ("I", "O")
IGNORED_KEYS = ("preconditions", "precondition", "results", "result", "effects")


@dataclass(frozen=True)
class GCode:
    feature: str
    code: BCode

    @property
    def value(self) -> int:
        return self.code.value

    @property
    def generation(self) -> int:
        return self.code.generation


@dataclass(frozen=True)
class ServiceDescription:
    id: str
    name: str
    inputs: frozenset[Concept]
    outputs: frozenset[Concept]
    domain: str | None
    i_code: int
    o_code: int
    width: int
    generation: int

    def code(self, feature: str) -> int:
        if feature == "I":
            return self.i_code
        if feature == "O":
            return self.o_code
        raise ValueError(f"unknown feature {feature!r}")

    def gcode(self, feature: str) -> GCode:
        return GCode(feature, BCode(self.code(feature), self.width, self.generation))

    def g_array(self, feature: str) -> frozenset[Concept]:
        return self.inputs if feature == "I" else self.outputs

    def to_document(self) -> dict:
        doc = {
            "id": self.id,
            "name": self.name,
            "inputs": sorted(c.qualname for c in self.inputs),
            "outputs": sorted(c.qualname for c in self.outputs),
        }
        if self.domain is not None:
            doc["domain"] = self.domain
        return doc


def _resolve_all(names: Iterable, domain: DomainSpace) -> tuple[frozenset[Concept], list]:
    found, bad = set(), []
    for n in names:
        try:
            found.add(domain.resolve(n))
        except OntologyError:
            bad.append(n)
    return frozenset(found), bad


def feature_stratify(raw: Mapping, domain: DomainSpace) -> tuple[frozenset[Concept], frozenset[Concept]]:
    """Split a flattened description into its I-array and O-array.

    Pre-condition and result parts are not part of the model and are dropped
    with a warning.
    """
    dropped = [k for k in IGNORED_KEYS if raw.get(k)]
    if dropped:
        warnings.warn(f"service {raw.get('id')!r}: ignoring {', '.join(dropped)}", stacklevel=2)
    inputs, bad_in = _resolve_all(raw.get("inputs", ()), domain)
    outputs, bad_out = _resolve_all(raw.get("outputs", ()), domain)
    bad = bad_in + bad_out
    if bad:
        raise ServiceValidationError(
            f"service {raw.get('id')!r}: unresolvable concepts {bad}", offending=bad
        )
    return inputs, outputs


def compute_gcode(g_array: Iterable[Concept], domain: DomainSpace, feature: str = "O") -> GCode:
    members = list(g_array)
    if not members:
        raise ServiceValidationError(f"empty {feature}-array has no g-code")
    value = 0
    for c in members:
        if c == domain.ontology(c.ontology).bottom:
            raise ServiceValidationError(f"{c.qualname} (the universal child) cannot type a parameter")
        value |= domain.code_value(c)
    return GCode(feature, BCode(value, domain.width, domain.generation))


def equivalent_pairs(inputs: Iterable[Concept], outputs: Iterable[Concept], domain: DomainSpace) -> list:
    """Input/output pairs whose b-codes coincide (semantically equivalent types)."""
    out_codes = {}
    for o in outputs:
        out_codes.setdefault(domain.code_value(o), []).append(o)
    pairs = []
    for i in sorted(inputs):
        for o in out_codes.get(domain.code_value(i), ()):
            pairs.append((i, o))
    return pairs


def validate_service(service, domain: DomainSpace) -> None:
    """Raise ``ServiceValidationError`` unless the description is admissible.

    Both arrays must be non-empty and no output may be semantically
    equivalent (equal b-code) to an input.
    """
    if hasattr(service, "inputs"):
        inputs, outputs = service.inputs, service.outputs
    else:
        inputs, outputs = service
    sid = getattr(service, "id", None)
    if not inputs or not outputs:
        raise ServiceValidationError(f"service {sid!r}: inputs and outputs must both be non-empty")
    pairs = equivalent_pairs(inputs, outputs, domain)
    if pairs:
        shown = ", ".join(f"{i.qualname}={o.qualname}" for i, o in pairs)
        raise ServiceValidationError(f"service {sid!r}: input/output equivalence {shown}", offending=pairs)


@dataclass(frozen=True)
class _Arrays:
    id: str
    inputs: frozenset
    outputs: frozenset


def build_service(raw: Mapping, domain: DomainSpace) -> ServiceDescription:
    inputs, outputs = feature_stratify(raw, domain)
    sid = str(raw["id"])
    validate_service(_Arrays(sid, inputs, outputs), domain)
    i = compute_gcode(inputs, domain, "I")
    o = compute_gcode(outputs, domain, "O")
    return ServiceDescription(
        id=sid,
        name=str(raw.get("name", sid)),
        inputs=inputs,
        outputs=outputs,
        domain=raw.get("domain"),
        i_code=i.value,
        o_code=o.value,
        width=domain.width,
        generation=domain.generation,
    )


def refresh(service: ServiceDescription, domain: DomainSpace) -> ServiceDescription:
    """Recompute the g-codes under the domain's current generation."""
    if service.generation == domain.generation and service.width == domain.width:
        return service
    return build_service(service.to_document(), domain)


def check_current(service: ServiceDescription, domain: DomainSpace) -> None:
    if service.generation != domain.generation:
        raise StaleCodeError(
            f"service {service.id!r} coded under generation {service.generation}, domain at {domain.generation}"
        )


def load_services(source, domain: DomainSpace) -> list[ServiceDescription]:
    """Load a batch file (JSON array of service documents) or an in-memory list."""
    if isinstance(source, (str, Path)):
        docs = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        docs = list(source)
    if isinstance(docs, Mapping):
        docs = [docs]
    services = [build_service(d, domain) for d in docs]
    seen = set()
    for s in services:
        if s.id in seen:
            raise ServiceValidationError(f"duplicate service id {s.id!r}", offending=[s.id])
        seen.add(s.id)
    return services
