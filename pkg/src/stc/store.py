"""Self-contained space files: ontologies, services and cluster spaces in one JSON document."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .cluster import ClusterSpace
from .errors import StaleCodeError, STCError
from .ontology import DomainSpace
from .service import ServiceDescription, load_services

FORMAT = "stc-space"
FORMAT_VERSION = 1


@dataclass
class Workspace:
    domain: DomainSpace
    services: dict[str, ServiceDescription] = field(default_factory=dict)
    spaces: dict[str, ClusterSpace] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "generation": self.domain.generation,
            "ontologies": self.domain.to_documents(),
            "services": [self.services[k].to_document() for k in sorted(self.services)],
            "spaces": {f: self.spaces[f].to_dict() for f in sorted(self.spaces)},
        }

    def save(self, path) -> None:
        text = json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"
        Path(path).write_text(text, encoding="utf-8", newline="\n")

    def space(self, feature: str) -> ClusterSpace:
        try:
            return self.spaces[feature]
        except KeyError:
            raise STCError(f"space file holds no {feature}-space") from None


def load_workspace(path) -> Workspace:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("format") != FORMAT:
        raise STCError(f"{path}: not a space file")
    domain = DomainSpace.from_documents(data["ontologies"])
    services = {s.id: s for s in load_services(data["services"], domain)}
    spaces = {}
    for feature, raw in data["spaces"].items():
        space = ClusterSpace.from_dict(raw)
        # codes are recomputed from the ontology documents; the stored
        # nodes must still agree with them
        for node in space.concrete_nodes():
            for sid in node.services:
                if sid not in services or services[sid].code(feature) != node.code:
                    raise StaleCodeError(f"{feature}-space node {node.id} no longer matches service {sid!r}")
        space.generation = domain.generation
        spaces[feature] = space
    return Workspace(domain, services, spaces)
