"""End-to-end accuracy evaluation: clustering quality and query retrieval.

A dataset directory holds ``ontologies/`` (one JSON document per ontology),
``services.json`` (with ``domain`` labels), ``queries.json`` and
``relevance.json`` (``{query_id: [service ids]}``).
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .cluster import ClusterSpace, converge
from .discovery import Query, RetrievalResult, discover, load_queries
from .metrics import (
    RECALL_LEVELS,
    averaged_domain_scores,
    cluster_entropy,
    dominant_domain,
    domain_precision,
    domain_recall,
    f_measure,
    interpolated_precision,
    mean_curve,
)
from .ontology import DomainSpace
from .service import ServiceDescription, load_services

PHASES = ("phase1", "phase2")


@dataclass
class Dataset:
    domain: DomainSpace
    services: list[ServiceDescription]
    queries: list[Query]
    relevance: dict[str, list[str]]

    @property
    def labels(self) -> dict[str, str | None]:
        return {s.id: s.domain for s in self.services}


def load_relevance(source) -> dict[str, list[str]]:
    if isinstance(source, (str, Path)):
        source = json.loads(Path(source).read_text(encoding="utf-8"))
    return {str(k): [str(s) for s in v] for k, v in source.items()}


def load_dataset(root) -> Dataset:
    root = Path(root)
    onto_dir = root / "ontologies"
    if onto_dir.is_dir():
        domain = DomainSpace.from_directory(onto_dir)
    else:
        domain = DomainSpace.from_documents(json.loads((root / "ontologies.json").read_text(encoding="utf-8")))
    services = load_services(root / "services.json", domain)
    queries = load_queries(root / "queries.json", domain)
    rel_path = root / "relevance.json"
    relevance = load_relevance(rel_path) if rel_path.exists() else {}
    return Dataset(domain, services, queries, relevance)


@dataclass
class QueryRow:
    query_id: str
    phase: str
    retrieved: int
    relevant: int
    hits: int
    precision: float
    recall: float
    f_measure: float
    curve: list[float]

    @property
    def avg_ip(self) -> float:
        return sum(self.curve) / len(self.curve)


@dataclass
class ClusterRow:
    feature: str
    root: int
    size: int
    avg_precision: float
    avg_recall: float
    dominant: str | None
    dominant_precision: float | None
    dominant_recall: float | None


@dataclass
class EvalReport:
    rows: list[QueryRow] = field(default_factory=list)
    mean_curves: dict[str, list[float]] = field(default_factory=dict)
    mean_precision: dict[str, float] = field(default_factory=dict)
    mean_recall: dict[str, float] = field(default_factory=dict)
    f_scores: dict[str, float] = field(default_factory=dict)
    excluded: list[str] = field(default_factory=list)
    clusters: list[ClusterRow] = field(default_factory=list)
    entropy_relevant: float | None = None
    entropy_o: float | None = None
    comparisons: dict[str, int] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def summary(self, timings: bool = False) -> dict:
        """Aggregate figures; wall-clock timings only on request, so reruns compare equal."""
        out = {
            "queries": len({r.query_id for r in self.rows}),
            "excluded_queries": list(self.excluded),
            "mean_precision": self.mean_precision,
            "mean_recall": self.mean_recall,
            "f_measure": self.f_scores,
            "mean_avg_ip": {p: sum(c) / len(c) for p, c in self.mean_curves.items()},
            "entropy_relevant_sets": self.entropy_relevant,
            "entropy_o_space": self.entropy_o,
            "clusters": {f: sum(1 for c in self.clusters if c.feature == f) for f in ("O", "I")},
            "comparisons": self.comparisons,
            "recall_levels": list(RECALL_LEVELS),
        }
        if timings:
            out["timings"] = self.timings
        return out


def _query_row(qid: str, phase: str, ranking: Sequence[str], relevant: set) -> QueryRow:
    hits = sum(1 for s in ranking if s in relevant)
    precision = hits / len(ranking) if ranking else 0.0
    recall = hits / len(relevant)
    return QueryRow(qid, phase, len(ranking), len(relevant), hits, precision, recall,
                    f_measure(precision, recall), interpolated_precision(ranking, relevant))


def cluster_rows(space: ClusterSpace, labels: Mapping) -> list[ClusterRow]:
    if any(v is None for v in labels.values()):
        return []
    domains = sorted(set(labels.values()))
    rows = []
    for root, members in sorted(space.taxonomies().items()):
        p, r = averaged_domain_scores(members, labels, domains)
        dom = dominant_domain(members, labels)
        rows.append(ClusterRow(space.feature, root, len(members), p or 0.0, r or 0.0, dom,
                               domain_precision(members, labels, dom) if dom is not None else None,
                               domain_recall(members, labels, dom) if dom is not None else None))
    return rows


def relevant_set_entropy(services: Mapping[str, ServiceDescription], relevance: Mapping[str, Sequence[str]],
                         labels: Mapping) -> float | None:
    """Mean over queries of the O-space cluster entropy of the relevant set alone."""
    values = []
    for qid in sorted(relevance):
        members = [services[s] for s in relevance[qid] if s in services]
        if not members:
            continue
        _, o_space = converge(members)
        values.append(cluster_entropy(o_space.taxonomies().values(), labels))
    return sum(values) / len(values) if values else None


def evaluate(dataset: Dataset, *, spaces: tuple[ClusterSpace, ClusterSpace] | None = None,
             include_siblings: bool = True) -> EvalReport:
    report = EvalReport()
    services = {s.id: s for s in dataset.services}
    t0 = time.perf_counter()
    if spaces is None:
        i_space, o_space = converge(dataset.services, generation=dataset.domain.generation)
    else:
        i_space, o_space = spaces
    report.timings["cluster_s"] = time.perf_counter() - t0
    report.comparisons["cluster"] = i_space.comparisons + o_space.comparisons

    t0 = time.perf_counter()
    results: dict[str, RetrievalResult] = {}
    for q in dataset.queries:
        results[q.id] = discover(q, o_space, i_space, services, dataset.domain, include_siblings=include_siblings)
    report.timings["discover_s"] = time.perf_counter() - t0
    report.comparisons["discover"] = sum(r.comparisons for r in results.values())

    for q in dataset.queries:
        relevant = set(dataset.relevance.get(q.id, ()))
        if not relevant:
            report.excluded.append(q.id)
            continue
        res = results[q.id]
        report.rows.append(_query_row(q.id, "phase1", res.phase1_ranking, relevant))
        report.rows.append(_query_row(q.id, "phase2", res.ranking, relevant))
    for phase in PHASES:
        rows = [r for r in report.rows if r.phase == phase]
        report.mean_curves[phase] = mean_curve(r.curve for r in rows)
        p = sum(r.precision for r in rows) / len(rows) if rows else 0.0
        r_ = sum(r.recall for r in rows) / len(rows) if rows else 0.0
        report.mean_precision[phase] = p
        report.mean_recall[phase] = r_
        report.f_scores[phase] = f_measure(p, r_)

    labels = dataset.labels
    report.clusters = cluster_rows(o_space, labels) + cluster_rows(i_space, labels)
    if labels and all(v is not None for v in labels.values()):
        report.entropy_o = cluster_entropy(o_space.taxonomies().values(), labels)
        report.entropy_relevant = relevant_set_entropy(services, dataset.relevance, labels)
    return report


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(round(v, 12))
    return str(v)


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


LEVEL_COLUMNS = [f"ip_{lv:.1f}" for lv in RECALL_LEVELS]


def report_csv(report: EvalReport) -> str:
    """One row per query and phase, then a MEAN row per phase."""
    header = ["query_id", "phase", "retrieved", "relevant", "hits", "precision", "recall",
              "f_measure", "avg_ip", *LEVEL_COLUMNS]
    rows = [[r.query_id, r.phase, r.retrieved, r.relevant, r.hits, r.precision, r.recall,
             r.f_measure, r.avg_ip, *r.curve] for r in report.rows]
    for phase in PHASES:
        curve = report.mean_curves.get(phase)
        if curve is None:
            continue
        n = sum(1 for r in report.rows if r.phase == phase)
        rows.append(["MEAN", phase, "", n, "", report.mean_precision[phase], report.mean_recall[phase],
                     report.f_scores[phase], sum(curve) / len(curve), *curve])
    return _csv(header, rows)


def write_report(report: EvalReport, path) -> None:
    _write(Path(path), report_csv(report))


def write_plotdata(report: EvalReport, directory) -> list[Path]:
    """Figure-ready CSV files: per-cluster domain scores, per-query averages,
    mean interpolated curves and F-measures."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for feature in ("O", "I"):
        rows = [[c.root, c.size, c.avg_precision, c.avg_recall, c.dominant, c.dominant_precision,
                 c.dominant_recall] for c in report.clusters if c.feature == feature]
        p = out / f"domain_scores_{feature}.csv"
        _write(p, _csv(["cluster_root", "size", "avg_precision", "avg_recall", "dominant_domain",
                        "dominant_precision", "dominant_recall"], rows))
        written.append(p)
    by_query: dict[str, dict[str, float]] = {}
    for r in report.rows:
        by_query.setdefault(r.query_id, {})[r.phase] = r.avg_ip
    p = out / "query_avg_ip.csv"
    _write(p, _csv(["query_id", "phase1", "phase2"],
                   [[q, v.get("phase1"), v.get("phase2")] for q, v in by_query.items()]))
    written.append(p)
    p = out / "mean_interpolated.csv"
    _write(p, _csv(["recall_level", *PHASES],
                   [[lv, *(report.mean_curves.get(ph, [0.0] * 11)[k] for ph in PHASES)]
                    for k, lv in enumerate(RECALL_LEVELS)]))
    written.append(p)
    p = out / "f_measure.csv"
    _write(p, _csv(["phase", "precision", "recall", "f_measure"],
                   [[ph, report.mean_precision.get(ph), report.mean_recall.get(ph), report.f_scores.get(ph)]
                    for ph in PHASES]))
    written.append(p)
    return written
