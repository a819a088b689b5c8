"""Synthetic workloads, a threshold-based nearest-neighbour baseline and the
runtime / comparison-count benchmark harness."""

from __future__ import annotations

import csv
import io
import time
from collections import deque
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cluster import ClusterSpace
from .ontology import DomainSpace
from .service import ServiceDescription, load_services


@dataclass
class GenConfig:
    ontology_count: int = 10
    avg_concepts: int = 300
    avg_params: int = 5
    service_count: int = 100
    rng_seed: int = 0
    max_depth: int = 7
    roots_per_ontology: int = 3
    level_growth: float = 2.0
    second_parent_prob: float = 0.2
    concept_spread: float = 0.1

    def __post_init__(self):
        for name in ("ontology_count", "avg_concepts", "avg_params", "max_depth", "roots_per_ontology"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.service_count < 0:
            raise ValueError("service_count must be non-negative")
        if self.avg_params < 2:
            raise ValueError("avg_params must allow one input and one output")

    @classmethod
    def from_text(cls, text: str) -> "GenConfig":
        """Parse a flat ``key = value`` document (``#`` starts a comment)."""
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in types:
                raise ValueError(f"bad config line: {raw!r}")
            values[key] = float(value) if types[key] in (float, "float") else int(value)
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "GenConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


def _rng(cfg: GenConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng([cfg.rng_seed, stream])


def gen_domain_space(cfg: GenConfig) -> list[dict]:
    """Random layered DAG taxonomies, one ontology document per domain.

    Every non-root concept takes a parent from the nearest shallower level
    and, with ``second_parent_prob``, a second one from any shallower level.
    """
    rng = _rng(cfg, 0)
    docs = []
    for k in range(cfg.ontology_count):
        onto = f"Onto{k:02d}"
        n = int(round(rng.normal(cfg.avg_concepts, cfg.concept_spread * cfg.avg_concepts)))
        n = max(1, n)
        n_roots = min(cfg.roots_per_ontology, n)
        depth = cfg.max_depth
        weights = np.array([cfg.level_growth ** lvl for lvl in range(1, depth)], dtype=float)
        rest = rng.multinomial(n - n_roots, weights / weights.sum()) if depth > 1 else [n - n_roots]
        levels: list[list[str]] = []
        idx = 0
        concepts = []
        for size in [n_roots, *map(int, rest)]:
            level = []
            for _ in range(size):
                name = f"{onto}_C{idx:04d}"
                idx += 1
                parents = []
                shallower = [lv for lv in levels if lv]
                if shallower:
                    near = shallower[-1]
                    parents.append(near[rng.integers(len(near))])
                    if rng.random() < cfg.second_parent_prob:
                        pool = [c for lv in shallower for c in lv if c != parents[0]]
                        if pool:
                            parents.append(pool[rng.integers(len(pool))])
                concepts.append({"name": name, "parents": parents})
                level.append(name)
            levels.append(level)
        docs.append({"name": onto, "concepts": concepts})
    return docs


def gen_services(cfg: GenConfig, documents: Sequence[Mapping], count: int | None = None) -> list[dict]:
    """Random service documents whose inputs and outputs never share a concept.

    ``avg_params`` is the mean total parameter count of a service (at least
    one input and one output).  The domain label is the ontology of the
    first output concept.
    """
    rng = _rng(cfg, 1)
    count = cfg.service_count if count is None else count
    pools = [[c["name"] for c in d["concepts"]] for d in documents]
    pools = [(d["name"], p) for d, p in zip(documents, pools) if p]
    out = []
    for i in range(count):
        k = max(2, int(rng.poisson(cfg.avg_params)))
        n_in = int(rng.integers(1, k))
        chosen: list[tuple[str, str]] = []
        while len(chosen) < k:
            onto, pool = pools[rng.integers(len(pools))]
            pick = (onto, pool[rng.integers(len(pool))])
            if pick not in chosen:
                chosen.append(pick)
        refs = [f"{o}#{c}" for o, c in chosen]
        out.append({
            "id": f"s{i:05d}",
            "name": f"service{i}",
            "inputs": refs[:n_in],
            "outputs": refs[n_in:],
            "domain": chosen[n_in][0],
        })
    return out


def synthetic_batch(cfg: GenConfig, count: int | None = None) -> tuple[DomainSpace, list[ServiceDescription]]:
    docs = gen_domain_space(cfg)
    domain = DomainSpace.from_documents(docs)
    return domain, load_services(gen_services(cfg, docs, count), domain)


# -- threshold baseline ------------------------------------------------------


class TaxonomicDistance:
    """Normalized shortest-path distance between concepts of a domain space.

    Ontologies are joined under a virtual node above every ``Thing``; paths
    never pass through ``Nothing``.  Distances are divided by a length that no
    path can reach, so every value lies in ``[0, 1)``.
    """

    def __init__(self, domain: DomainSpace, concepts=None):
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import shortest_path

        index: dict = {}
        rows, cols = [], []
        for onto in domain.ontologies:
            for c in onto.concepts:
                if c != onto.bottom:
                    index[c] = len(index)
        hub = len(index)
        for onto in domain.ontologies:
            rows.append(hub)
            cols.append(index[onto.top])
            for c in onto.declared_concepts:
                for p in onto.parents_of(c):
                    rows.append(index[c])
                    cols.append(index[p])
        n = hub + 1
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
        depth = shortest_path(graph, directed=False, unweighted=True, indices=[hub])[0]
        self.max_depth = int(depth[:hub].max()) - 1 if hub else 0
        self.scale = 2 * (self.max_depth + 1) + 1
        self.penalty = (self.scale - 1) / self.scale
        wanted = sorted(set(index) if concepts is None else set(concepts))
        self._row = {c: k for k, c in enumerate(wanted)}
        self._col = index
        if wanted:
            self._dist = shortest_path(graph, directed=False, unweighted=True,
                                       indices=[index[c] for c in wanted]) / self.scale
        else:
            self._dist = np.zeros((0, n))

    def __call__(self, a, b) -> float:
        return float(self._dist[self._row[a], self._col[b]])

    def set_distance(self, xs, ys) -> float:
        """Greedy bipartite pairing of two concept sets; unpaired members pay the penalty."""
        if not xs and not ys:
            return 0.0
        pairs = sorted((self(x, y), i, j) for i, x in enumerate(xs) for j, y in enumerate(ys))
        used_x, used_y, total = set(), set(), 0.0
        for d, i, j in pairs:
            if i not in used_x and j not in used_y:
                used_x.add(i)
                used_y.add(j)
                total += d
        unpaired = len(xs) + len(ys) - 2 * len(used_x)
        return (total + unpaired * self.penalty) / max(len(xs), len(ys))


def integrated_distance(s1: ServiceDescription, s2: ServiceDescription, dist: TaxonomicDistance,
                        w_in: float = 0.5) -> float:
    """Weighted average of the input-side and output-side set distances."""
    d_in = dist.set_distance(sorted(s1.inputs), sorted(s2.inputs))
    d_out = dist.set_distance(sorted(s1.outputs), sorted(s2.outputs))
    return w_in * d_in + (1 - w_in) * d_out


@dataclass
class BaselineResult:
    clusters: list[list[str]]
    comparisons: int
    seconds: float

    def partition(self) -> frozenset:
        return frozenset(frozenset(c) for c in self.clusters)


def baseline_cluster(batch: Sequence[ServiceDescription], threshold: float, domain: DomainSpace,
                     dist: TaxonomicDistance | None = None) -> BaselineResult:
    """Online nearest-neighbour clustering with a distance threshold.

    Each arriving service joins the cluster of its nearest predecessor when
    that distance is at most ``threshold`` and opens a new cluster otherwise.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    if dist is None:
        dist = TaxonomicDistance(domain, {c for s in batch for c in s.inputs | s.outputs})
    t0 = time.perf_counter()
    clusters: list[list[str]] = []
    owner: list[int] = []
    seen: list[ServiceDescription] = []
    comparisons = 0
    for s in batch:
        best, best_k = None, -1
        for k, prev in enumerate(seen):
            d = integrated_distance(s, prev, dist)
            comparisons += 1
            if best is None or d < best:
                best, best_k = d, k
        if best is not None and best <= threshold:
            c = owner[best_k]
            clusters[c].append(s.id)
        else:
            c = len(clusters)
            clusters.append([s.id])
        owner.append(c)
        seen.append(s)
    return BaselineResult(clusters, comparisons, time.perf_counter() - t0)


# -- benchmark ---------------------------------------------------------------


@dataclass
class BenchRecord:
    size: int
    stc_seconds: float
    insert_mean_ms: float
    insert_p50_ms: float
    insert_p95_ms: float
    stc_comparisons: int
    i_fraction: float
    o_fraction: float
    i_amortized: float
    o_amortized: float
    i_nodes: int
    o_nodes: int
    baseline_seconds: float | None = None
    baseline_comparisons: int | None = None
    baseline_clusters: int | None = None


def parse_sizes(text: str) -> list[int]:
    """``a:b:c`` is ``range(a, b + 1, c)``; a comma list is taken as is."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        sizes = list(range(start, stop + 1, step))
    else:
        sizes = [int(p) for p in text.split(",") if p.strip()]
    if not sizes or any(s <= 0 for s in sizes) or sizes != sorted(set(sizes)):
        raise ValueError(f"sizes must be positive and increasing: {text!r}")
    return sizes


def run_stc(services: Sequence[ServiceDescription], abstraction: str = "rootless"):
    """Insert every service into fresh I and O spaces, timing each service."""
    gen = services[0].generation if services else 0
    i_space = ClusterSpace("I", generation=gen, abstraction=abstraction)
    o_space = ClusterSpace("O", generation=gen, abstraction=abstraction)
    times = []
    for s in services:
        t0 = time.perf_counter()
        i_space.insert(s)
        o_space.insert(s)
        times.append(time.perf_counter() - t0)
    return i_space, o_space, np.array(times)


def bench(sizes: Sequence[int], cfg: GenConfig, *, baseline_threshold: float = 0.5,
          baseline_max: int = 850, abstraction: str = "rootless") -> list[BenchRecord]:
    """Time STC (and the baseline up to ``baseline_max`` services) over a size sweep.

    Every size uses the leading services of one seeded batch, so larger runs
    extend smaller ones.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be increasing")
    domain, services = synthetic_batch(cfg, max(sizes, default=0))
    dist = None
    records = []
    for n in sizes:
        batch = services[:n]
        i_space, o_space, times = run_stc(batch, abstraction)
        ei, eo = i_space.efficiency(), o_space.efficiency()
        ms = times * 1000
        rec = BenchRecord(
            size=n,
            stc_seconds=float(times.sum()),
            insert_mean_ms=float(ms.mean()),
            insert_p50_ms=float(np.percentile(ms, 50)),
            insert_p95_ms=float(np.percentile(ms, 95)),
            stc_comparisons=i_space.comparisons + o_space.comparisons,
            i_fraction=ei["mean_fraction"],
            o_fraction=eo["mean_fraction"],
            i_amortized=ei["amortized_fraction"],
            o_amortized=eo["amortized_fraction"],
            i_nodes=len(i_space),
            o_nodes=len(o_space),
        )
        if n <= baseline_max:
            if dist is None:
                dist = TaxonomicDistance(domain, {c for s in services for c in s.inputs | s.outputs})
            base = baseline_cluster(batch, baseline_threshold, domain, dist)
            rec.baseline_seconds = base.seconds
            rec.baseline_comparisons = base.comparisons
            rec.baseline_clusters = len(base.clusters)
        records.append(rec)
    return records


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_bench_csv(records: Sequence[BenchRecord], out=None) -> str:
    names = [f.name for f in fields(BenchRecord)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in records:
        w.writerow([_fmt(getattr(r, n)) for n in names])
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    return text
