"""Retrieval and clustering accuracy measures."""

from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Mapping, Sequence

RECALL_LEVELS = tuple(k / 10 for k in range(11))
_EPS = 1e-12


def _hits_at(ranking: Sequence, relevant: set, r: int) -> int:
    if not 1 <= r <= len(ranking):
        raise ValueError(f"rank {r} outside 1..{len(ranking)}")
    return sum(1 for x in ranking[:r] if x in relevant)


def precision_at_r(ranking: Sequence, relevant: Iterable, r: int) -> float:
    return _hits_at(ranking, set(relevant), r) / r


def recall_at_r(ranking: Sequence, relevant: Iterable, r: int) -> float:
    relevant = set(relevant)
    if not relevant:
        raise ValueError("recall is undefined for an empty relevant set")
    return _hits_at(ranking, relevant, r) / len(relevant)


def pr_points(ranking: Sequence, relevant: Iterable) -> list[tuple[float, float]]:
    """(recall, precision) after each rank."""
    relevant = set(relevant)
    if not relevant:
        raise ValueError("recall is undefined for an empty relevant set")
    points, hits = [], 0
    for r, x in enumerate(ranking, 1):
        hits += x in relevant
        points.append((hits / len(relevant), hits / r))
    return points


def interpolated_precision(ranking: Sequence, relevant: Iterable) -> list[float]:
    """Highest precision at any rank whose recall reaches each standard level.

    Levels nobody reaches get 0.
    """
    points = pr_points(ranking, relevant)
    curve = []
    for level in RECALL_LEVELS:
        best = 0.0
        for rec, prec in points:
            if rec >= level - _EPS and prec > best:
                best = prec
        curve.append(best)
    return curve


def mean_curve(curves: Iterable[Sequence[float]]) -> list[float]:
    curves = [list(c) for c in curves]
    if not curves:
        return [0.0] * len(RECALL_LEVELS)
    return [sum(c[k] for c in curves) / len(curves) for k in range(len(RECALL_LEVELS))]


def mean_interpolated(results: Mapping[str, Sequence], relevance: Mapping[str, Iterable]):
    """Per-level mean of the interpolated curves.

    Queries with no relevant services are left out and returned separately.
    Returns ``(curve, per-query curves, excluded ids)``.
    """
    curves, excluded = {}, []
    for qid, ranking in results.items():
        rel = set(relevance.get(qid, ()))
        if not rel:
            excluded.append(qid)
            continue
        curves[qid] = interpolated_precision(ranking, rel)
    return mean_curve(curves.values()), curves, excluded


def f_measure(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both inputs are 0."""
    for v in (precision, recall):
        if not 0 <= v <= 1:
            raise ValueError(f"ratio {v} outside [0, 1]")
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def domain_precision(cluster: Iterable, labels: Mapping, domain) -> float | None:
    """Share of the cluster's services labelled ``domain``; ``None`` for an empty cluster."""
    members = set(cluster)
    if not members:
        return None
    return sum(1 for s in members if labels[s] == domain) / len(members)


def domain_recall(cluster: Iterable, labels: Mapping, domain) -> float | None:
    """Share of the ``domain`` services found in the cluster; ``None`` when either side is empty."""
    members = set(cluster)
    total = sum(1 for v in labels.values() if v == domain)
    if not members or not total:
        return None
    return sum(1 for s in members if labels[s] == domain) / total


def averaged_domain_scores(cluster: Iterable, labels: Mapping, domains: Sequence | None = None):
    """Mean domain precision and recall of one cluster over every domain.

    Returns ``(precision, recall)`` or ``(None, None)`` for an empty cluster.
    """
    members = set(cluster)
    if not members:
        return None, None
    if domains is None:
        domains = sorted(set(labels.values()))
    precs = [domain_precision(members, labels, d) for d in domains]
    recs = [domain_recall(members, labels, d) or 0.0 for d in domains]
    return sum(precs) / len(domains), sum(recs) / len(domains)


def dominant_domain(cluster: Iterable, labels: Mapping):
    """Most frequent label in the cluster (ties by label), or ``None``."""
    counts = Counter(labels[s] for s in cluster)
    if not counts:
        return None
    return min(counts, key=lambda d: (-counts[d], str(d)))


def label_entropy(members: Iterable, labels: Mapping) -> float:
    counts = Counter()
    for s in members:
        if s not in labels or labels[s] is None:
            raise ValueError(f"service {s!r} has no label")
        counts[labels[s]] += 1
    n = sum(counts.values())
    if not n:
        return 0.0
    h = -sum(c / n * math.log2(c / n) for c in counts.values())
    return h if h > 0 else 0.0


def cluster_entropy(clusters: Iterable[Iterable], labels: Mapping) -> float:
    """Size-weighted mean Shannon entropy (bits) of the label mix of each cluster."""
    clusters = [list(c) for c in clusters]
    total = sum(len(c) for c in clusters)
    if not total:
        return 0.0
    return sum(len(c) * label_entropy(c, labels) for c in clusters) / total
