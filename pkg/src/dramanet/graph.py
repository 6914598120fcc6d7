"""Weighted character co-occurrence networks and their play-level measures."""

from __future__ import annotations

import csv
import io
import math
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

from .corpus import Play, Scene


class DegenerateGraphError(ValueError):
    pass


@dataclass(frozen=True)
class CharacterGraph:
    node_ids: tuple[str, ...]
    # key is a sorted id pair
    edges: Mapping[tuple[str, str], int]

    def __post_init__(self):
        nodes = set(self.node_ids)
        for (a, b), w in self.edges.items():
            if a == b:
                raise ValueError(f"self-edge on {a!r}")
            if a not in nodes or b not in nodes:
                raise ValueError(f"edge endpoint outside node set: {(a, b)}")
            if w < 1:
                raise ValueError(f"edge weight must be >= 1, got {w}")

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in self.node_ids}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for v in adj:
            adj[v].sort()
        return adj

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]] | Mapping, nodes: Iterable[str] = ()):
        """Convenience constructor; unweighted edge iterables get weight 1."""
        weights: dict[tuple[str, str], int] = {}
        if isinstance(edges, Mapping):
            items = edges.items()
        else:
            items = ((e, 1) for e in edges)
        for (a, b), w in items:
            key = (a, b) if a < b else (b, a)
            weights[key] = weights.get(key, 0) + w
        node_set = set(nodes)
        for a, b in weights:
            node_set.update((a, b))
        return cls(tuple(sorted(node_set)), weights)


@dataclass(frozen=True)
class GraphMetrics:
    n_nodes: int
    avg_clustering: float
    density: float
    avg_path_length: float  # nan when the largest component is a single node
    diameter: int
    max_betweenness: float
    avg_deg_max_deg_ratio: float
    max_deg_over_n_minus_1: float
    n_components: int


def graph_from_scenes(scenes: Iterable[Scene]) -> CharacterGraph:
    weights: dict[tuple[str, str], int] = {}
    nodes: set[str] = set()
    for scene in scenes:
        cast = sorted(scene.present_ids)
        nodes.update(cast)
        for pair in combinations(cast, 2):
            weights[pair] = weights.get(pair, 0) + 1
    return CharacterGraph(tuple(sorted(nodes)), dict(sorted(weights.items())))


def build_graph(play: Play) -> CharacterGraph:
    """Every pair of characters sharing a scene gains +1 edge weight."""
    return graph_from_scenes(play.scenes)


def weighted_degrees(g: CharacterGraph) -> dict[str, float]:
    out = {v: 0.0 for v in g.node_ids}
    for (a, b), w in g.edges.items():
        out[a] += w
        out[b] += w
    return out


def degrees(g: CharacterGraph) -> dict[str, int]:
    out = {v: 0 for v in g.node_ids}
    for a, b in g.edges:
        out[a] += 1
        out[b] += 1
    return out


def density(g: CharacterGraph) -> float:
    n = g.n_nodes
    if n < 2:
        return math.nan
    return 2.0 * g.n_edges / (n * (n - 1))


def connected_components(g: CharacterGraph) -> list[list[str]]:
    """Components as sorted id lists, ordered by their smallest id."""
    adj = g.adjacency()
    seen: set[str] = set()
    comps = []
    for v in g.node_ids:
        if v in seen:
            continue
        comp = []
        queue = deque([v])
        seen.add(v)
        while queue:
            u = queue.popleft()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


def largest_component(g: CharacterGraph) -> list[str]:
    # ties go to the component holding the smallest id (comps are ordered by it)
    comps = connected_components(g)
    return max(comps, key=len)


def bfs_distances(adj: Mapping[str, list[str]], source: str) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def _clustering_exact(g: CharacterGraph) -> dict[str, Fraction]:
    adj = {v: set(ns) for v, ns in g.adjacency().items()}
    out = {}
    for v, ns in adj.items():
        d = len(ns)
        if d < 2:
            out[v] = Fraction(0)
            continue
        links = sum(1 for a, b in combinations(sorted(ns), 2) if b in adj[a])
        out[v] = Fraction(links, d * (d - 1) // 2)
    return out


def local_clustering(g: CharacterGraph) -> dict[str, float]:
    """Share of each node's neighbour pairs that are linked; 0 below degree 2."""
    return {v: float(c) for v, c in _clustering_exact(g).items()}


def betweenness_raw(g: CharacterGraph) -> dict[str, float]:
    """Unnormalized betweenness, each unordered pair counted once (Brandes)."""
    adj = g.adjacency()
    bc = {v: 0.0 for v in g.node_ids}
    for s in g.node_ids:
        stack = []
        preds: dict[str, list[str]] = {v: [] for v in g.node_ids}
        sigma = dict.fromkeys(g.node_ids, 0)
        sigma[s] = 1
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = dict.fromkeys(g.node_ids, 0.0)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    # every pair was visited from both ends
    return {v: x / 2.0 for v, x in bc.items()}


def betweenness(g: CharacterGraph) -> dict[str, float]:
    """Betweenness normalized by (m-1)(m-2)/2, m the size of the node's component."""
    raw = betweenness_raw(g)
    out = {}
    for comp in connected_components(g):
        m = len(comp)
        scale = (m - 1) * (m - 2) / 2
        for v in comp:
            out[v] = raw[v] / scale if m >= 3 else 0.0
    return out


def compute_metrics(g: CharacterGraph) -> GraphMetrics:
    """All network-level measures of a co-occurrence graph.

    Paths, degrees and betweenness use the unweighted skeleton. Path length
    and diameter are taken over the largest connected component.
    """
    n = g.n_nodes
    if n < 2:
        raise DegenerateGraphError(f"need at least 2 nodes, got {n}")

    # exact rational mean, rounded once
    clust = _clustering_exact(g)
    deg = degrees(g)
    max_deg = max(deg.values())
    mean_deg = sum(deg.values()) / n

    adj = g.adjacency()
    comp = largest_component(g)
    total = 0
    diameter = 0
    for u in comp:
        dist = bfs_distances(adj, u)
        total += sum(dist.values())
        diameter = max(diameter, max(dist.values()))
    m = len(comp)
    apl = total / (m * (m - 1)) if m >= 2 else math.nan

    return GraphMetrics(
        n_nodes=n,
        avg_clustering=float(sum(clust.values()) / n),
        density=density(g),
        avg_path_length=apl,
        diameter=diameter,
        max_betweenness=max(betweenness(g).values()),
        avg_deg_max_deg_ratio=mean_deg / max_deg if max_deg else 0.0,
        max_deg_over_n_minus_1=max_deg / (n - 1),
        n_components=len(connected_components(g)),
    )


# -- exports ----------------------------------------------------------------

GEXF_NS = "http://www.gexf.net/1.2draft"


def to_gexf(g: CharacterGraph, labels: Mapping[str, str] | None = None) -> str:
    """GEXF 1.2 document; edge weights go in the native ``weight`` attribute."""
    labels = labels or {}
    ET.register_namespace("", GEXF_NS)
    root = ET.Element(f"{{{GEXF_NS}}}gexf", {"version": "1.2"})
    meta = ET.SubElement(root, f"{{{GEXF_NS}}}meta")
    ET.SubElement(meta, f"{{{GEXF_NS}}}creator").text = "dramanet"
    graph = ET.SubElement(
        root, f"{{{GEXF_NS}}}graph", {"mode": "static", "defaultedgetype": "undirected"}
    )
    nodes = ET.SubElement(graph, f"{{{GEXF_NS}}}nodes")
    for v in g.node_ids:
        ET.SubElement(nodes, f"{{{GEXF_NS}}}node", {"id": v, "label": labels.get(v, v)})
    edges = ET.SubElement(graph, f"{{{GEXF_NS}}}edges")
    for i, ((a, b), w) in enumerate(sorted(g.edges.items())):
        ET.SubElement(
            edges,
            f"{{{GEXF_NS}}}edge",
            {"id": str(i), "source": a, "target": b, "weight": str(float(w))},
        )
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def to_edge_csv(g: CharacterGraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "target", "weight"])
    for (a, b), w in sorted(g.edges.items()):
        writer.writerow([a, b, w])
    return buf.getvalue()
