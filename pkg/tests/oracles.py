"""Brute-force reference implementations used only by the tests.

None of these share code paths with the package: paths are enumerated by
iterative-deepening DFS, distances come from Floyd-Warshall, k-means from
exhaustive split search, p-values from enumerating rank assignments.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np


def adjacency_sets(nodes, edges):
    adj = {v: set() for v in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def _paths_of_length(adj, s, t, length):
    out = []

    def dfs(path):
        u = path[-1]
        if len(path) - 1 == length:
            if u == t:
                out.append(tuple(path))
            return
        for w in adj[u]:
            if w not in path:
                path.append(w)
                dfs(path)
                path.pop()

    dfs([s])
    return out


def all_shortest_paths(adj, s, t):
    for length in range(1, len(adj)):
        paths = _paths_of_length(adj, s, t, length)
        if paths:
            return paths
    return []


def brute_betweenness_raw(nodes, edges):
    adj = adjacency_sets(nodes, edges)
    bc = {v: 0.0 for v in nodes}
    for s, t in combinations(sorted(nodes), 2):
        paths = all_shortest_paths(adj, s, t)
        for p in paths:
            for v in p[1:-1]:
                bc[v] += 1.0 / len(paths)
    return bc


def intermediate_occurrences(nodes, edges):
    """Total intermediate-node count over every shortest path of every pair, weighted by 1/#paths."""
    adj = adjacency_sets(nodes, edges)
    total = 0.0
    for s, t in combinations(sorted(nodes), 2):
        paths = all_shortest_paths(adj, s, t)
        total += sum(len(p) - 2 for p in paths) / len(paths) if paths else 0.0
    return total


def floyd_warshall(nodes, edges):
    idx = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for a, b in edges:
        d[idx[a], idx[b]] = d[idx[b], idx[a]] = 1
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def brute_metrics(nodes, edges):
    """Reference values for a connected graph."""
    nodes = sorted(nodes)
    n = len(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    a = np.zeros((n, n))
    for u, v in edges:
        a[idx[u], idx[v]] = a[idx[v], idx[u]] = 1
    deg = a.sum(axis=1)
    tri = np.diag(a @ a @ a) / 2
    clust = np.where(deg >= 2, tri / np.maximum(deg * (deg - 1) / 2, 1), 0.0)
    d = floyd_warshall(nodes, edges)
    off = d[~np.eye(n, dtype=bool)]
    raw = brute_betweenness_raw(nodes, edges)
    scale = (n - 1) * (n - 2) / 2
    return {
        "avg_clustering": clust.mean(),
        "density": a.sum() / (n * (n - 1)),
        "avg_path_length": off.mean(),
        "diameter": off.max(),
        "max_betweenness": max(raw.values()) / scale if n >= 3 else 0.0,
        "avg_deg_max_deg_ratio": deg.mean() / deg.max(),
        "max_deg_over_n_minus_1": deg.max() / (n - 1),
    }


def is_connected(nodes, edges):
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(v) for v in nodes}) == 1


def random_connected_graph(rng, n_max=8):
    while True:
        n = int(rng.integers(2, n_max + 1))
        p = rng.uniform(0.2, 0.9)
        nodes = [f"v{i}" for i in range(n)]
        edges = [(a, b) for a, b in combinations(nodes, 2) if rng.random() < p]
        if is_connected(nodes, edges):
            return nodes, edges


def sse(groups):
    """Exact within-cluster SSE of lists of floats."""
    total = Fraction(0)
    for g in groups:
        if not g:
            continue
        fs = [Fraction(x) for x in g]
        m = sum(fs) / len(fs)
        total += sum((x - m) ** 2 for x in fs)
    return total


def exhaustive_3split_sse(values):
    xs = sorted(values)
    n = len(xs)
    best = None
    for i in range(0, n + 1):
        for j in range(i, n + 1):
            c = sse([xs[:i], xs[i:j], xs[j:]])
            if best is None or c < best:
                best = c
    return best


def exact_ranksum_p(a, b):
    """Two-sided exact p by enumerating every assignment of the pooled ranks (no ties)."""
    pooled = sorted(list(a) + list(b))
    rank = {v: i + 1 for i, v in enumerate(pooled)}
    n1 = len(a)
    observed = sum(rank[v] for v in a)
    total = 0
    lower = upper = 0
    for combo in combinations(range(1, len(pooled) + 1), n1):
        s = sum(combo)
        total += 1
        lower += s <= observed
        upper += s >= observed
    return min(1.0, 2 * min(lower, upper) / total)


def power_iteration_eigenvalues(m, tol=1e-14, max_iter=200_000):
    m = np.array(m, dtype=float)
    n = m.shape[0]
    vals = []
    rng = np.random.default_rng(123)
    for _ in range(n):
        v = rng.normal(size=n)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iter):
            w = m @ v
            new_lam = float(v @ w)
            norm = np.linalg.norm(w)
            if norm == 0:
                new_lam = 0.0
                break
            v = w / norm
            if abs(new_lam - lam) <= tol * max(1.0, abs(new_lam)):
                lam = new_lam
                break
            lam = new_lam
        lam = float(v @ m @ v)
        vals.append(lam)
        m = m - lam * np.outer(v, v)
    return sorted(vals, reverse=True)


def brute_max_margin_2d(x, y, n_angles=200_000):
    """Largest half-gap between the classes over projection directions on a fine angle grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    theta = np.linspace(0, 2 * np.pi, n_angles, endpoint=False)
    u = np.stack([np.cos(theta), np.sin(theta)])
    proj = x @ u
    gap = proj[y > 0].min(axis=0) - proj[y < 0].max(axis=0)
    return gap.max() / 2


GEXF_NS = "http://www.gexf.net/1.2draft"


def gexf_violations(text):
    """Structural check of a GEXF 1.2draft document against the schema's rules.

    Covers what the XSD constrains for static graphs: root element and
    version, child order (meta?, graph), graph attribute enumerations,
    required node/edge attributes, unique ids, edge endpoints that refer to
    declared nodes, and numeric weights. Returns a list of problems.
    """
    import xml.etree.ElementTree as ET

    def q(tag):
        return f"{{{GEXF_NS}}}{tag}"

    problems = []
    root = ET.fromstring(text)
    if root.tag != q("gexf"):
        return [f"root element is {root.tag}"]
    if root.get("version") != "1.2":
        problems.append("gexf@version must be 1.2")
    kids = [c.tag for c in root]
    if kids not in ([q("graph")], [q("meta"), q("graph")]):
        problems.append(f"gexf children must be (meta?, graph), got {kids}")
    graph = root.find(q("graph"))
    if graph is None:
        return problems
    if graph.get("defaultedgetype", "undirected") not in ("directed", "undirected", "mutual"):
        problems.append("bad defaultedgetype")
    if graph.get("mode", "static") not in ("static", "dynamic"):
        problems.append("bad mode")
    order = [c.tag for c in graph if c.tag != q("attributes")]
    if order not in ([q("nodes"), q("edges")], [q("nodes")], []):
        problems.append(f"graph children must be (attributes*, nodes?, edges?), got {order}")
    ids = set()
    for node in graph.iter(q("node")):
        nid = node.get("id")
        if nid is None:
            problems.append("node without id")
        elif nid in ids:
            problems.append(f"duplicate node id {nid}")
        ids.add(nid)
    edge_ids = set()
    for edge in graph.iter(q("edge")):
        for attr in ("id", "source", "target"):
            if edge.get(attr) is None:
                problems.append(f"edge missing {attr}")
        if edge.get("id") in edge_ids:
            problems.append(f"duplicate edge id {edge.get('id')}")
        edge_ids.add(edge.get("id"))
        for end in ("source", "target"):
            if edge.get(end) not in ids:
                problems.append(f"edge {edge.get('id')} {end} {edge.get(end)} is not a node")
        if edge.get("type", "undirected") not in ("directed", "undirected", "mutual"):
            problems.append("bad edge type")
        w = edge.get("weight")
        if w is not None:
            try:
                float(w)
            except ValueError:
                problems.append(f"non-numeric weight {w}")
    return problems
