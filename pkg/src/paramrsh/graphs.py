"""Undirected graphs, spanning trees and the instance constructions.

Graph text format (0-based vertex ids)::

    # optional comment lines
    n m
    u v
    ...
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import RngStream
from .errors import EdgeInTree, GraphError, ParameterOutOfRange


class Graph:
    """Immutable simple undirected graph.

    Edge ids are the positions in ``edges``; each edge is stored as
    ``(min(u, v), max(u, v))``.
    """

    def __init__(self, n: int, edges, *, require_connected: bool = True, meta=None):
        if n < 1:
            raise GraphError("a graph needs at least one vertex")
        norm = []
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            seen.add(e)
            norm.append(e)
        self.n = n
        self.edges = tuple(norm)
        self.m = len(norm)
        self.meta = dict(meta or {})
        self.edge_index = {e: i for i, e in enumerate(norm)}
        incident = [[] for _ in range(n)]
        neighbors = [[] for _ in range(n)]
        for i, (u, v) in enumerate(norm):
            incident[u].append(i)
            incident[v].append(i)
            neighbors[u].append(v)
            neighbors[v].append(u)
        self.incident = tuple(tuple(x) for x in incident)
        self.neighbors = tuple(tuple(x) for x in neighbors)
        self.nbr_mask = tuple(sum(1 << w for w in nb) for nb in neighbors)
        self.eu = np.array([e[0] for e in norm], dtype=np.int64)
        self.ev = np.array([e[1] for e in norm], dtype=np.int64)
        ptr = np.zeros(n + 1, dtype=np.int64)
        for v in range(n):
            ptr[v + 1] = ptr[v] + len(incident[v])
        self.adj_ptr = ptr
        self.adj_nbr = np.array([w for nb in neighbors for w in nb], dtype=np.int64)
        self.adj_eid = np.array([e for inc in incident for e in inc], dtype=np.int64)
        for arr in (self.eu, self.ev, self.adj_ptr, self.adj_nbr, self.adj_eid):
            arr.setflags(write=False)
        if require_connected and not self.is_connected():
            raise GraphError("graph is not connected")

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(x) for x in self.incident], dtype=np.int64)

    def is_connected(self) -> bool:
        return len(_reach(self.neighbors, 0)) == self.n

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index[(u, v) if u < v else (v, u)]


def _reach(neighbors, start) -> set:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in neighbors[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_spanning_tree(g: Graph, mask) -> bool:
    """True iff the selected edges form a spanning tree of ``g``."""
    mask = np.asarray(mask, dtype=bool)
    ids = np.flatnonzero(mask)
    if len(ids) != g.n - 1:
        return False
    parent = list(range(g.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in ids:
        u, v = g.edges[e]
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


class SpanningTree:
    """Spanning tree of a graph, stored as an edge-membership bitset."""

    __slots__ = ("graph", "mask", "degree")

    def __init__(self, graph: Graph, mask, *, check: bool = True):
        mask = np.array(mask, dtype=bool)
        if mask.shape != (graph.m,):
            raise GraphError(f"mask length {mask.shape} does not match m={graph.m}")
        if check and not is_spanning_tree(graph, mask):
            raise GraphError("edge set is not a spanning tree")
        mask.setflags(write=False)
        self.graph = graph
        self.mask = mask
        deg = np.zeros(graph.n, dtype=np.int64)
        ids = np.flatnonzero(mask)
        np.add.at(deg, graph.eu[ids], 1)
        np.add.at(deg, graph.ev[ids], 1)
        deg.setflags(write=False)
        self.degree = deg

    @classmethod
    def from_edges(cls, graph: Graph, edge_ids) -> "SpanningTree":
        mask = np.zeros(graph.m, dtype=bool)
        mask[list(edge_ids)] = True
        return cls(graph, mask)

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.mask))

    @property
    def leaves(self) -> int:
        return int(np.count_nonzero(self.degree == 1))

    def key(self) -> bytes:
        return np.packbits(self.mask).tobytes()

    def __eq__(self, other):
        return (
            isinstance(other, SpanningTree)
            and self.graph is other.graph
            and bool(np.array_equal(self.mask, other.mask))
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"SpanningTree(edges={self.edge_ids}, leaves={self.leaves})"

    def tree_neighbors(self):
        nb = [[] for _ in range(self.graph.n)]
        for e in np.flatnonzero(self.mask):
            u, v = self.graph.edges[e]
            nb[u].append((v, int(e)))
            nb[v].append((u, int(e)))
        return nb


def leaf_count(t: SpanningTree) -> int:
    """Number of degree-one vertices of the tree."""
    return t.leaves


def fundamental_cycle(t: SpanningTree, e: int) -> list[int]:
    """Edge ids of the unique cycle in ``t + e``, starting with ``e``.

    The remaining ids follow the tree path from the second endpoint of ``e``
    back to the first.
    """
    if t.mask[e]:
        raise EdgeInTree(f"edge {e} already belongs to the tree")
    u, v = t.graph.edges[e]
    nb = t.tree_neighbors()
    # BFS from u until v is reached, remembering the edge used to enter
    via = {u: None}
    queue = deque([u])
    while queue:
        a = queue.popleft()
        if a == v:
            break
        for b, eid in nb[a]:
            if b not in via:
                via[b] = (a, eid)
                queue.append(b)
    cycle = [e]
    cur = v
    while via[cur] is not None:
        prev, eid = via[cur]
        cycle.append(eid)
        cur = prev
    return cycle


def bfs_tree(g: Graph, root: int = 0) -> SpanningTree:
    """Breadth-first spanning tree, neighbours visited in edge-id order."""
    mask = np.zeros(g.m, dtype=bool)
    seen = [False] * g.n
    seen[root] = True
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w, eid in zip(g.neighbors[v], g.incident[v]):
            if not seen[w]:
                seen[w] = True
                mask[eid] = True
                queue.append(w)
    return SpanningTree(g, mask)


def random_spanning_tree(g: Graph, rng: RngStream) -> SpanningTree:
    """Uniform spanning tree by Wilson's loop-erased random walk.

    Rooted at vertex 0; walks start from the remaining vertices in
    increasing id order.  Loop erasure is implicit: the successor pointer of
    a revisited vertex is simply overwritten.
    """
    n = g.n
    in_tree = [False] * n
    in_tree[0] = True
    succ_edge = [-1] * n
    succ = [-1] * n
    for start in range(1, n):
        v = start
        while not in_tree[v]:
            k = rng.randbelow(len(g.neighbors[v]))
            succ[v] = g.neighbors[v][k]
            succ_edge[v] = g.incident[v][k]
            v = succ[v]
        v = start
        while not in_tree[v]:
            in_tree[v] = True
            v = succ[v]
    mask = np.zeros(g.m, dtype=bool)
    for v in range(1, n):
        mask[succ_edge[v]] = True
    return SpanningTree(g, mask, check=False)


# ----------------------------------------------------------------------------
# Instance constructions


@dataclass(frozen=True)
class GlocInstance:
    """The two-component local-optimum graph plus its designated trees.

    Vertex layout: component ``i`` (0 or 1) occupies ids ``i*r .. i*r + r-1``
    with hub ``u_i = i*r`` and hub ``v_i = i*r + 1``; ``x = 2r``, ``y = 2r+1``;
    the path hangs off ``x`` as ``x - (2r+2) - (2r+3) - ... - (n-1)``.
    """

    graph: Graph
    r: int
    t_lopt: SpanningTree
    t_opt: SpanningTree
    layout: dict


def gen_gloc(r: int, n: int) -> GlocInstance:
    if r < 3:
        raise ParameterOutOfRange(f"component size r must be >= 3, got {r}")
    if n - 2 * r - 2 < 1:
        raise ParameterOutOfRange(f"need n >= 2r + 3 for a nonempty path, got r={r}, n={n}")
    x, y = 2 * r, 2 * r + 1
    edges = []
    lopt, opt = [], []

    def add(u, v, *trees):
        edges.append((u, v))
        for t in trees:
            t.append(len(edges) - 1)

    layout = {"x": x, "y": y, "u": [], "v": [], "path": list(range(2 * r + 2, n))}
    for i in range(2):
        u_i, v_i = i * r, i * r + 1
        layout["u"].append(u_i)
        layout["v"].append(v_i)
        add(u_i, v_i, lopt, opt)
        for w in range(i * r + 2, i * r + r):
            add(u_i, w, opt)
            add(v_i, w, lopt)
        add(u_i, x, opt)
        add(v_i, y, lopt)
    add(x, y, lopt, opt)
    prev = x
    for p in layout["path"]:
        add(prev, p, lopt, opt)
        prev = p
    meta = {"generator": "gloc", "r": r, "n": n, "layout": layout}
    g = Graph(n, edges, meta=meta)
    return GlocInstance(
        graph=g,
        r=r,
        t_lopt=SpanningTree.from_edges(g, lopt),
        t_opt=SpanningTree.from_edges(g, opt),
        layout=layout,
    )


def gen_complete_bipartite(a: int, b: int) -> Graph:
    """K_{a,b}; vertices ``0..a-1`` form side A, ``a..a+b-1`` side B."""
    if a < 1 or b < 1:
        raise ParameterOutOfRange("both sides need at least one vertex")
    edges = [(i, a + j) for i in range(a) for j in range(b)]
    meta = {"generator": "complete_bipartite", "a": a, "b": b,
            "partition": [0] * a + [1] * b}
    return Graph(a + b, edges, meta=meta)


def gen_path(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)], meta={"generator": "path", "n": n})


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise ParameterOutOfRange("a cycle needs n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)], meta={"generator": "cycle", "n": n})


def gen_star(leaves: int) -> Graph:
    """K_{1,leaves} with the centre at vertex 0."""
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)],
                 meta={"generator": "star", "leaves": leaves})


def gen_complete(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)],
                 meta={"generator": "complete", "n": n})


def gen_petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner, meta={"generator": "petersen"})


def random_connected_graph(n: int, p: float, rng: RngStream, max_tries: int = 10_000) -> Graph:
    """G(n, p) conditioned on connectivity (rejection sampling)."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for _ in range(max_tries):
        edges = [e for e in pairs if rng.random() < p]
        g = Graph(n, edges, require_connected=False)
        if g.is_connected():
            g.meta.update(generator="gnp", n=n, p=p)
            return g
    raise GraphError(f"no connected G({n}, {p}) sample in {max_tries} tries")


# ----------------------------------------------------------------------------
# Text format


def format_graph(g: Graph, header: str | None = None) -> str:
    lines = []
    if header is None and "layout" in g.meta:
        lay = g.meta["layout"]
        header = (f"gloc r={g.meta['r']} n={g.meta['n']}\n"
                  f"layout u={lay['u']} v={lay['v']} x={lay['x']} y={lay['y']} "
                  f"path={lay['path'][0]}..{lay['path'][-1]}")
    if header:
        lines.extend("# " + h for h in header.splitlines())
    lines.append(f"{g.n} {g.m}")
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def parse_graph(text: str, *, require_connected: bool = True) -> Graph:
    rows = [ln.split() for ln in text.splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise GraphError("empty graph file")
    n, m = int(rows[0][0]), int(rows[0][1])
    edges = [(int(a), int(b)) for a, b in rows[1:]]
    if len(edges) != m:
        raise GraphError(f"header announces {m} edges, found {len(edges)}")
    meta = {}
    for ln in text.splitlines():
        if ln.startswith("# gloc"):
            kv = dict(tok.split("=") for tok in ln[2:].split()[1:])
            meta = {"generator": "gloc", "r": int(kv["r"]), "n": int(kv["n"])}
    g = Graph(n, edges, require_connected=require_connected, meta=meta)
    return g


def write_graph(path, g: Graph, header: str | None = None) -> None:
    Path(path).write_text(format_graph(g, header))


def read_graph(path) -> Graph:
    return parse_graph(Path(path).read_text())
