"""Integer point sets, convex hulls and exact geometric predicates.

Coordinates are integers with absolute value below 2**29, so every
orientation determinant fits in a signed 64-bit integer and the predicates
are exact.  Distances are ordinary floats.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..engine import RngStream
from ..errors import CollinearTriple, GeometryError, ParameterOutOfRange

COORD_LIMIT = 1 << 29


def orientation(a, b, c) -> int:
    """Sign of the cross product (b - a) x (c - a): 1 left turn, -1 right, 0 collinear."""
    det = (int(b[0]) - int(a[0])) * (int(c[1]) - int(a[1])) - (int(b[1]) - int(a[1])) * (int(c[0]) - int(a[0]))
    return (det > 0) - (det < 0)


def convex_hull(coords) -> list[int]:
    """Hull vertex indices counter-clockwise from the lexicographically smallest point.

    Andrew's monotone chain; collinear boundary points are dropped.
    """
    pts = [(int(x), int(y)) for x, y in coords]
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    if len(order) <= 2:
        return order

    def build(seq):
        chain: list[int] = []
        for i in seq:
            while len(chain) >= 2 and orientation(pts[chain[-2]], pts[chain[-1]], pts[i]) <= 0:
                chain.pop()
            chain.append(i)
        return chain

    lower = build(order)
    upper = build(reversed(order))
    return lower[:-1] + upper[:-1]


def find_collinear_triple(coords: np.ndarray):
    """Some (a, b, c) index triple lying on one line, or None.  O(n^3) vectorised."""
    c = np.asarray(coords, dtype=np.int64)
    n = len(c)
    for a in range(n - 2):
        d = c[a + 1:] - c[a]  # vectors from a to every later point
        cross = d[:, None, 0] * d[None, :, 1] - d[:, None, 1] * d[None, :, 0]
        iu = np.triu_indices(len(d), k=1)
        hits = np.nonzero(cross[iu] == 0)[0]
        if hits.size:
            h = hits[0]
            return (a, a + 1 + int(iu[0][h]), a + 1 + int(iu[1][h]))
    return None


class PointSet:
    """Noncollinear integer points with their hull order and inner points.

    ``hull_order`` is the cyclic hull order (counter-clockwise, starting at
    the lexicographically smallest point); ``inner`` are the remaining point
    indices in increasing order; ``k`` is the number of inner points.
    """

    def __init__(self, coords, m_grid: int | None = None, *, check: bool = True):
        arr = np.asarray(coords)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise GeometryError("coordinates must be an (n, 2) array")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.asarray(arr, dtype=float) == np.round(np.asarray(arr, dtype=float))):
                raise GeometryError("coordinates must be integers")
        arr = arr.astype(np.int64)
        if arr.size and np.abs(arr).max() >= COORD_LIMIT:
            raise GeometryError(f"coordinates must have absolute value below {COORD_LIMIT}")
        n = len(arr)
        if n < 3:
            raise GeometryError("need at least 3 points")
        if len({(int(x), int(y)) for x, y in arr}) != n:
            raise GeometryError("duplicate points")
        if check:
            triple = find_collinear_triple(arr)
            if triple is not None:
                raise CollinearTriple(f"points {triple} are collinear")
        self.coords = arr
        self.coords.setflags(write=False)
        self.n = n
        self.m_grid = m_grid
        diff = arr[:, None, :].astype(float) - arr[None, :, :].astype(float)
        self.dist = np.sqrt((diff**2).sum(axis=2))
        self.dist.setflags(write=False)
        self.dist_list = self.dist.tolist()  # fast scalar access in DP loops
        self.hull_order = tuple(convex_hull(arr))
        hull = set(self.hull_order)
        self.inner = tuple(i for i in range(n) if i not in hull)
        self.k = len(self.inner)

    def __repr__(self):
        return f"PointSet(n={self.n}, k={self.k}, m_grid={self.m_grid})"

    @property
    def outer(self) -> tuple[int, ...]:
        return self.hull_order

    def d(self, a: int, b: int) -> float:
        return float(self.dist[a, b])

    def hull_tour(self) -> np.ndarray:
        return np.array(self.hull_order, dtype=np.int64)


# ----------------------------------------------------------------------------
# crossings


def segments_properly_intersect(a, b, c, d) -> bool:
    """Open segments ab and cd cross at a single interior point."""
    o1 = orientation(a, b, c)
    o2 = orientation(a, b, d)
    o3 = orientation(c, d, a)
    o4 = orientation(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def count_crossings(ps: PointSet, tour) -> int:
    """Unordered pairs of tour edges that properly intersect (shared endpoints excluded)."""
    t = [int(v) for v in tour]
    n = len(t)
    pts = ps.coords
    edges = [(t[i], t[(i + 1) % n]) for i in range(n)]
    total = 0
    for i in range(n):
        a, b = edges[i]
        for j in range(i + 1, n):
            c, d = edges[j]
            if len({a, b, c, d}) < 4:
                continue
            if segments_properly_intersect(pts[a], pts[b], pts[c], pts[d]):
                total += 1
    return total


# ----------------------------------------------------------------------------
# angle bound


def min_angle(ps: PointSet) -> float:
    """Smallest min(theta, pi - theta) over all angles u-v-w at a vertex v."""
    c = ps.coords.astype(float)
    n = ps.n
    best = math.pi / 2
    for v in range(n):
        vec = np.delete(c, v, axis=0) - c[v]
        norm = np.sqrt((vec**2).sum(axis=1))
        unit = vec / norm[:, None]
        cos = np.clip(unit @ unit.T, -1.0, 1.0)
        iu = np.triu_indices(n - 1, k=1)
        theta = np.arccos(cos[iu])
        best = min(best, float(np.minimum(theta, math.pi - theta).min()))
    return best


def angle_bound(ps: PointSet) -> tuple[float, float]:
    """(epsilon, A_eps) with A_eps = (dmax / dmin - 1) cos(eps) / (1 - cos(eps)).

    epsilon is the infimum of the admissible bounds: every angle lies in
    [epsilon, pi - epsilon], and any smaller value bounds them strictly.
    """
    if find_collinear_triple(ps.coords) is not None:
        raise CollinearTriple("angle bound undefined for collinear points")
    eps = min_angle(ps)
    off = ps.dist[~np.eye(ps.n, dtype=bool)]
    dmax, dmin = float(off.max()), float(off.min())
    ce = math.cos(eps)
    return eps, (dmax / dmin - 1.0) * ce / (1.0 - ce)


def grid_min_angle(m: int) -> float:
    """Lower bound arctan(1 / (2 (m - 2)^2)) on every angle of a noncollinear m-grid set."""
    if m < 3:
        raise ParameterOutOfRange("need m >= 3")
    return math.atan(1.0 / (2 * max(m - 2, 1) ** 2))


def grid_a_eps_cap(m: int) -> float:
    """Upper bound on A_eps over noncollinear m-grid sets: dmin >= 1, dmax <= sqrt(2)(m - 1).

    Grows like 8 sqrt(2) m^5.
    """
    ce = math.cos(grid_min_angle(m))
    return (math.sqrt(2) * (m - 1) - 1.0) * ce / (1.0 - ce)


def improvement_bound(ps: PointSet, eps: float | None = None) -> float:
    """Guaranteed decrease 2 dmin (1 - cos eps) / cos eps of an uncrossing 2-opt move."""
    if eps is None:
        eps, _ = angle_bound(ps)
    off = ps.dist[~np.eye(ps.n, dtype=bool)]
    dmin = float(off.min())
    return 2 * dmin * (1 - math.cos(eps)) / math.cos(eps)


# ----------------------------------------------------------------------------
# instance generators


def _try_pointset(coords, m_grid):
    try:
        return PointSet(np.array(coords, dtype=np.int64), m_grid)
    except GeometryError:
        return None


def random_grid_instance(n: int, m: int, rng: RngStream, max_tries: int = 10_000) -> PointSet:
    """n distinct noncollinear points uniform on the m x m grid {0..m-1}^2."""
    if n > m * m:
        raise ParameterOutOfRange("more points than grid cells")
    for _ in range(max_tries):
        seen = set()
        pts = []
        while len(pts) < n:
            p = (rng.randbelow(m), rng.randbelow(m))
            if p not in seen:
                seen.add(p)
                pts.append(p)
        ps = _try_pointset(pts, m)
        if ps is not None:
            return ps
    raise GeometryError("could not place noncollinear points")


def _circle_points(count, m, rng, radius_frac=1.0):
    c = (m - 1) / 2.0
    r = (m - 1) / 2.0 * radius_frac
    angles = sorted(rng.random() * 2 * math.pi for _ in range(count))
    return [(int(round(c + r * math.cos(a))), int(round(c + r * math.sin(a)))) for a in angles]


def convex_position_instance(n: int, m: int, rng: RngStream, max_tries: int = 100_000) -> PointSet:
    """n grid points in convex position (no inner points), near a circle."""
    return inner_points_instance(n, 0, m, rng, max_tries=max_tries)


def inner_points_instance(n: int, k: int, m: int, rng: RngStream, max_tries: int = 100_000) -> PointSet:
    """n noncollinear grid points of which exactly k lie strictly inside the hull.

    Hull candidates sit near the circle inscribed in the grid, inner
    candidates uniformly in the central disc of half that radius.
    """
    if not 0 <= k <= n - 3:
        raise ParameterOutOfRange("need 0 <= k <= n - 3")
    for _ in range(max_tries):
        pts = _circle_points(n - k, m, rng)
        c = (m - 1) / 2.0
        r = (m - 1) / 4.0
        while len(pts) < n:
            x = c + (2 * rng.random() - 1) * r
            y = c + (2 * rng.random() - 1) * r
            if (x - c) ** 2 + (y - c) ** 2 <= r * r:
                pts.append((int(round(x)), int(round(y))))
        ps = _try_pointset(pts, m)
        if ps is not None and ps.k == k:
            return ps
    raise GeometryError(f"could not generate an instance with n={n}, k={k} on a {m} grid")


# ----------------------------------------------------------------------------
# point files


def format_points(ps: PointSet) -> str:
    m = ps.m_grid if ps.m_grid is not None else int(ps.coords.max()) + 1
    lines = [f"{ps.n} {m}"] + [f"{int(x)} {int(y)}" for x, y in ps.coords]
    return "\n".join(lines) + "\n"


def parse_points(text: str) -> PointSet:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise GeometryError("point file must start with 'n m_grid'")
    n, m = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != n:
        raise GeometryError(f"header promises {n} points, found {len(body)}")
    coords = [(int(a), int(b)) for a, b in body]
    return PointSet(np.array(coords, dtype=np.int64), m)


def write_points(path, ps: PointSet) -> None:
    Path(path).write_text(format_points(ps))


def read_points(path) -> PointSet:
    return parse_points(Path(path).read_text())
