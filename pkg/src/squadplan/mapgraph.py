"""Region graph: map regions as nodes, land passages (chokepoints) as
weighted undirected edges.

Map file format (line oriented, ``#`` starts a comment)::

    regions <N>
    pos <id> <x> <y>
    edge <a> <b> <length>

``regions`` must come first; the other directives may appear in any order.
"""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Iterable

UNREACHABLE = math.inf

# generate_map scatters regions uniformly over [0, MAP_EXTENT]^2 and draws
# edge length = euclidean distance * U(1.0, WINDING_MAX), floored at
# MIN_EDGE_LENGTH and rounded to 0.1.
MAP_EXTENT = 100.0
WINDING_MAX = 1.3
MIN_EDGE_LENGTH = 1.0


class MapFormatError(ValueError):
    """Malformed map file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MapValidationError(ValueError):
    pass


def _key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, eq=False)
class RegionGraph:
    """Immutable region graph.

    ``edges`` maps each normalized pair ``(a, b)`` with ``a < b`` to its
    travel length. ``positions`` is optional and only used for air
    distances, map generation and debugging.
    """

    region_count: int
    edges: dict[tuple[int, int], float]
    positions: tuple[tuple[float, float], ...] | None = None
    _adj: tuple[tuple[tuple[int, float], ...], ...] = field(init=False, repr=False)
    _dist_cache: dict = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.region_count, int) or self.region_count < 1:
            raise MapValidationError(f"region_count must be a positive integer, got {self.region_count!r}")
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.region_count)]
        normalized = {}
        for (a, b), length in self.edges.items():
            self._check_id(a)
            self._check_id(b)
            if a == b:
                raise MapValidationError(f"self-loop edge on region {a}")
            k = _key(a, b)
            if k in normalized:
                raise MapValidationError(f"duplicate edge {k}")
            if not length > 0 or not math.isfinite(length):
                raise MapValidationError(f"edge {k} has non-positive length {length}")
            normalized[k] = float(length)
            adj[a].append((b, float(length)))
            adj[b].append((a, float(length)))
        if self.positions is not None and len(self.positions) != self.region_count:
            raise MapValidationError("positions must cover every region")
        object.__setattr__(self, "edges", dict(sorted(normalized.items())))
        object.__setattr__(self, "_adj", tuple(tuple(sorted(n)) for n in adj))
        object.__setattr__(self, "_dist_cache", {})

    def _check_id(self, r: int) -> None:
        if not isinstance(r, int) or not 0 <= r < self.region_count:
            raise MapValidationError(f"region id {r!r} out of range 0..{self.region_count - 1}")

    def __eq__(self, other):
        if not isinstance(other, RegionGraph):
            return NotImplemented
        return (self.region_count, self.edges, self.positions) == (
            other.region_count, other.edges, other.positions)

    def __hash__(self):
        return hash((self.region_count, tuple(self.edges.items()), self.positions))

    @property
    def regions(self) -> range:
        return range(self.region_count)

    def edge_length(self, a: int, b: int) -> float | None:
        return self.edges.get(_key(a, b))

    def adjacent(self, r: int) -> tuple[tuple[int, float], ...]:
        """(neighbor, length) pairs sorted by neighbor id."""
        return self._adj[r]

    def max_edge_length(self) -> float:
        return max(self.edges.values(), default=1.0)

    def air_distance(self, a: int, b: int) -> float:
        """Flight length between two regions.

        Euclidean distance between region positions when the map has them,
        otherwise the longest ground edge of the map.
        """
        if a == b:
            return 0.0
        if self.positions is not None:
            (xa, ya), (xb, yb) = self.positions[a], self.positions[b]
            return max(math.hypot(xa - xb, ya - yb), 1e-6)
        return self.max_edge_length()

    def distances_from(self, source: int) -> tuple[float, ...]:
        """Single-source shortest ground distances (Dijkstra), cached."""
        cached = self._dist_cache.get(source)
        if cached is not None:
            return cached
        self._check_id(source)
        dist = [UNREACHABLE] * self.region_count
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, r = heapq.heappop(heap)
            if d > dist[r]:
                continue
            for n, length in self._adj[r]:
                nd = d + length
                if nd < dist[n]:
                    dist[n] = nd
                    heapq.heappush(heap, (nd, n))
        result = tuple(dist)
        self._dist_cache[source] = result
        return result


def neighbors(g: RegionGraph, r: int) -> set[int]:
    g._check_id(r)
    return {n for n, _ in g.adjacent(r)}


def connected_components(g: RegionGraph) -> list[set[int]]:
    """Ground-connected components, ordered by their smallest region id."""
    seen = [False] * g.region_count
    components = []
    for start in g.regions:
        if seen[start]:
            continue
        seen[start] = True
        stack, comp = [start], {start}
        while stack:
            r = stack.pop()
            for n, _ in g.adjacent(r):
                if not seen[n]:
                    seen[n] = True
                    comp.add(n)
                    stack.append(n)
        components.append(comp)
    return components


def ground_distance(g: RegionGraph, a: int, b: int) -> float:
    """Shortest summed edge length from a to b; ``UNREACHABLE`` (inf) across components."""
    g._check_id(a)
    g._check_id(b)
    return g.distances_from(a)[b]


def load_map(text: str) -> RegionGraph:
    region_count = None
    positions: dict[int, tuple[float, float]] = {}
    edges: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive, args = tokens[0], tokens[1:]
        try:
            if directive == "regions":
                if region_count is not None:
                    raise MapFormatError("duplicate 'regions' directive", lineno)
                if len(args) != 1:
                    raise MapFormatError("expected: regions <N>", lineno)
                region_count = int(args[0])
                if region_count < 1:
                    raise MapValidationError(f"line {lineno}: region count must be positive")
                continue
            if region_count is None:
                raise MapFormatError(f"'{directive}' before 'regions'", lineno)
            if directive == "pos":
                if len(args) != 3:
                    raise MapFormatError("expected: pos <id> <x> <y>", lineno)
                r = int(args[0])
                if not 0 <= r < region_count:
                    raise MapValidationError(f"line {lineno}: region id {r} out of range")
                if r in positions:
                    raise MapValidationError(f"line {lineno}: duplicate pos for region {r}")
                positions[r] = (float(args[1]), float(args[2]))
            elif directive == "edge":
                if len(args) != 3:
                    raise MapFormatError("expected: edge <a> <b> <length>", lineno)
                a, b, length = int(args[0]), int(args[1]), float(args[2])
                for r in (a, b):
                    if not 0 <= r < region_count:
                        raise MapValidationError(f"line {lineno}: region id {r} out of range")
                if a == b:
                    raise MapValidationError(f"line {lineno}: self-loop edge on region {a}")
                if _key(a, b) in edges:
                    raise MapValidationError(f"line {lineno}: duplicate edge {a} {b}")
                if not length > 0:
                    raise MapValidationError(f"line {lineno}: non-positive edge length {length}")
                edges[_key(a, b)] = length
            else:
                raise MapFormatError(f"unknown directive '{directive}'", lineno)
        except ValueError as exc:
            if isinstance(exc, (MapFormatError, MapValidationError)):
                raise
            raise MapFormatError(f"bad number in '{line}'", lineno) from exc
    if region_count is None:
        raise MapFormatError("missing 'regions' directive")
    pos_tuple = None
    if positions:
        if len(positions) != region_count:
            raise MapValidationError("pos given for some regions but not all")
        pos_tuple = tuple(positions[r] for r in range(region_count))
    return RegionGraph(region_count, edges, pos_tuple)


def dump_map(g: RegionGraph) -> str:
    """Serialize to the map file format; ``load_map(dump_map(g)) == g``."""
    lines = [f"regions {g.region_count}"]
    if g.positions is not None:
        lines += [f"pos {r} {x!r} {y!r}" for r, (x, y) in enumerate(g.positions)]
    lines += [f"edge {a} {b} {length!r}" for (a, b), length in g.edges.items()]
    return "\n".join(lines) + "\n"


def _pairs_by_distance(points: list[tuple[float, float]], ids: Iterable[int]):
    ids = list(ids)
    pairs = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            (xa, ya), (xb, yb) = points[a], points[b]
            pairs.append((math.hypot(xa - xb, ya - yb), a, b))
    pairs.sort()
    return pairs


def generate_map(seed: int, n_regions: int, n_isolated: int = 0) -> RegionGraph:
    """Random map whose non-isolated regions form one ground component.

    The connected part is a Euclidean minimum spanning tree over random
    positions plus a few extra short edges (loops give alternative routes).
    ``n_isolated`` randomly chosen regions get no ground edge at all and can
    only be reached by flyers.
    """
    if not isinstance(n_regions, int) or n_regions < 1:
        raise ValueError(f"n_regions must be a positive integer, got {n_regions!r}")
    if not isinstance(n_isolated, int) or not 0 <= n_isolated < n_regions:
        raise ValueError(f"need 0 <= n_isolated < n_regions, got {n_isolated} / {n_regions}")
    rng = random.Random(seed)
    points = [(round(rng.uniform(0, MAP_EXTENT), 2), round(rng.uniform(0, MAP_EXTENT), 2))
              for _ in range(n_regions)]
    isolated = set(rng.sample(range(n_regions), n_isolated))
    ground = [r for r in range(n_regions) if r not in isolated]

    def length(d: float) -> float:
        return max(MIN_EDGE_LENGTH, round(d * rng.uniform(1.0, WINDING_MAX), 1))

    # Kruskal over the complete euclidean graph of the ground regions.
    parent = {r: r for r in ground}

    def find(r):
        while parent[r] != r:
            parent[r] = parent[parent[r]]
            r = parent[r]
        return r

    edges: dict[tuple[int, int], float] = {}
    spare = []
    for d, a, b in _pairs_by_distance(points, ground):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            edges[(a, b)] = length(d)
        else:
            spare.append((d, a, b))
    extra = len(ground) // 5
    for d, a, b in spare[: extra * 2]:
        if extra == 0:
            break
        if rng.random() < 0.5:
            edges[(a, b)] = length(d)
            extra -= 1
    return RegionGraph(n_regions, edges, tuple(points))
