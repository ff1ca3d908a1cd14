#!/usr/bin/env python3
# Justin, 2026-02-07
"""Feynman graphs of chiral interactions.

A chiral vertex has any number of alpha-legs and at most one beta-leg. An
internal edge joins the beta-leg of its source vertex to an alpha-leg of its
target vertex, so every vertex has out-degree at most one. Connected graphs
built this way are either

    (a) trees with a single external beta-leg as the root,
    (b) trees rooted at a vertex without beta-legs (a lone such vertex being
        the simplest case), or
    (c) one-loop graphs, whose directed cycle used up every beta-leg.

'classify' computes the class from the structure instead of assuming it,
and 'enumerate_graphs' generates all graphs on a multiset of vertices, so
the closure of the list above can be checked exhaustively.

Graphs are written in a line-oriented text format, e.g.

    vertex cubic
    vertex cs
    edge 0 -> 1 leg=0

or with the shorthand "wheel 3 cubic"; lines may also be separated by ';'.

Changelog:
    2026-02-07, Justin: Init
    2026-02-12, Justin: Growth enumeration with isomorphism buckets.
"""

__all__ = [
    "ChiralVertex", "Edge", "ChiralGraph", "GraphClass", "VERTEX_LIBRARY",
    "classify", "enumerate_graphs", "weight", "wheel", "cycle_edges",
    "betti_number", "graph_id", "parse_graph", "format_graph",
]

import collections
import dataclasses
import enum
import re
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
from networkx.algorithms.isomorphism import (
    categorical_multiedge_match, categorical_node_match,
)

from holobf.common import DomainError, ResourceError
from holobf.logging import get_logger

logger = get_logger(__name__)

MAX_VERTICES = 7


@dataclasses.dataclass(frozen=True)
class ChiralVertex:
    """Interaction vertex with per-leg holomorphic derivative orders.

    Legs are indexed alpha-legs first, then the beta-leg if present, so
    'deriv_orders' has alpha_legs + beta_legs entries.
    """
    alpha_legs: int
    beta_legs: int = 0
    deriv_orders: Tuple[int, ...] = None
    label: str = "vertex"

    def __post_init__(self):
        if self.alpha_legs < 1:
            raise DomainError(f"Vertex '{self.label}' needs at least one alpha-leg")
        if self.beta_legs not in (0, 1):
            raise DomainError(f"Chiral vertex '{self.label}' has at most one beta-leg, got {self.beta_legs}")
        orders = self.deriv_orders
        if orders is None:
            orders = (0,) * (self.alpha_legs + self.beta_legs)
        orders = tuple(int(k) for k in orders)
        if len(orders) != self.alpha_legs + self.beta_legs:
            raise DomainError(f"Vertex '{self.label}' needs one derivative order per leg")
        if any(k < 0 for k in orders):
            raise DomainError(f"Negative derivative order at vertex '{self.label}'")
        if not re.fullmatch(r"[A-Za-z_][\w\-]*", self.label):
            raise DomainError(f"Vertex label '{self.label}' must be a single word")
        object.__setattr__(self, "deriv_orders", orders)

    @property
    def weight(self) -> int:
        return self.beta_legs

    @property
    def beta_leg(self) -> Optional[int]:
        return self.alpha_legs if self.beta_legs else None

    def alpha_order(self, leg: int) -> int:
        return self.deriv_orders[leg]

    @property
    def beta_order(self) -> int:
        return self.deriv_orders[-1] if self.beta_legs else 0

    @property
    def signature(self) -> str:
        orders = ",".join(map(str, self.deriv_orders))
        return f"{self.label}:{self.alpha_legs}:{self.beta_legs}:{orders}"

    def describe(self) -> str:
        orders = ",".join(map(str, self.deriv_orders))
        return f"vertex {self.label} alpha={self.alpha_legs} beta={self.beta_legs} deriv={orders}"


VERTEX_LIBRARY = {
    "cubic": ChiralVertex(2, 1, (0, 0, 0), "cubic"),   # <beta, [alpha, alpha]>
    "dcubic": ChiralVertex(2, 1, (0, 1, 0), "dcubic"),  # <beta, [alpha, d_z alpha]>
    "cs": ChiralVertex(2, 0, (0, 1), "cs"),             # <alpha, d_z alpha>
    "quad": ChiralVertex(3, 1, (0, 0, 0, 0), "quad"),   # <beta, l_3(alpha, alpha, alpha)>
}


@dataclasses.dataclass(frozen=True, order=True)
class Edge:
    """Internal edge from the beta-leg of 'source' to alpha-leg 'leg' of 'target'."""
    source: int
    target: int
    leg: int


class GraphClass(enum.Enum):
    BETA_ROOTED_TREE = "beta_rooted_tree"
    ISOLATED_VERTEX = "isolated_vertex"
    ONE_LOOP_WHEEL = "one_loop_wheel"
    INADMISSIBLE = "inadmissible"


@dataclasses.dataclass(frozen=True)
class ChiralGraph:
    vertices: Tuple[ChiralVertex, ...]
    edges: Tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))
        V = len(self.vertices)
        betas, alphas = set(), set()
        for e in self.edges:
            if not (0 <= e.source < V and 0 <= e.target < V):
                raise DomainError(f"Edge {e} refers to a missing vertex")
            source, target = self.vertices[e.source], self.vertices[e.target]
            if source.beta_legs == 0:
                raise DomainError(f"Edge {e} starts at vertex {e.source} without a beta-leg")
            if not 0 <= e.leg < target.alpha_legs:
                raise DomainError(f"Edge {e} uses a missing alpha-leg of vertex {e.target}")
            if e.source in betas:
                raise DomainError(f"Beta-leg of vertex {e.source} is used twice")
            if (e.target, e.leg) in alphas:
                raise DomainError(f"Alpha-leg {e.leg} of vertex {e.target} is used twice")
            betas.add(e.source)
            alphas.add((e.target, e.leg))

    def external_alpha_legs(self) -> List[Tuple[int, int]]:
        used = {(e.target, e.leg) for e in self.edges}
        return [
            (v, leg) for v, vertex in enumerate(self.vertices)
            for leg in range(vertex.alpha_legs) if (v, leg) not in used
        ]

    def external_beta_legs(self) -> List[int]:
        used = {e.source for e in self.edges}
        return [v for v, vertex in enumerate(self.vertices) if vertex.beta_legs and v not in used]

    def to_networkx(self) -> nx.MultiDiGraph:
        G = nx.MultiDiGraph()
        for v, vertex in enumerate(self.vertices):
            G.add_node(v, signature=vertex.signature)
        for key, e in enumerate(self.edges):
            legs = (self.vertices[e.source].beta_order, self.vertices[e.target].alpha_order(e.leg))
            G.add_edge(e.source, e.target, key=key, legs=legs)
        return G

    def is_connected(self) -> bool:
        return len(self.vertices) > 0 and nx.is_weakly_connected(self.to_networkx())

    def __str__(self):
        return format_graph(self)


def _check_connected(g: ChiralGraph):
    if not g.is_connected():
        raise DomainError("Graph is empty or disconnected")

def betti_number(g: ChiralGraph) -> int:
    """First Betti number E - V + 1 of a connected graph."""
    _check_connected(g)
    return len(g.edges) - len(g.vertices) + 1

def cycle_edges(g: ChiralGraph) -> List[Edge]:
    """The directed cycle of a one-loop graph, in traversal order."""
    _check_connected(g)
    try:
        cycle = nx.find_cycle(g.to_networkx(), orientation="original")
    except nx.NetworkXNoCycle:
        raise DomainError("Graph has no directed cycle")
    return [g.edges[key] for _, _, key, _ in cycle]

def classify(g: ChiralGraph) -> GraphClass:
    """Sorts a connected graph into the classes (a), (b), (c) or inadmissible.

    Raises:
        DomainError: If the graph is disconnected.
    """
    betti = betti_number(g)
    free_betas = len(g.external_beta_legs())
    if betti == 0:
        if free_betas == 1:
            return GraphClass.BETA_ROOTED_TREE
        if free_betas == 0:
            return GraphClass.ISOLATED_VERTEX
    elif betti == 1 and free_betas == 0:
        try:
            cycle_edges(g)
        except DomainError:
            return GraphClass.INADMISSIBLE
        return GraphClass.ONE_LOOP_WHEEL
    return GraphClass.INADMISSIBLE

def weight(functional: Union[ChiralVertex, str]) -> int:
    """Number of beta-inputs of a vertex or of a written functional.

    Examples:
        >>> weight("<beta, [alpha, alpha]>")
        1
        >>> weight("<alpha, d alpha>")
        0
    """
    if isinstance(functional, ChiralVertex):
        return functional.weight
    return len(re.findall(r"\bbeta\b|β", str(functional)))

def wheel(n: int, vertex: Union[ChiralVertex, str] = "cubic") -> ChiralGraph:
    """The n-vertex directed cycle; each vertex feeds alpha-leg 0 of the next."""
    if n < 1:
        raise DomainError("A wheel needs at least one vertex")
    vertex = _library_vertex(vertex) if isinstance(vertex, str) else vertex
    if vertex.beta_legs == 0:
        raise DomainError(f"Vertex '{vertex.label}' has no beta-leg to close a wheel")
    return ChiralGraph((vertex,) * n, [Edge(i, (i + 1) % n, 0) for i in range(n)])

def graph_id(g: ChiralGraph, length: int = 12) -> str:
    """Stable identifier of the isomorphism class, a hash prefix."""
    return _hash(g.to_networkx())[:length]

def _hash(G: nx.MultiDiGraph) -> str:
    H = nx.DiGraph()
    for v, data in G.nodes(data=True):
        H.add_node(v, label=f"{data['signature']}|{G.in_degree(v)}|{G.out_degree(v)}")
    H.add_edges_from((u, v) for u, v in G.edges())
    return nx.weisfeiler_lehman_graph_hash(H, node_attr="label")


##########################
#  ENUMERATION           #
##########################

_node_match = categorical_node_match("signature", None)
_edge_match = categorical_multiedge_match("legs", None)

class _IsomorphismClasses:
    """Representatives up to isomorphism, bucketed by hash."""

    def __init__(self):
        self.buckets = collections.defaultdict(list)
        self.graphs = []

    def add(self, g: ChiralGraph) -> bool:
        G = g.to_networkx()
        bucket = self.buckets[_hash(G)]
        for H in bucket:
            if nx.is_isomorphic(G, H, node_match=_node_match, edge_match=_edge_match):
                return False
        bucket.append(G)
        self.graphs.append(g)
        return True

def _free_alpha_slots(g: ChiralGraph, vertices: Iterable[int]):
    """One free alpha-leg per (vertex, derivative order), the lowest index."""
    used = {(e.target, e.leg) for e in g.edges}
    slots = []
    for v in vertices:
        seen = set()
        vertex = g.vertices[v]
        for leg in range(vertex.alpha_legs):
            k = vertex.alpha_order(leg)
            if (v, leg) not in used and k not in seen:
                seen.add(k)
                slots.append((v, leg))
    return slots

def _extensions(g: ChiralGraph, vertex: ChiralVertex, self_loops: bool):
    """Connected graphs obtained by attaching 'vertex' to 'g'."""
    new = len(g.vertices)
    base = ChiralGraph(g.vertices + (vertex,), g.edges)
    free_betas = base.external_beta_legs()
    incoming = [u for u in free_betas if u != new]

    # Choices for the new beta-leg: external, into g, or a self-loop
    beta_choices = [None]
    if vertex.beta_legs:
        beta_choices += _free_alpha_slots(base, range(new))
        if self_loops:
            beta_choices += _free_alpha_slots(base, [new])

    for target in beta_choices:
        edges = list(base.edges)
        if target is not None:
            edges.append(Edge(new, *target))
        # Each free beta of g feeds a distinct alpha-leg of the new vertex, or stays external
        yield from _attach_incoming(base.vertices, edges, incoming, new, connected=target is not None and target[0] != new)

def _attach_incoming(vertices, edges, incoming, new, connected):
    if not incoming:
        if connected:
            yield ChiralGraph(vertices, edges)
        return
    u, rest = incoming[0], incoming[1:]
    yield from _attach_incoming(vertices, edges, rest, new, connected)
    probe = ChiralGraph(vertices, edges)
    for v, leg in _free_alpha_slots(probe, [new]):
        yield from _attach_incoming(vertices, edges + [Edge(u, v, leg)], rest, new, True)

def enumerate_graphs(vertices: Sequence[Union[ChiralVertex, str]], self_loops: bool = False) -> List[ChiralGraph]:
    """All connected graphs on the given vertex multiset, up to isomorphism.

    Graphs are grown one vertex at a time. Every connected graph has a vertex
    whose removal leaves it connected, so growing all connected graphs on
    smaller sub-multisets reaches every graph.

    Args:
        vertices: ChiralVertex objects or library names; each is used once.
        self_loops: Allow an edge from a vertex to itself.

    Raises:
        ResourceError: If more than MAX_VERTICES vertices are given.
    """
    vertices = [_library_vertex(v) if isinstance(v, str) else v for v in vertices]
    if len(vertices) > MAX_VERTICES:
        raise ResourceError(f"Enumeration is limited to {MAX_VERTICES} vertices, got {len(vertices)}")
    if not vertices:
        return []

    def key(multiset):
        return tuple(sorted(v.signature for v in multiset))

    target = collections.Counter(v.signature for v in vertices)
    by_signature = {v.signature: v for v in vertices}

    # level: sub-multiset key -> isomorphism classes of connected graphs on it
    level = {}
    for signature in target:
        classes = level.setdefault((signature,), _IsomorphismClasses())
        vertex = by_signature[signature]
        classes.add(ChiralGraph((vertex,)))
        if self_loops and vertex.beta_legs:
            for v, leg in _free_alpha_slots(ChiralGraph((vertex,)), [0]):
                classes.add(ChiralGraph((vertex,), [Edge(0, v, leg)]))

    for size in range(2, len(vertices) + 1):
        grown = {}
        for used, classes in level.items():
            remaining = target - collections.Counter(used)
            for signature in sorted(remaining):
                next_key = tuple(sorted(used + (signature,)))
                bucket = grown.setdefault(next_key, _IsomorphismClasses())
                for g in classes.graphs:
                    for h in _extensions(g, by_signature[signature], self_loops):
                        bucket.add(h)
        level = grown
        logger.debug(
            "Grown graphs with %d vertices", size,
            extra={"details": {str(k): len(v.graphs) for k, v in level.items()}},
        )

    return list(level.get(key(vertices), _IsomorphismClasses()).graphs)


##########################
#  TEXT FORMAT           #
##########################

RE_VERTEX = re.compile(r"^vertex\s+(?P<label>\S+)(?P<attrs>(\s+\w+=\S+)*)$")
RE_EDGE = re.compile(r"^edge\s+(?P<source>\d+)\s*->\s*(?P<target>\d+)(\s+leg=(?P<leg>\d+))?$")
RE_WHEEL = re.compile(r"^wheel\s+(?P<n>\d+)(\s+(?P<label>\S+))?$")

def _library_vertex(name: str) -> ChiralVertex:
    try:
        return VERTEX_LIBRARY[name]
    except KeyError:
        raise DomainError(f"Unknown library vertex '{name}', expected one of {sorted(VERTEX_LIBRARY)}")

def _parse_vertex(match) -> ChiralVertex:
    label = match.group("label")
    attrs = dict(a.split("=", 1) for a in match.group("attrs").split())
    if not attrs:
        return _library_vertex(label)
    unknown = set(attrs) - {"alpha", "beta", "deriv"}
    if unknown:
        raise DomainError(f"Unknown vertex attributes {sorted(unknown)}")
    alpha = int(attrs.get("alpha", 1))
    beta = int(attrs.get("beta", 0))
    deriv = tuple(int(k) for k in attrs["deriv"].split(",")) if "deriv" in attrs else None
    return ChiralVertex(alpha, beta, deriv, label)

def parse_graph(text: str) -> ChiralGraph:
    """Parses the line-oriented graph description.

    Raises:
        DomainError: With the offending line number on malformed input.
    """
    vertices, edges = [], []
    lines = [line for chunk in text.splitlines() for line in chunk.split(";")]
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if (m := RE_WHEEL.match(line)):
                if vertices or edges:
                    raise DomainError("'wheel' cannot be combined with other declarations")
                g = wheel(int(m.group("n")), m.group("label") or "cubic")
                vertices, edges = list(g.vertices), list(g.edges)
            elif (m := RE_VERTEX.match(line)):
                vertices.append(_parse_vertex(m))
            elif (m := RE_EDGE.match(line)):
                edges.append(Edge(int(m.group("source")), int(m.group("target")), int(m.group("leg") or 0)))
            else:
                raise DomainError("unrecognized declaration")
        except (DomainError, ValueError) as e:
            raise DomainError(f"Graph description, line {lineno} '{line}': {e}") from e
    return ChiralGraph(vertices, edges)

def format_graph(g: ChiralGraph) -> str:
    lines = [v.describe() for v in g.vertices]
    lines += [f"edge {e.source} -> {e.target} leg={e.leg}" for e in g.edges]
    return "\n".join(lines)
