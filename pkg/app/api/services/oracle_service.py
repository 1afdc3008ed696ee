"""
Oracle Service.
Gammoids represented by digraphs: routing checks, independence by
vertex-capacity max-flow, the deflation-lemma representation step and a
seeded random generator for soundness sweeps.
"""

import random
from itertools import combinations
from typing import Iterable, List, Optional, Tuple

import networkx as nx

from app.core.config import settings
from app.core.exceptions import InputError, SizeExceededError
from app.core.logging import get_logger, log_certificate
from app.domain.models.digraph import Digraph, Representation, Routing
from app.domain.models.matroid import GroundSet, Matroid
from app.domain.models.subsets import mask_of

logger = get_logger(__name__)

_SOURCE = "source"
_SINK = "sink"
_ARC_DENSITY = 0.35


class OracleService:
    """Ground truth for gammoids given by a representation (D, T, E)."""

    def verify_routing(self, rep: Representation, routing: Routing, x: Iterable[int]) -> bool:
        """
        Check that routing links x into the targets.

        Returns:
            bool: every vertex of x starts a path, every path is a simple
            directed path ending in T, and paths are pairwise vertex-disjoint
        """
        arcs = rep.digraph.arcs
        seen = set()
        starts = set()
        for path in routing.paths:
            if not path or len(set(path)) != len(path):
                return False
            if any((u, v) not in arcs for u, v in zip(path, path[1:])):
                return False
            if path[-1] not in rep.targets:
                return False
            if seen & set(path):
                return False
            seen.update(path)
            starts.add(path[0])
        return set(x) <= starts

    def _network(self, rep: Representation) -> nx.DiGraph:
        """Vertex-split flow network: each vertex v becomes (in, v) -> (out, v) with capacity 1."""
        graph = nx.DiGraph()
        for v in range(rep.vertex_count):
            graph.add_edge(("in", v), ("out", v), capacity=1)
        for u, v in rep.digraph.arcs:
            if u != v:
                graph.add_edge(("out", u), ("in", v))
        for t in rep.targets:
            graph.add_edge(("out", t), _SINK)
        graph.add_node(_SOURCE)
        graph.add_node(_SINK)
        return graph

    def _linked(self, network: nx.DiGraph, x: Iterable[int]) -> int:
        graph = network.copy()
        for v in x:
            graph.add_edge(_SOURCE, ("in", v), capacity=1)
        return nx.maximum_flow_value(graph, _SOURCE, _SINK)

    def route(self, rep: Representation, x: Iterable[int]) -> Optional[Routing]:
        """
        A routing x ↠ T read off a maximum flow, or None if x is not linked.
        """
        x = list(x)
        graph = self._network(rep)
        for v in x:
            graph.add_edge(_SOURCE, ("in", v), capacity=1)
        value, flow = nx.maximum_flow(graph, _SOURCE, _SINK)
        if value < len(x):
            return None
        paths: List[Tuple[int, ...]] = []
        for v in x:
            path = [v]
            node = ("out", v)
            while True:
                nxt = next(w for w, f in flow[node].items() if f > 0)
                flow[node][nxt] -= 1
                if nxt == _SINK:
                    break
                path.append(nxt[1])
                node = ("out", nxt[1])
            paths.append(tuple(path))
        return Routing(paths=paths)

    def is_linked(self, rep: Representation, x: Iterable[int]) -> bool:
        x = list(x)
        return self._linked(self._network(rep), x) == len(x)

    def _check_caps(self, rep: Representation) -> None:
        if len(rep.ground) > settings.MAX_GROUND_SIZE:
            raise SizeExceededError(len(rep.ground), settings.MAX_GROUND_SIZE)
        if rep.vertex_count > settings.MAX_ORACLE_VERTICES:
            raise SizeExceededError(rep.vertex_count, settings.MAX_ORACLE_VERTICES, "vertex set")

    def gamma(self, rep: Representation) -> Matroid:
        """
        The gammoid represented by (D, T, E).

        Args:
            rep: Representation; element i of the matroid is vertex rep.ground[i]

        Returns:
            Matroid whose bases are the largest linked subsets of the ground

        Raises:
            SizeExceededError: ground or vertex set over the caps
        """
        self._check_caps(rep)
        network = self._network(rep)
        ground = rep.ground
        rank = self._linked(network, ground)
        bases = [
            mask_of(combo)
            for combo in combinations(range(len(ground)), rank)
            if self._linked(network, [ground[i] for i in combo]) == rank
        ]
        labels = tuple(str(v) for v in ground)
        log_certificate("gamma", f"rank {rank}", size=len(ground), vertices=rep.vertex_count)
        return Matroid(GroundSet(size=len(ground), labels=labels), bases)

    def deflation_extend_representation(
        self, rep: Representation, f1: Iterable[int], e_new: Optional[int] = None
    ) -> Representation:
        """
        Add a vertex with arcs into every vertex of f1 and append it to the ground.

        Args:
            rep: Representation
            f1: Ground vertices the new vertex points to
            e_new: Index of the new vertex; must be the next free vertex index

        Raises:
            InputError: f1 leaves the ground or e_new is already a vertex
        """
        f1 = set(f1)
        n = rep.vertex_count
        if e_new is not None and e_new != n:
            raise InputError(f"new vertex {e_new} must be {n}")
        if not f1 <= set(rep.ground):
            raise InputError("f1 must be a subset of the ground vertices")
        digraph = Digraph(vertex_count=n + 1, arcs=rep.digraph.arcs | {(n, v) for v in f1})
        return Representation(digraph=digraph, targets=rep.targets, ground=rep.ground + (n,))

    def random_gammoid(
        self, seed: int, v_max: int, e_max: int, strict: bool = False
    ) -> Tuple[Representation, Matroid]:
        """
        A reproducible random representation and its gammoid.

        The vertex count is uniform in 1..v_max, about a third of the vertices
        become targets (at least one), arcs appear independently with
        probability 0.35 and the ground is a uniform sample of min(e_max, |V|)
        vertices. With strict, the ground is the whole vertex set.

        Args:
            seed: Seed of the private random stream
            v_max: Largest vertex count
            e_max: Largest ground size
            strict: Use V = E

        Returns:
            (Representation, Matroid)
        """
        if v_max > settings.MAX_ORACLE_VERTICES:
            raise SizeExceededError(v_max, settings.MAX_ORACLE_VERTICES, "vertex set")
        rng = random.Random(seed)
        upper = min(v_max, e_max) if strict else v_max
        if upper <= 0:
            rep = Representation(digraph=Digraph(vertex_count=0))
            return rep, self.gamma(rep)
        n = rng.randint(1, upper)
        vertices = list(range(n))
        target_count = max(1, min(n, round(n / 3 + rng.random())))
        targets = frozenset(rng.sample(vertices, target_count))
        arcs = frozenset(
            (u, v) for u in vertices for v in vertices if u != v and rng.random() < _ARC_DENSITY
        )
        if strict:
            ground = tuple(vertices)
        else:
            ground = tuple(sorted(rng.sample(vertices, min(e_max, n))))
        rep = Representation(digraph=Digraph(vertex_count=n, arcs=arcs), targets=targets, ground=ground)
        return rep, self.gamma(rep)


oracle_service = OracleService()
