"""
Digraph, gammoid representation and routing models.
"""

from typing import FrozenSet, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Digraph(BaseModel):
    """Directed graph on vertices 0..vertex_count-1; loops allowed."""

    model_config = ConfigDict(frozen=True)

    vertex_count: int = Field(..., ge=0, description="Number of vertices")
    arcs: FrozenSet[Tuple[int, int]] = Field(default=frozenset(), description="Ordered pairs (u, v)")

    @model_validator(mode="after")
    def check_arcs(self):
        for u, v in self.arcs:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"arc ({u}, {v}) leaves the vertex set")
        return self

    def successors(self, u: int) -> List[int]:
        return sorted(v for (a, v) in self.arcs if a == u)


class Representation(BaseModel):
    """A triple (D, T, E): digraph, target vertices and ground vertices."""

    model_config = ConfigDict(frozen=True)

    digraph: Digraph
    targets: FrozenSet[int] = Field(default=frozenset(), description="Target set T")
    ground: Tuple[int, ...] = Field(default=(), description="Ground vertices E, in element order")

    @model_validator(mode="after")
    def check_subsets(self):
        n = self.digraph.vertex_count
        if any(not 0 <= t < n for t in self.targets):
            raise ValueError("targets must be vertices")
        if any(not 0 <= e < n for e in self.ground):
            raise ValueError("ground elements must be vertices")
        if len(set(self.ground)) != len(self.ground):
            raise ValueError("ground vertices must be distinct")
        return self

    @property
    def vertex_count(self) -> int:
        return self.digraph.vertex_count


class Routing(BaseModel):
    """A family of paths, each a vertex sequence."""

    paths: List[Tuple[int, ...]] = Field(default_factory=list)
