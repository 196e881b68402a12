"""Dynamical orientations: edge relations that linearly order every face."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .complex import Complex, Face


class OrientationError(ValueError):
    def __init__(self, message: str, face: Face | None = None) -> None:
        super().__init__(message)
        self.face = face


@dataclass(frozen=True)
class Orientation:
    """``(u, v)`` in ``edges`` means u flows to v (u is above v)."""

    complex: Complex
    edges: frozenset[tuple[str, str]]

    @cached_property
    def _down(self) -> dict[str, set[str]]:
        d: dict[str, set[str]] = {v: set() for v in self.complex.vertices}
        for u, v in self.edges:
            d[u].add(v)
        return d

    def flows_to(self, u: str, v: str) -> bool:
        return v in self._down[u]

    def below(self, v: str) -> list[str]:
        """Vertices ``u`` with v flowing to u, in complex vertex order."""
        return [u for u in self.complex.vertices if u in self._down[v]]

    def above(self, v: str) -> list[str]:
        return [u for u in self.complex.vertices if v in self._down[u]]

    def order(self, face: Iterable[str]) -> list[str]:
        """Vertices of ``face`` in ascending flow order; the sink comes first."""
        f = list(face)
        return sorted(f, key=lambda u: sum(w in self._down[u] for w in f))

    def reversed(self) -> "Orientation":
        return Orientation(self.complex, frozenset((v, u) for u, v in self.edges))

    def to_json(self) -> dict:
        return {"edges": [list(e) for e in sorted(self.edges)]}


def validate_orientation(K: Complex, edges: Iterable[Iterable[str]]) -> Orientation:
    """Check that ``edges`` restricts to a strict linear order on every face."""
    E: set[tuple[str, str]] = set()
    for e in edges:
        u, v = (str(x) for x in e)
        if K.canonical((u, v)) not in K.face_set or u == v:
            raise OrientationError(f"{u}->{v} is not an edge of the complex")
        E.add((u, v))
    for u, v in E:
        if (v, u) in E:
            raise OrientationError(f"edge {{{u},{v}}} is oriented both ways", K.canonical((u, v)))
    O = Orientation(K, frozenset(E))
    # a tournament on a face is a linear order iff its out-degrees are distinct
    for f in K.facets:
        for a in range(len(f)):
            for b in range(a + 1, len(f)):
                if (f[a], f[b]) not in E and (f[b], f[a]) not in E:
                    raise OrientationError(f"{f[a]} and {f[b]} are not compared", f)
        outdeg = [sum((u, w) in E for w in f) for u in f]
        if len(set(outdeg)) != len(f):
            raise OrientationError(f"orientation has a cycle on face {f!r}", f)
    return O


def orientation_from_function(K: Complex, values: Mapping[str, float]) -> Orientation:
    """u flows to v iff values[u] > values[v], for every edge {u, v}."""
    E = []
    for f in K.faces_of_dim(1):
        u, v = f
        if values[u] > values[v]:
            E.append((u, v))
        elif values[v] > values[u]:
            E.append((v, u))
        else:
            raise OrientationError(f"function takes equal values on edge {f!r}", f)
    return validate_orientation(K, E)


def orientation_from_order(K: Complex, ascending: Iterable[str]) -> Orientation:
    """Orientation induced by a global vertex order (first element is lowest)."""
    rank = {v: i for i, v in enumerate(ascending)}
    return orientation_from_function(K, rank)
