"""Unstable links, Morse polynomials and Morse inequalities of simplicial flows.

The Conley index of a vertex ``v`` is the pair (cone on L, L) where L is the
unstable link of ``v``: the faces spanned by the neighbours that ``v`` flows
to.  Its Poincare polynomial is 1 when L is empty and t times the reduced
Poincare polynomial of L otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Sequence

import numpy as np

from .complex import Complex, ComplexError, Face, barycentric_subdivision, face_label
from .flow import BarycentricPoint
from .homology import PolyZ, poincare_polynomial, poly_succeq, torsion
from .orientation import (
    Orientation, OrientationError, orientation_from_function, orientation_from_order,
    validate_orientation,
)


class Verdict(str, Enum):
    REGULAR = "regular"
    CRITICAL = "critical"
    UNKNOWN = "unknown"


def _restricted_link(K: Complex, v: str, targets: list[str], star_restricted: bool) -> Complex:
    if star_restricted:
        keep = [f for f in K.faces
                if set(f) <= set(targets) and K.canonical((*f, v)) in K.face_set]
        used = {u for f in keep for u in f}
        return Complex(tuple(u for u in K.vertices if u in used), tuple(keep))
    return K.full_subcomplex(targets)


def unstable_link(K: Complex, orient: Orientation, v: str, star_restricted: bool = True) -> Complex:
    """Link spanned by the neighbours that ``v`` flows to.

    With ``star_restricted`` (the default) a face A of those neighbours
    counts only when A + {v} is a face of K; otherwise the full subcomplex on
    the neighbours is returned.
    """
    if (v,) not in K.face_set:
        raise ComplexError(f"unknown vertex {v!r}")
    return _restricted_link(K, v, orient.below(v), star_restricted)


def stable_link(K: Complex, orient: Orientation, v: str, star_restricted: bool = True) -> Complex:
    """Link spanned by the neighbours that flow to ``v``."""
    if (v,) not in K.face_set:
        raise ComplexError(f"unknown vertex {v!r}")
    return _restricted_link(K, v, orient.above(v), star_restricted)


def is_cone(L: Complex) -> bool:
    """True when some vertex of ``L`` can be added to every face of ``L``."""
    if L.is_empty:
        return False
    for w in L.vertices:
        if all(L.canonical((*f, w)) in L.face_set for f in L.faces):
            return True
    return False


def greedy_collapse(L: Complex, max_steps: int = 100_000) -> Complex:
    """Repeatedly remove a free face together with its unique coface.

    Faces are tried in canonical order, highest dimension first, so the
    result is deterministic.  The returned complex may still be collapsible
    by a different sequence of moves.
    """
    faces = set(L.faces)
    steps = 0
    changed = True
    while changed and steps < max_steps:
        changed = False
        cofaces: dict[Face, list[Face]] = {}
        for f in faces:
            for g in combinations(f, len(f) - 1):
                if g:
                    cofaces.setdefault(g, []).append(f)
        for g in sorted(cofaces, key=lambda f: (-len(f), f)):
            cs = cofaces[g]
            if len(cs) == 1 and g in faces and cs[0] in faces:
                tau = cs[0]
                if any(tau != h and set(tau) < set(h) for h in cofaces.get(tau, [])):
                    continue
                faces.discard(g)
                faces.discard(tau)
                steps += 1
                changed = True
                break
    used = {u for f in faces for u in f}
    return Complex(tuple(u for u in L.vertices if u in used), tuple(faces))


def contractibility_verdict(L: Complex) -> tuple[Verdict, str]:
    """Decide whether a vertex with unstable link ``L`` is regular.

    Tiers, in order: empty link (a local minimum, critical); cone (regular);
    greedy collapse to a point (regular); nonzero reduced homology
    (critical); anything else is unknown.
    """
    if L.is_empty:
        return Verdict.CRITICAL, "empty"
    if is_cone(L):
        return Verdict.REGULAR, "cone"
    if len(greedy_collapse(L).faces) == 1:
        return Verdict.REGULAR, "collapsible"
    if poincare_polynomial(L, reduced=True) or torsion(L):
        return Verdict.CRITICAL, "homology"
    return Verdict.UNKNOWN, "undecided"


def link_morse_polynomial(L: Complex) -> PolyZ:
    """1 for an empty link, else t times its reduced Poincare polynomial."""
    if L.is_empty:
        return PolyZ([1])
    return poincare_polynomial(L, reduced=True).shift(1)


def morse_polynomial(K: Complex, orient: Orientation, v: str, star_restricted: bool = True) -> PolyZ:
    return link_morse_polynomial(unstable_link(K, orient, v, star_restricted))


@dataclass
class StationaryReport:
    vertex: str
    unstable_link: Complex
    morse_poly: PolyZ
    regular: Verdict
    reason: str

    def to_json(self) -> dict:
        return {
            "vertex": self.vertex,
            "link_f_vector": list(self.unstable_link.f_vector),
            "morse_poly": self.morse_poly.to_list(),
            "regular": self.regular.value,
            "reason": self.reason,
        }


def stationary_report(K: Complex, orient: Orientation, v: str,
                      star_restricted: bool = True) -> StationaryReport:
    L = unstable_link(K, orient, v, star_restricted)
    verdict, reason = contractibility_verdict(L)
    return StationaryReport(v, L, link_morse_polynomial(L), verdict, reason)


@dataclass
class MorseReport:
    vertices: list[StationaryReport]
    sum_poly: PolyZ
    space_poly: PolyZ
    certificate: PolyZ | None
    star_restricted: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.certificate is not None

    def to_json(self) -> dict:
        return {
            "link": "star_restricted" if self.star_restricted else "full_subcomplex",
            "vertices": [r.to_json() for r in self.vertices],
            "sum_poly": self.sum_poly.to_list(),
            "space_poly": self.space_poly.to_list(),
            "Q": None if self.certificate is None else self.certificate.to_list(),
            "ok": self.ok,
        }


def morse_inequalities(K: Complex, orient: Orientation, star_restricted: bool = True) -> MorseReport:
    """Compare the sum of Morse polynomials with the Poincare polynomial of |K|.

    ``certificate`` is the polynomial Q >= 0 with sum = P + (1+t)Q, or None
    when no such Q exists, which would falsify the implementation.
    """
    reps = [stationary_report(K, orient, v, star_restricted) for v in K.vertices]
    total = PolyZ()
    for r in reps:
        total = total + r.morse_poly
    P = poincare_polynomial(K)
    return MorseReport(reps, total, P, poly_succeq(total, P), star_restricted)


@dataclass
class StiefelFlow:
    base: Complex
    subdivision: Complex
    orientation: Orientation
    faces: dict[str, Face]

    def label(self, face: Sequence[str]) -> str:
        return face_label(self.base.canonical(face))


def stiefel_orientation(K: Complex) -> StiefelFlow:
    """Orientation of the barycentric subdivision flowing from b_S to b_T when S > T."""
    if K.is_empty:
        raise ComplexError("the complex is empty")
    DK = barycentric_subdivision(K, 1)
    faces = {face_label(f): f for f in K.faces}
    edges = []
    for a, b in DK.faces_of_dim(1):
        S, T = set(faces[a]), set(faces[b])
        edges.append((a, b) if S > T else (b, a))
    return StiefelFlow(K, DK, validate_orientation(DK, edges), faces)


def normal_star(K: Complex, S: Sequence[str], flow: StiefelFlow | None = None) -> Complex:
    """Subcomplex of the subdivision spanned by barycenters of faces containing S."""
    S = K.canonical(S)
    if S not in K.face_set:
        raise ComplexError(f"{S!r} is not a face")
    flow = flow or stiefel_orientation(K)
    keep = [lab for lab, f in flow.faces.items() if set(S) <= set(f)]
    return flow.subdivision.full_subcomplex(keep)


def to_base_point(flow: StiefelFlow, p: BarycentricPoint) -> BarycentricPoint:
    """Express a point of the subdivision in barycentric coordinates of the base."""
    w: dict[str, float] = {}
    for lab, c in zip(p.carrier, p.coords):
        F = flow.faces[lab]
        for u in F:
            w[u] = w.get(u, 0.0) + c / len(F)
    verts = [u for u in flow.base.vertices if u in w]
    arr = np.array([w[u] for u in verts])
    return BarycentricPoint(tuple(verts), tuple(arr / arr.sum()))


__all__ = [
    "Orientation", "OrientationError", "validate_orientation", "orientation_from_function",
    "orientation_from_order", "Verdict", "unstable_link", "stable_link", "is_cone",
    "greedy_collapse", "contractibility_verdict", "link_morse_polynomial", "morse_polynomial",
    "StationaryReport", "stationary_report", "MorseReport", "morse_inequalities",
    "StiefelFlow", "stiefel_orientation", "normal_star", "to_base_point",
]
