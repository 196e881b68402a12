"""Finite combinatorial simplicial complexes.

A complex is a downward closed family of nonempty vertex sets.  Faces are
stored as tuples sorted by the position of each vertex in ``vertices`` and the
face list itself is kept in a canonical order (dimension first, then vertex
positions), so every construction below is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence


class ComplexError(ValueError):
    """Raised for malformed complexes or faces that do not belong to one."""


Face = tuple[str, ...]


@dataclass(frozen=True)
class Complex:
    vertices: tuple[str, ...]
    faces: tuple[Face, ...]

    def __post_init__(self) -> None:
        if len(set(self.vertices)) != len(self.vertices):
            raise ComplexError("duplicate vertex labels")
        pos = {v: i for i, v in enumerate(self.vertices)}
        canon = set()
        for face in self.faces:
            if not face:
                raise ComplexError("empty face")
            for v in face:
                if v not in pos:
                    raise ComplexError(f"unknown vertex label {v!r}")
            f = tuple(sorted(set(face), key=pos.__getitem__))
            if len(f) != len(face):
                raise ComplexError(f"repeated vertex in face {face!r}")
            if f in canon:
                raise ComplexError(f"duplicate face {face!r}")
            canon.add(f)
        for f in canon:
            if len(f) > 1:
                for g in combinations(f, len(f) - 1):
                    if g not in canon:
                        raise ComplexError(f"face {f!r} is missing its subface {g!r}")
        faces = tuple(sorted(canon, key=lambda f: (len(f), [pos[v] for v in f])))
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "faces", faces)

    @classmethod
    def empty(cls) -> "Complex":
        return cls((), ())

    @cached_property
    def face_set(self) -> frozenset[Face]:
        return frozenset(self.faces)

    @cached_property
    def _pos(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def canonical(self, face: Iterable[str]) -> Face:
        """Sort a vertex collection into the canonical face order."""
        try:
            return tuple(sorted(set(face), key=self._pos.__getitem__))
        except KeyError as exc:
            raise ComplexError(f"unknown vertex label {exc.args[0]!r}") from None

    def __contains__(self, face: object) -> bool:
        if isinstance(face, str):
            return (face,) in self.face_set
        try:
            return self.canonical(face) in self.face_set  # type: ignore[arg-type]
        except ComplexError:
            return False

    def __len__(self) -> int:
        return len(self.faces)

    @property
    def is_empty(self) -> bool:
        return not self.faces

    @cached_property
    def dim(self) -> int:
        """Dimension; -1 for the empty complex."""
        return max((len(f) for f in self.faces), default=0) - 1

    @cached_property
    def f_vector(self) -> tuple[int, ...]:
        counts = [0] * (self.dim + 1)
        for f in self.faces:
            counts[len(f) - 1] += 1
        return tuple(counts)

    @cached_property
    def euler_characteristic(self) -> int:
        return sum((-1) ** i * n for i, n in enumerate(self.f_vector))

    def faces_of_dim(self, k: int) -> list[Face]:
        return [f for f in self.faces if len(f) == k + 1]

    @cached_property
    def facets(self) -> tuple[Face, ...]:
        cofaced = set()
        for f in self.faces:
            for g in combinations(f, len(f) - 1):
                cofaced.add(g)
        return tuple(f for f in self.faces if f not in cofaced)

    def skeleton(self, k: int) -> "Complex":
        return Complex(self.vertices, tuple(f for f in self.faces if len(f) <= k + 1))

    def full_subcomplex(self, selected: Iterable[str]) -> "Complex":
        """The subcomplex of all faces whose vertices lie in ``selected``."""
        sel = set(selected)
        unknown = sel - set(self.vertices)
        if unknown:
            raise ComplexError(f"unknown vertices {sorted(unknown)!r}")
        verts = tuple(v for v in self.vertices if v in sel)
        return Complex(verts, tuple(f for f in self.faces if sel.issuperset(f)))

    def is_subcomplex_of(self, other: "Complex") -> bool:
        return set(self.vertices) <= set(other.vertices) and all(
            other.canonical(f) in other.face_set for f in self.faces
        )

    def neighbors(self, v: str) -> list[str]:
        if (v,) not in self.face_set:
            raise ComplexError(f"unknown vertex {v!r}")
        adj = {u for f in self.faces if len(f) == 2 and v in f for u in f if u != v}
        return [u for u in self.vertices if u in adj]

    def relabel(self, mapping: dict[str, str]) -> "Complex":
        verts = tuple(mapping.get(v, v) for v in self.vertices)
        return Complex(verts, tuple(tuple(mapping.get(v, v) for v in f) for f in self.faces))

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "facets": [list(f) for f in self.facets],
            "faces": [list(f) for f in self.faces],
            "f_vector": list(self.f_vector),
        }


def validate_complex(facets: Sequence[Sequence[str]],
                     vertices: Sequence[str] | None = None) -> Complex:
    """Build the complex generated by ``facets``.

    Vertex labels are coerced to strings.  When ``vertices`` is omitted the
    vertex order is the order of first appearance in ``facets``.
    """
    facets = [[str(v) for v in f] for f in facets]
    if vertices is None:
        seen: dict[str, None] = {}
        for f in facets:
            for v in f:
                seen.setdefault(v, None)
        vertices = list(seen)
    else:
        vertices = [str(v) for v in vertices]
    declared = set(vertices)
    faces: set[frozenset[str]] = {frozenset([v]) for v in vertices}
    for f in facets:
        if not f:
            raise ComplexError("empty facet")
        for v in f:
            if v not in declared:
                raise ComplexError(f"unknown vertex label {v!r}")
        fs = frozenset(f)
        if len(fs) != len(f):
            raise ComplexError(f"repeated vertex in facet {f!r}")
        for r in range(1, len(fs) + 1):
            faces.update(frozenset(c) for c in combinations(sorted(fs), r))
    return Complex(tuple(vertices), tuple(tuple(f) for f in faces))


def simplex(n: int, prefix: str = "v") -> Complex:
    """The full n-simplex on vertices v0..vn."""
    return validate_complex([[f"{prefix}{i}" for i in range(n + 1)]])


def simplex_boundary(n: int, prefix: str = "v") -> Complex:
    """The boundary of the n-simplex, a triangulated (n-1)-sphere."""
    verts = [f"{prefix}{i}" for i in range(n + 1)]
    if n == 0:
        raise ComplexError("the boundary of a point is empty")
    return validate_complex([list(c) for c in combinations(verts, n)], verts)


def combinatorial_closure(K: Complex, faces: Iterable[Iterable[str]]) -> Complex:
    """Smallest subcomplex of ``K`` containing every face in ``faces``."""
    gens = []
    for f in faces:
        cf = K.canonical(f)
        if cf not in K.face_set:
            raise ComplexError(f"{cf!r} is not a face")
        gens.append(set(cf))
    keep = [f for f in K.faces if any(g.issuperset(f) for g in gens)]
    used = {v for f in keep for v in f}
    return Complex(tuple(v for v in K.vertices if v in used), tuple(keep))


def star_and_link(K: Complex, v: str) -> tuple[Complex, Complex]:
    """Combinatorial star and link as full subcomplexes on S(v) and L(v).

    This is the literal full-subcomplex definition; it can be strictly larger
    than the closed star (see :func:`closed_star`).
    """
    link_verts = K.neighbors(v)
    return K.full_subcomplex([v, *link_verts]), K.full_subcomplex(link_verts)


def closed_star(K: Complex, v: str) -> Complex:
    """Union of the closed faces through ``v``."""
    if (v,) not in K.face_set:
        raise ComplexError(f"unknown vertex {v!r}")
    return combinatorial_closure(K, [f for f in K.faces if v in f])


def geometric_link(K: Complex, v: str) -> Complex:
    """Faces ``A`` not containing ``v`` with ``A + {v}`` a face."""
    if (v,) not in K.face_set:
        raise ComplexError(f"unknown vertex {v!r}")
    keep = [f for f in K.faces if v not in f and K.canonical((*f, v)) in K.face_set]
    used = {u for f in keep for u in f}
    return Complex(tuple(u for u in K.vertices if u in used), tuple(keep))


def _disjoint_pair(K1: Complex, K2: Complex) -> tuple[Complex, Complex]:
    if set(K1.vertices).isdisjoint(K2.vertices):
        return K1, K2
    return (K1.relabel({v: f"{v}·L" for v in K1.vertices}),
            K2.relabel({v: f"{v}·R" for v in K2.vertices}))


def join(K1: Complex, K2: Complex) -> Complex:
    """Join: faces F1 | F2 with F_i a face of K_i or empty.

    On a vertex label clash all labels of ``K1`` get the suffix ``·L`` and
    all labels of ``K2`` the suffix ``·R``.
    """
    A, B = _disjoint_pair(K1, K2)
    faces = list(A.faces) + list(B.faces)
    faces += [a + b for a in A.faces for b in B.faces]
    return Complex(A.vertices + B.vertices, tuple(faces))


def point(label: str = "p") -> Complex:
    return Complex((label,), ((label,),))


def cone(K: Complex, apex: str = "apex") -> Complex:
    while apex in K.vertices:
        apex = f"{apex}·apex"
    return join(K, point(apex))


def sphere0(north: str = "N", south: str = "S") -> Complex:
    return Complex((north, south), ((north,), (south,)))


def suspension(K: Complex, n: int = 1) -> Complex:
    """n-fold suspension; the i-th pair of poles is labelled Ni / Si."""
    if n < 0:
        raise ComplexError("suspension count must be nonnegative")
    out = K
    for i in range(1, n + 1):
        north, south = f"N{i}", f"S{i}"
        while north in out.vertices or south in out.vertices:
            north, south = f"{north}'", f"{south}'"
        out = join(out, sphere0(north, south))
    return out


def face_label(face: Sequence[str]) -> str:
    """Vertex label used for the barycenter of ``face``."""
    return "(" + ",".join(face) + ")"


def chains(elements: Sequence[str], less: dict[str, set[str]]) -> list[tuple[str, ...]]:
    """All nonempty chains of a finite poset, each listed bottom to top.

    ``less[x]`` is the set of elements strictly above ``x``.
    """
    out: list[tuple[str, ...]] = []

    def grow(chain: tuple[str, ...]) -> None:
        out.append(chain)
        for y in elements:
            if y in less[chain[-1]]:
                grow(chain + (y,))

    for x in elements:
        grow((x,))
    return out


def barycentric_subdivision(K: Complex, n: int = 1) -> Complex:
    """n-th barycentric subdivision: the nerve of the face poset, iterated.

    The barycenter of a face ``F`` is the vertex ``face_label(F)``.
    """
    if n < 1:
        raise ComplexError("subdivision count must be at least 1")
    out = K
    for _ in range(n):
        labels = [face_label(f) for f in out.faces]
        sets = {face_label(f): set(f) for f in out.faces}
        above = {a: {b for b in labels if sets[a] < sets[b]} for a in labels}
        out = Complex(tuple(labels), tuple(chains(labels, above)))
    return out


def nerve(P) -> Complex:
    """Order complex of a finite poset: faces are the nonempty chains.

    ``P`` is any object with ``elements`` and ``above(x)`` (the strict upper
    set of ``x``), e.g. :class:`tameflows.poset.Poset`.
    """
    elements = list(P.elements)
    above = {x: set(P.above(x)) for x in elements}
    return Complex(tuple(elements), tuple(chains(elements, above)))
