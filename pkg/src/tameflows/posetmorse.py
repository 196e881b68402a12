"""Morse theory for functions on finite posets and face posets of regular CW complexes.

For a function f on a poset P with distinct values on comparable elements,
the violations of x are

    V+(x) = {y > x : f(x) > f(y)},   V-(x) = {z < x : f(z) > f(x)},

and S+-(x) is V+-(x) with x added.  A violation pair is x < y with
f(x) > f(y).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .complex import Complex, face_label, nerve
from .conley import Verdict, contractibility_verdict, link_morse_polynomial
from .homology import PolyZ, poincare_polynomial, poly_succeq


class PosetError(ValueError):
    """Malformed poset, face poset or function."""


class _SubPoset:
    def __init__(self, P: "Poset", elements: Iterable[str]) -> None:
        keep = set(elements)
        self.elements = [x for x in P.elements if x in keep]
        self._above = {x: P.above(x) & keep for x in self.elements}

    def above(self, x: str) -> set[str]:
        return self._above[x]


@dataclass(frozen=True)
class Poset:
    """Finite poset given by its cover relation; ``(a, b)`` means b covers a."""

    elements: tuple[str, ...]
    covers: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(str(x) for x in self.elements))
        if len(set(self.elements)) != len(self.elements):
            raise PosetError("duplicate elements")
        known = set(self.elements)
        for a, b in self.covers:
            if a not in known or b not in known:
                raise PosetError(f"cover ({a}, {b}) uses an unknown element")
            if a == b:
                raise PosetError(f"{a} cannot cover itself")
        up = self._above
        for x in self.elements:
            if x in up[x]:
                raise PosetError(f"cover relation has a cycle through {x}")
        for a, b in self.covers:
            if any(b in up[c] for c in up[a] if c != b):
                raise PosetError(f"cover ({a}, {b}) is implied by other covers")

    @classmethod
    def from_covers(cls, elements: Iterable, covers: Iterable[Sequence]) -> "Poset":
        return cls(tuple(str(x) for x in elements), frozenset((str(a), str(b)) for a, b in covers))

    @classmethod
    def from_relation(cls, elements: Iterable, less: Iterable[Sequence]) -> "Poset":
        """Build from any set of pairs a < b; the covers are its transitive reduction."""
        elements = [str(x) for x in elements]
        up: dict[str, set[str]] = {x: set() for x in elements}
        for a, b in less:
            up[str(a)].add(str(b))
        changed = True
        while changed:
            changed = False
            for x in elements:
                extra = set().union(*(up[y] for y in up[x])) - up[x] if up[x] else set()
                if extra:
                    up[x] |= extra
                    changed = True
        for x in elements:
            if x in up[x]:
                raise PosetError(f"relation has a cycle through {x}")
        covers = {(a, b) for a in elements for b in up[a]
                  if not any(b in up[c] for c in up[a])}
        return cls(tuple(elements), frozenset(covers))

    @cached_property
    def _above(self) -> dict[str, set[str]]:
        succ: dict[str, set[str]] = {x: set() for x in self.elements}
        for a, b in self.covers:
            succ[a].add(b)
        up: dict[str, set[str]] = {}
        for x in self.elements:
            seen: set[str] = set()
            stack = list(succ[x])
            while stack:
                y = stack.pop()
                if y not in seen:
                    seen.add(y)
                    stack.extend(succ[y])
            up[x] = seen
        return up

    def above(self, x: str) -> set[str]:
        """Strict upper set of ``x``."""
        return set(self._above[x])

    def below(self, x: str) -> set[str]:
        return {y for y in self.elements if x in self._above[y]}

    def less(self, x: str, y: str) -> bool:
        return y in self._above[x]

    def leq(self, x: str, y: str) -> bool:
        return x == y or self.less(x, y)

    def comparable(self, x: str, y: str) -> bool:
        return self.leq(x, y) or self.leq(y, x)

    def sub(self, elements: Iterable[str]) -> "_SubPoset":
        return _SubPoset(self, elements)

    def induced(self, elements: Iterable[str]) -> "Poset":
        keep = [x for x in self.elements if x in set(elements)]
        pairs = [(a, b) for a in keep for b in keep if self.less(a, b)]
        return Poset.from_relation(keep, pairs)

    def is_ideal(self, elements: Iterable[str]) -> bool:
        s = set(elements)
        return all(self.below(x) <= s for x in s)

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "covers": [list(c) for c in sorted(self.covers)]}


def interval(P: Poset, x: str, y: str) -> set[str]:
    """The closed interval [x, y]."""
    if not P.leq(x, y):
        raise PosetError(f"{x} is not below {y}")
    return {z for z in P.elements if P.leq(x, z) and P.leq(z, y)}


def longest_chain(P: Poset, x: str, y: str) -> int:
    """Length (number of steps) of a longest chain from x to y."""
    if not P.leq(x, y):
        raise PosetError(f"{x} is not below {y}")
    memo: dict[str, int] = {y: 0}

    def depth(z: str) -> int:
        if z not in memo:
            memo[z] = 1 + max(depth(w) for w in P.above(z) if P.leq(w, y))
        return memo[z]

    return depth(x)


def check_admissible(P: Poset, f: Mapping[str, float]) -> dict[str, float]:
    missing = [x for x in P.elements if x not in f]
    if missing:
        raise PosetError(f"function is missing values for {missing!r}")
    vals = {x: float(f[x]) for x in P.elements}
    for x in P.elements:
        for y in P.above(x):
            if vals[x] == vals[y]:
                raise PosetError(f"comparable elements {x} < {y} share the value {vals[x]}")
    return vals


def violation_sets(P: Poset, f: Mapping[str, float], x: str) -> tuple[set[str], set[str]]:
    vals = check_admissible(P, f)
    vp = {y for y in P.above(x) if vals[x] > vals[y]}
    vm = {z for z in P.below(x) if vals[z] > vals[x]}
    return vp, vm


def violation_pairs(P: Poset, f: Mapping[str, float]) -> list[tuple[str, str]]:
    vals = check_admissible(P, f)
    return [(x, y) for x in P.elements for y in P.elements
            if P.less(x, y) and vals[x] > vals[y]]


@dataclass
class Coherence:
    coherent: bool
    omega: int
    failures: list[tuple[str, str]] = field(default_factory=list)


def coherence(P: Poset, f: Mapping[str, float]) -> Coherence:
    """Coherence and order of ``f``.

    ``f`` is coherent when it reverses the order on every violation interval
    [x, y]: u < v inside the interval forces f(u) > f(v).  The order omega is
    the largest length of a violation interval (0 when there is none).
    """
    vals = check_admissible(P, f)
    omega = 0
    bad = []
    for x, y in violation_pairs(P, vals):
        I = interval(P, x, y)
        if any(vals[u] <= vals[v] for u in I for v in I if P.less(u, v)):
            bad.append((x, y))
        omega = max(omega, longest_chain(P, x, y))
    return Coherence(not bad, omega, bad)


@dataclass
class CCondition:
    c_plus: dict[str, str | None]
    c_minus: dict[str, str | None]

    @property
    def plus_ok(self) -> bool:
        return all(v is not None for v in self.c_plus.values())

    @property
    def minus_ok(self) -> bool:
        return all(v is not None for v in self.c_minus.values())

    @property
    def ok(self) -> bool:
        return self.plus_ok and self.minus_ok


def c_plus_minus(P: Poset, f: Mapping[str, float]) -> CCondition:
    """For every x find C+(x) with S+(x) = [x, C+(x)] and C-(x) with S-(x) = [C-(x), x].

    A missing interval is reported as ``None``.
    """
    vals = check_admissible(P, f)
    cp: dict[str, str | None] = {}
    cm: dict[str, str | None] = {}
    for x in P.elements:
        vp, vm = violation_sets(P, vals, x)
        sp, sm = vp | {x}, vm | {x}
        tops = [y for y in sp if not (P.above(y) & sp)]
        cp[x] = tops[0] if len(tops) == 1 and interval(P, x, tops[0]) == sp else None
        bots = [z for z in sm if not (P.below(z) & sm)]
        cm[x] = bots[0] if len(bots) == 1 and interval(P, bots[0], x) == sm else None
    return CCondition(cp, cm)


def _nerve_of(P: Poset, elements: Iterable[str]) -> Complex:
    return nerve(P.sub(elements))


@dataclass
class RegularityReport:
    element: str
    verdict: Verdict
    plus: str
    minus: str


def regular_points(P: Poset, f: Mapping[str, float]) -> dict[str, RegularityReport]:
    """x is regular when V+(x) or P_{<x} minus V-(x) has a contractible nerve."""
    vals = check_admissible(P, f)
    out = {}
    for x in P.elements:
        vp, vm = violation_sets(P, vals, x)
        a, ra = contractibility_verdict(_nerve_of(P, vp))
        b, rb = contractibility_verdict(_nerve_of(P, P.below(x) - vm))
        if Verdict.REGULAR in (a, b):
            v = Verdict.REGULAR
        elif a is Verdict.CRITICAL and b is Verdict.CRITICAL:
            v = Verdict.CRITICAL
        else:
            v = Verdict.UNKNOWN
        out[x] = RegularityReport(x, v, ra, rb)
    return out


def poset_unstable_link(P: Poset, f: Mapping[str, float], x: str) -> Complex:
    """Nerve of the elements comparable to x with smaller value: V+(x) and P_{<x} minus V-(x).

    This is the unstable link of x for the flow on the nerve of P oriented
    by decreasing ``f``.
    """
    vp, vm = violation_sets(P, f, x)
    return _nerve_of(P, vp | (P.below(x) - vm))


def poset_morse_polynomial(P: Poset, f: Mapping[str, float], x: str) -> PolyZ:
    return link_morse_polynomial(poset_unstable_link(P, f, x))


@dataclass(frozen=True)
class CWFacePoset:
    """Face poset of a regular CW complex: order, dimensions and meets."""

    poset: Poset
    dim: Mapping[str, int]
    meets: Mapping[frozenset, str]

    @classmethod
    def build(cls, poset: Poset, dim: Mapping[str, int],
              meets: Iterable[Sequence[str]] | None = None) -> "CWFacePoset":
        """Validate grading and meets.

        ``meets`` lists triples (a, b, a^b); a pair that is absent has no
        common lower bound.  When ``meets`` is None the greatest lower bounds
        are computed.
        """
        dim = {str(k): int(v) for k, v in dim.items()}
        for x in poset.elements:
            if x not in dim:
                raise PosetError(f"missing dimension for {x}")
        for a, b in poset.covers:
            if dim[b] <= dim[a]:
                raise PosetError(f"dimension does not increase along the cover {a} < {b}")
        glb = _meets(poset)
        if meets is None:
            table = glb
        else:
            table = {}
            for a, b, c in meets:
                key = frozenset((str(a), str(b)))
                if glb.get(key) != str(c):
                    raise PosetError(f"meet of {a} and {b} is not {c}")
                table[key] = str(c)
            for key, c in glb.items():
                if key not in table and len(key) == 2:
                    raise PosetError(f"meet of {sorted(key)} is missing although they meet")
        return cls(poset, dim, table)

    def meet(self, a: str, b: str) -> str | None:
        if a == b:
            return a
        return self.meets.get(frozenset((a, b)))

    def meet_all(self, items: Sequence[str]) -> str | None:
        cur: str | None = items[0]
        for y in items[1:]:
            if cur is None:
                return None
            cur = self.meet(cur, y)
        return cur


def _meets(P: Poset) -> dict[frozenset, str]:
    out = {}
    for a, b in combinations(P.elements, 2):
        low = (P.below(a) | {a}) & (P.below(b) | {b})
        if not low:
            continue
        tops = [z for z in low if not (P.above(z) & low)]
        if len(tops) != 1:
            raise PosetError(f"{a} and {b} have no greatest lower bound")
        out[frozenset((a, b))] = tops[0]
    return out


def face_poset(K: Complex) -> CWFacePoset:
    """Face poset of a simplicial complex, labelled by :func:`face_label`."""
    labels = [face_label(f) for f in K.faces]
    covers = [(face_label(g), face_label(f)) for f in K.faces for g in combinations(f, len(f) - 1) if g]
    P = Poset.from_covers(labels, covers)
    return CWFacePoset.build(P, {face_label(f): len(f) - 1 for f in K.faces})


def mplus_complex(FP: CWFacePoset, f: Mapping[str, float], F: str) -> Complex:
    """Nerve of the cover of V+(F) by the down-sets of its maximal elements.

    The maximal elements T_1..T_k of V+(F) span a face when their iterated
    meet exists and still lies in V+(F).  For a coherent f this is the same
    as the meet being strictly above F.
    """
    P = FP.poset
    vp, _ = violation_sets(P, f, F)
    tops = [y for y in P.elements if y in vp and not (P.above(y) & vp)]
    faces: set[tuple[str, ...]] = {(t,) for t in tops}
    for r in range(2, len(tops) + 1):
        grew = False
        for c in combinations(tops, r):
            if all(s in faces for s in combinations(c, r - 1)):
                m = FP.meet_all(list(c))
                if m is not None and m in vp:
                    faces.add(c)
                    grew = True
        if not grew:
            break
    return Complex(tuple(tops), tuple(faces))


@dataclass
class CMinusReport:
    polys: dict[str, PolyZ]
    critical: list[str]
    sum1: PolyZ
    certificate1: PolyZ | None
    sum2: PolyZ | None
    certificate2: PolyZ | None
    space_poly: PolyZ

    @property
    def ok(self) -> bool:
        return self.certificate1 is not None and (self.sum2 is None or self.certificate2 is not None)

    def to_json(self) -> dict:
        return {
            "polys": {k: v.to_list() for k, v in self.polys.items()},
            "critical": self.critical,
            "sum1": self.sum1.to_list(),
            "Q1": None if self.certificate1 is None else self.certificate1.to_list(),
            "sum2": None if self.sum2 is None else self.sum2.to_list(),
            "Q2": None if self.certificate2 is None else self.certificate2.to_list(),
            "space_poly": self.space_poly.to_list(),
            "ok": self.ok,
        }


def cminus_morse_report(FP: CWFacePoset, f: Mapping[str, float],
                        space_poly: PolyZ | None = None) -> CMinusReport:
    """Morse polynomials of the faces fixed by C- and both Morse inequalities.

    A face with F = C-(F) contributes t^{dim F + 1} times the reduced
    Poincare polynomial of M+(F), read as t^{dim F} when M+(F) is empty;
    other faces contribute 0.  ``space_poly`` defaults to the Poincare
    polynomial of the nerve of the face poset.  The second inequality, over
    faces fixed by both C+ and C-, is checked only when f satisfies C+.
    """
    P = FP.poset
    vals = check_admissible(P, f)
    cc = c_plus_minus(P, vals)
    if not cc.minus_ok:
        bad = sorted(x for x, v in cc.c_minus.items() if v is None)
        raise PosetError(f"f violates C- at {bad!r}")
    if space_poly is None:
        space_poly = poincare_polynomial(nerve(P))
    polys: dict[str, PolyZ] = {}
    critical = []
    total = PolyZ()
    for x in P.elements:
        if cc.c_minus[x] != x:
            polys[x] = PolyZ()
            continue
        M = mplus_complex(FP, vals, x)
        if M.is_empty:
            p = PolyZ.monomial(FP.dim[x])
        else:
            p = poincare_polynomial(M, reduced=True).shift(FP.dim[x] + 1)
        polys[x] = p
        if p:
            critical.append(x)
        total = total + p
    sum2 = cert2 = None
    if cc.plus_ok:
        sum2 = PolyZ()
        for x in P.elements:
            if cc.c_minus[x] == x and cc.c_plus[x] == x:
                sum2 = sum2 + PolyZ.monomial(FP.dim[x])
        cert2 = poly_succeq(sum2, space_poly)
    return CMinusReport(polys, critical, total, poly_succeq(total, space_poly),
                        sum2, cert2, space_poly)


__all__ = [
    "PosetError", "Poset", "interval", "longest_chain", "check_admissible", "violation_sets",
    "violation_pairs", "Coherence", "coherence", "CCondition", "c_plus_minus",
    "RegularityReport", "regular_points", "poset_unstable_link", "poset_morse_polynomial",
    "CWFacePoset", "face_poset", "mplus_complex", "CMinusReport", "cminus_morse_report",
]
