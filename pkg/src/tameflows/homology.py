"""Integer simplicial homology, Poincare polynomials and the order on Z[t]."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .complex import Complex, ComplexError


@dataclass
class IntMatrix:
    rows: int
    cols: int
    entries: list[list[int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.entries:
            self.entries = [[0] * self.cols for _ in range(self.rows)]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        rows = [[int(x) for x in r] for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        return cls(len(rows), ncols, rows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = IntMatrix(self.rows, other.cols)
        for i in range(self.rows):
            ri = self.entries[i]
            for k, a in enumerate(ri):
                if a:
                    ok = other.entries[k]
                    oi = out.entries[i]
                    for j in range(other.cols):
                        oi[j] += a * ok[j]
        return out

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)


class PolyZ:
    """Integer polynomial; ``coeffs[i]`` is the coefficient of t**i."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int] = ()) -> None:
        c = [int(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[int, ...] = tuple(c)

    @classmethod
    def monomial(cls, degree: int, coeff: int = 1) -> "PolyZ":
        if degree < 0:
            raise ValueError("negative degree")
        return cls([0] * degree + [coeff])

    @property
    def degree(self) -> float:
        return len(self.coeffs) - 1 if self.coeffs else float("-inf")

    def __getitem__(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __add__(self, other: "PolyZ | int") -> "PolyZ":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyZ(self[i] + other[i] for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "PolyZ":
        return PolyZ(-c for c in self.coeffs)

    def __sub__(self, other: "PolyZ | int") -> "PolyZ":
        return self + (-_as_poly(other))

    def __rsub__(self, other: "PolyZ | int") -> "PolyZ":
        return _as_poly(other) - self

    def __mul__(self, other: "PolyZ | int") -> "PolyZ":
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return PolyZ()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyZ(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "PolyZ":
        """Multiply by t**k; negative k is allowed when it divides evenly."""
        if k >= 0:
            return PolyZ([0] * k + list(self.coeffs))
        if any(self.coeffs[: -k]):
            raise ValueError("shift would produce negative powers")
        return PolyZ(self.coeffs[-k:])

    def __call__(self, t: float) -> float:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = PolyZ([other])
        return isinstance(other, PolyZ) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def nonnegative(self) -> bool:
        return all(c >= 0 for c in self.coeffs)

    def to_list(self) -> list[int]:
        return list(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}{mono}"
            terms.append(("-" if c < 0 else "+", body))
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            s += f" {sign} {body}"
        return s


def _as_poly(x: "PolyZ | int") -> PolyZ:
    return x if isinstance(x, PolyZ) else PolyZ([x])


def boundary_matrices(K: Complex) -> list[IntMatrix]:
    """``result[k]`` is the boundary map C_k -> C_{k-1} for k >= 1.

    ``result[0]`` is the zero map out of C_0.  Faces are oriented by the
    canonical vertex order; deleting the i-th vertex carries sign (-1)**i.
    """
    return _boundaries(K, exclude=frozenset())


def _boundaries(K: Complex, exclude: frozenset) -> list[IntMatrix]:
    by_dim = [[f for f in K.faces_of_dim(k) if f not in exclude] for k in range(K.dim + 1)]
    index = [{f: i for i, f in enumerate(fs)} for fs in by_dim]
    mats = [IntMatrix(0, len(by_dim[0]) if by_dim else 0)]
    for k in range(1, K.dim + 1):
        m = IntMatrix(len(by_dim[k - 1]), len(by_dim[k]))
        for j, f in enumerate(by_dim[k]):
            for i in range(len(f)):
                g = f[:i] + f[i + 1:]
                row = index[k - 1].get(g)
                if row is not None:
                    m.entries[row][j] = (-1) ** i
        mats.append(m)
    return mats


def smith_normal_form(M: IntMatrix | Sequence[Sequence[int]]) -> tuple[list[int], int]:
    """Invariant factors d1 | d2 | ... | dr (all positive) and the rank r."""
    if not isinstance(M, IntMatrix):
        M = IntMatrix.from_rows(M)
    A = [row[:] for row in M.entries]
    m, n = M.rows, M.cols
    diag: list[int] = []
    t = 0
    while t < min(m, n):
        # smallest nonzero pivot in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                a = A[i][j]
                if a and (best is None or abs(a) < best[0]):
                    best = (abs(a), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        A[t], A[pi] = A[pi], A[t]
        if pj != t:
            for row in A:
                row[t], row[pj] = row[pj], row[t]
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // p
                    if q:
                        rt, ri = A[t], A[i]
                        for j in range(t, n):
                            ri[j] -= q * rt[j]
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // p
                    if q:
                        for i in range(t, m):
                            A[i][j] -= q * A[i][t]
                    if A[t][j]:
                        dirty = True
            if dirty:
                # a smaller remainder sits in row/column t; move it to the pivot
                best = (abs(p), t, t)
                for i in range(t + 1, m):
                    if A[i][t] and abs(A[i][t]) < best[0]:
                        best = (abs(A[i][t]), i, t)
                for j in range(t + 1, n):
                    if A[t][j] and abs(A[t][j]) < best[0]:
                        best = (abs(A[t][j]), t, j)
                _, bi, bj = best
                if bi != t:
                    A[t], A[bi] = A[bi], A[t]
                if bj != t:
                    for row in A:
                        row[t], row[bj] = row[bj], row[t]
                continue
            # pivot must divide the rest of the block
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            rt, rb = A[t], A[bad]
            for j in range(t, n):
                rt[j] += rb[j]
        diag.append(abs(A[t][t]))
        t += 1
    return diag, len(diag)


def _rank(M: IntMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return smith_normal_form(M)[1]


def betti_numbers(K: Complex) -> list[int]:
    """Rational Betti numbers b_0..b_dim (empty list for the empty complex)."""
    return _betti_from(_boundaries(K, frozenset()), K)


def _betti_from(mats: list[IntMatrix], K: Complex) -> list[int]:
    if K.is_empty:
        return []
    ranks = [_rank(m) for m in mats] + [0]
    sizes = [m.cols for m in mats]
    return [sizes[k] - ranks[k] - ranks[k + 1] for k in range(len(sizes))]


def torsion(K: Complex) -> dict[int, list[int]]:
    """Torsion coefficients of H_k(K; Z), keyed by degree (diagnostic only)."""
    out = {}
    for k, m in enumerate(boundary_matrices(K)):
        if k == 0 or m.rows == 0 or m.cols == 0:
            continue
        tors = [d for d in smith_normal_form(m)[0] if d > 1]
        if tors:
            out[k - 1] = tors
    return out


def poincare_polynomial(K: Complex, reduced: bool = False) -> PolyZ:
    if reduced and K.is_empty:
        raise ComplexError("reduced Poincare polynomial of the empty complex is undefined")
    b = betti_numbers(K)
    if reduced:
        b[0] -= 1
    return PolyZ(b)


def pair_poincare_polynomial(K: Complex, L: Complex) -> PolyZ:
    """Poincare polynomial of the pair (K, L) via the quotient chain complex."""
    if not L.is_subcomplex_of(K):
        raise ComplexError("L is not a subcomplex of K")
    excl = frozenset(K.canonical(f) for f in L.faces)
    mats = _boundaries(K, excl)
    ranks = [_rank(m) for m in mats] + [0]
    sizes = [m.cols for m in mats]
    return PolyZ(sizes[k] - ranks[k] - ranks[k + 1] for k in range(len(sizes)))


def poly_succeq(A: PolyZ, B: PolyZ) -> PolyZ | None:
    """Return Q >= 0 with A = B + (1+t)Q, or None when no such Q exists."""
    d = list((A - B).coeffs)
    if not d:
        return PolyZ()
    # synthetic division by (t + 1), from the top coefficient down
    q = [0] * (len(d) - 1)
    carry = 0
    for i in range(len(d) - 1, 0, -1):
        carry = d[i] - carry
        q[i - 1] = carry
    if d[0] - carry != 0:
        return None
    Q = PolyZ(q)
    return Q if Q.nonnegative() else None


def euler_from_betti(b: Iterable[int]) -> int:
    return sum((-1) ** i * x for i, x in enumerate(b))


__all__ = [
    "IntMatrix", "PolyZ", "boundary_matrices", "smith_normal_form", "betti_numbers",
    "torsion", "poincare_polynomial", "pair_poincare_polynomial", "poly_succeq",
    "euler_from_betti",
]
