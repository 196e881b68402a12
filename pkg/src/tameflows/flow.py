"""The canonical simplicial flow on ordered simplices and its gluing to complexes.

On an ordered simplex u0 < u1 < ... < uk (u0 is the sink) the flow is the
iterated cone of the one dimensional flow x' = x(x - 1).  Writing a point as
``x * uk + (1 - x) * s`` with ``s`` on the opposite face, the top coordinate
follows the scalar flow and the shadow ``s`` follows the flow of the smaller
simplex.  Everything here evaluates that closed form directly; no ODE solver
is involved.

Arrays of barycentric coordinates are always listed in ascending flow order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .complex import Complex, ComplexError
from .orientation import Orientation


class FlowError(ValueError):
    """Invalid point, ordering or flow request."""


SUM_TOL = 1e-12


@dataclass(frozen=True)
class BarycentricPoint:
    """A point of a geometric realization, given on its carrier face."""

    carrier: tuple[str, ...]
    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        carrier = tuple(str(v) for v in self.carrier)
        coords = tuple(float(c) for c in self.coords)
        if not carrier or len(carrier) != len(coords):
            raise FlowError("carrier and coordinates must be nonempty and of equal length")
        if len(set(carrier)) != len(carrier):
            raise FlowError("repeated vertex in carrier")
        if any(not math.isfinite(c) or c < 0 for c in coords):
            raise FlowError("coordinates must be finite and nonnegative")
        if abs(math.fsum(coords) - 1.0) > SUM_TOL * len(coords):
            raise FlowError(f"coordinates sum to {math.fsum(coords)!r}, not 1")
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def vertex(cls, v: str) -> "BarycentricPoint":
        return cls((v,), (1.0,))

    @classmethod
    def barycenter(cls, face: Sequence[str]) -> "BarycentricPoint":
        n = len(face)
        return cls(tuple(face), (1.0 / n,) * n)

    @classmethod
    def normalized(cls, carrier: Sequence[str], weights: Sequence[float]) -> "BarycentricPoint":
        w = np.asarray(weights, dtype=float)
        if np.any(w <= 0):
            raise FlowError("weights must be positive")
        return cls(tuple(carrier), tuple(w / w.sum()))

    @property
    def support(self) -> tuple[str, ...]:
        """Vertices with a nonzero coordinate (equals the carrier unless underflow)."""
        return tuple(v for v, c in zip(self.carrier, self.coords) if c > 0)

    def coord(self, v: str) -> float:
        try:
            return self.coords[self.carrier.index(v)]
        except ValueError:
            return 0.0

    def as_array(self, vertices: Sequence[str]) -> np.ndarray:
        """Coordinates listed along ``vertices`` (zero off the carrier)."""
        extra = set(self.carrier) - set(vertices)
        if extra:
            raise FlowError(f"carrier vertices {sorted(extra)!r} missing from the frame")
        return np.array([self.coord(v) for v in vertices])

    def require_open(self) -> None:
        if any(c <= 0 for c in self.coords):
            raise FlowError("every carrier coordinate must be strictly positive")

    def to_json(self) -> dict:
        return {"carrier": list(self.carrier), "coords": list(self.coords)}


@dataclass(frozen=True)
class OrderedCarrier:
    """Vertices of a face in ascending flow order; ``vertices[0]`` is the sink."""

    vertices: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if len(set(self.vertices)) != len(self.vertices):
            raise FlowError("repeated vertex in ordered carrier")

    @classmethod
    def from_orientation(cls, orient: Orientation, face: Sequence[str]) -> "OrderedCarrier":
        return cls(tuple(orient.order(face)))

    def consistent_with(self, orient: Orientation) -> bool:
        vs = self.vertices
        return all(orient.flows_to(vs[j], vs[i]) for i in range(len(vs)) for j in range(i + 1, len(vs)))


def _scalar_pair(a, b, t: float):
    """Scalar flow of ``a`` given ``b = 1 - a`` computed separately.

    Returns ``(x, 1 - x)`` with both parts in a cancellation free form.
    """
    if t >= 0:
        e = math.exp(-t)
        den = b + e * a
        return e * a / den, b / den
    e = math.exp(t)
    den = a + e * b
    return a / den, e * b / den


def scalar_flow(a: float, t: float) -> float:
    """Solution at time ``t`` of x' = x(x - 1) started at ``a``.

    Uses the rational form e^{-t} a / (1 - a + e^{-t} a), rewritten for
    negative times so that |t| in the hundreds never overflows.
    """
    a = float(a)
    t = float(t)
    if not (0.0 <= a <= 1.0):
        raise FlowError(f"scalar flow needs a in [0, 1], got {a!r}")
    if not math.isfinite(t):
        raise FlowError("time must be finite")
    return _scalar_pair(a, 1.0 - a, t)[0]


def flow_coords(coords: Sequence[float] | np.ndarray, t: float) -> np.ndarray:
    """Flow barycentric coordinates listed in ascending order u0 < ... < uk.

    Zero coordinates stay exactly zero, so the support is preserved.  The
    complement ``1 - a`` of the top coordinate is taken as the sum of the
    lower coordinates, which keeps full relative precision near a vertex.
    """
    c = np.asarray(coords, dtype=float)
    if not math.isfinite(t):
        raise FlowError("time must be finite")
    out = np.zeros_like(c)
    scale = 1.0
    lower = c.copy()
    for j in range(len(c) - 1, 0, -1):
        a = lower[j]
        b = math.fsum(lower[:j])
        total = a + b
        if total == 0.0 or scale == 0.0:
            break
        x, y = _scalar_pair(a / total, b / total, t)
        out[j] = scale * x
        scale *= y
    else:
        out[0] = scale
        return out
    return out


def simplex_flow(p: BarycentricPoint, order: OrderedCarrier, t: float) -> BarycentricPoint:
    """Flow a point of an ordered simplex whose vertex set equals its carrier."""
    if set(p.carrier) != set(order.vertices):
        raise FlowError("carrier of the point does not match the ordered carrier")
    arr = p.as_array(order.vertices)
    out = flow_coords(arr, t)
    pos = {v: i for i, v in enumerate(order.vertices)}
    coords = [out[pos[v]] for v in p.carrier]
    return BarycentricPoint(p.carrier, _renormalize(coords))


def _renormalize(coords: Sequence[float]) -> tuple[float, ...]:
    s = math.fsum(coords)
    return tuple(c / s for c in coords)


def _check_point(K: Complex, p: BarycentricPoint) -> None:
    if K.canonical(p.carrier) not in K.face_set:
        raise ComplexError(f"carrier {p.carrier!r} is not a face of the complex")
    p.require_open()


def complex_flow(K: Complex, orient: Orientation, p: BarycentricPoint, t: float) -> BarycentricPoint:
    """The glued simplicial flow: the ordered simplex flow on the carrier of ``p``."""
    if orient.complex is not K and orient.complex != K:
        raise FlowError("orientation belongs to a different complex")
    _check_point(K, p)
    return simplex_flow(p, OrderedCarrier.from_orientation(orient, p.carrier), t)


def trajectory(K: Complex, orient: Orientation, p: BarycentricPoint,
               times: Sequence[float]) -> np.ndarray:
    """Rows ``(t, coords...)`` with coordinates along ``K.vertices``."""
    _check_point(K, p)
    order = OrderedCarrier.from_orientation(orient, p.carrier)
    rows = []
    for t in times:
        q = simplex_flow(p, order, float(t))
        rows.append([float(t), *q.as_array(K.vertices)])
    return np.array(rows)


def lyapunov_value(p: BarycentricPoint, lam: Mapping[str, float],
                   order: OrderedCarrier | None = None) -> float:
    """The affine function sum_i lam(v_i) t_i.

    When ``order`` is given, ``lam`` must be strictly increasing along it,
    which makes the value strictly decrease along nonconstant trajectories.
    """
    vals = [float(lam[v]) for v in p.carrier]
    if len(set(vals)) != len(vals):
        raise FlowError("lambda is not injective on the carrier")
    if order is not None:
        seq = [float(lam[v]) for v in order.vertices]
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise FlowError("lambda is not increasing along the flow order")
    return math.fsum(l * c for l, c in zip(vals, p.coords))


def flow_limits(K: Complex, orient: Orientation, p: BarycentricPoint) -> tuple[str, str]:
    """(forward limit, backward limit): the lowest and highest carrier vertex."""
    _check_point(K, p)
    order = orient.order(p.carrier)
    return order[0], order[-1]


@dataclass
class Linearization:
    vertex: str
    face: tuple[str, ...]
    basis: tuple[str, ...]
    matrix: np.ndarray
    eigenvalues: np.ndarray
    rank: int
    t: float

    def expected(self) -> np.ndarray:
        """Predicted spectrum: e^t once per vertex below, e^-t once per vertex above."""
        k = len(self.basis)
        return np.sort(np.array([math.exp(self.t)] * self.rank + [math.exp(-self.t)] * (k - self.rank)))


def vertex_linearization(K: Complex, orient: Orientation, v: str, t: float = 0.1,
                         h: float = 1e-5, face: Sequence[str] | None = None) -> Linearization:
    """Finite difference Jacobian of the time-t map at a vertex.

    The linear coordinates are the barycentric coordinates of the other
    vertices of ``face`` (by default the largest facet through ``v``), so the
    k-th column is the one sided difference quotient along the edge towards
    ``basis[k]``.
    """
    if (v,) not in K.face_set:
        raise ComplexError(f"unknown vertex {v!r}")
    if face is None:
        through = [f for f in K.facets if v in f]
        face = max(through, key=len)
    face = K.canonical(face)
    if face not in K.face_set or v not in face:
        raise FlowError(f"{face!r} is not a face through {v!r}")
    order = orient.order(face)
    basis = tuple(u for u in order if u != v)
    vi = order.index(v)
    J = np.zeros((len(basis), len(basis)))
    for col, u in enumerate(basis):
        c = np.zeros(len(order))
        c[vi] = 1.0 - h
        c[order.index(u)] = h
        out = flow_coords(c, t)
        J[:, col] = [out[order.index(w)] / h for w in basis]
    eig = np.sort(np.linalg.eigvals(J).real) if len(basis) else np.zeros(0)
    return Linearization(v, face, basis, J, eig, vi, t)


def product_flow(pA: BarycentricPoint, orderA: OrderedCarrier, pB: BarycentricPoint,
                 orderB: OrderedCarrier, t: float) -> tuple[BarycentricPoint, BarycentricPoint]:
    """Flow on a product of two ordered simplices, one factor at a time."""
    return simplex_flow(pA, orderA, t), simplex_flow(pB, orderB, t)


@dataclass
class ParallelismResult:
    ok: bool
    top_gap: float
    chord_residual: float
    initial_chord_residual: float


def _parallel_residual(d: np.ndarray, e: np.ndarray) -> float:
    """Relative size of the part of ``d`` orthogonal to ``e`` (0 when either is 0)."""
    nd, ne = np.linalg.norm(d), np.linalg.norm(e)
    if nd == 0 or ne == 0:
        return 0.0
    r = d - (d @ e) / (e @ e) * e
    return float(np.linalg.norm(r) / nd)


def parallelism_check(p: Sequence[float], q: Sequence[float], t: float,
                      top_tol: float = 1e-9, chord_tol: float = 1e-7,
                      detail: bool = False) -> bool | ParallelismResult:
    """Check that two points with equal top coordinate keep it and stay parallel.

    ``p`` and ``q`` are coordinate arrays on the full ordered simplex.  After
    flowing, the top coordinates must still agree and the chord between the
    images must be parallel to the chord between their shadows on the
    opposite face.  With ``detail=True`` a :class:`ParallelismResult` is
    returned; its ``initial_chord_residual`` also measures parallelism with
    the chord between the unflowed shadows.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1 or len(p) < 2:
        raise FlowError("points must be coordinate vectors on the same simplex")
    for x in (p, q):
        if np.any(x <= 0) or abs(x.sum() - 1) > SUM_TOL * len(x):
            raise FlowError("points must lie in the open simplex")
    if abs(p[-1] - q[-1]) > top_tol:
        raise FlowError("top coordinates differ")
    fp, fq = flow_coords(p, t), flow_coords(q, t)
    top_gap = abs(fp[-1] - fq[-1])

    def shadow(x: np.ndarray) -> np.ndarray:
        return x[:-1] / x[:-1].sum()

    chord = fp[:-1] - fq[:-1]
    res = _parallel_residual(chord, shadow(fp) - shadow(fq))
    res0 = _parallel_residual(chord, shadow(p) - shadow(q))
    ok = top_gap <= top_tol and res <= chord_tol
    if detail:
        return ParallelismResult(bool(ok), float(top_gap), res, res0)
    return bool(ok)


@dataclass(frozen=True)
class Stratum:
    """Points of the ordered m-simplex with prescribed zero and positive coordinates."""

    m: int
    zero: tuple[int, ...]
    positive: int

    def contains(self, coords: Sequence[float], tol: float = 0.0) -> bool:
        c = np.asarray(coords, dtype=float)
        return bool(all(abs(c[i]) <= tol for i in self.zero) and c[self.positive] > tol)

    def __str__(self) -> str:
        if not self.zero:
            return f"{{t_{self.positive}>0}}"
        lo, hi = min(self.zero), max(self.zero)
        idx = f"{lo}" if lo == hi else f"{lo}..{hi}"
        return f"{{t_i=0 for i in {idx}, t_{self.positive}>0}}"


def wpm_faces(m: int, k: int) -> tuple[Stratum, Stratum]:
    """Stable and unstable sets of the vertex e_k in the ordered m-simplex.

    ``W+`` (forward limit e_k) is {t_i = 0 for i < k, t_k > 0}; ``W-``
    (backward limit e_k) is {t_j = 0 for j > k, t_k > 0}.  Forward limits
    pick the lowest index of the support and backward limits the highest.
    """
    if m < 0 or not (0 <= k <= m):
        raise FlowError(f"need 0 <= k <= m, got m={m}, k={k}")
    return Stratum(m, tuple(range(k)), k), Stratum(m, tuple(range(k + 1, m + 1)), k)


def _interior_of(coords: np.ndarray, stratum: Stratum) -> bool:
    free = [i for i in range(stratum.m + 1) if i not in stratum.zero]
    return stratum.contains(coords) and all(coords[i] > 0 for i in free)


def slice_threshold(w_plus: Sequence[float], w_minus: Sequence[float], k: int,
                    tol: float = 1e-12) -> float:
    """Infimum of the times t for which w+(t) + w- - e_k lies in the open simplex.

    The k-th coordinate of w+(t) increases with t, so the admissible times
    form a half line; it is located by doubling and then bisection.  Returns
    ``-inf`` when every time is admissible (w+ = e_k).
    """
    wp = np.asarray(w_plus, dtype=float)
    wm = np.asarray(w_minus, dtype=float)
    need = 1.0 - wm[k]

    def valid(t: float) -> bool:
        return flow_coords(wp, t)[k] > need

    if wp[k] == 1.0:
        return -math.inf
    hi = 1.0
    while not valid(hi):
        hi *= 2
        if hi > 1e4:
            raise FlowError("no admissible time found")
    lo = -1.0
    while valid(lo):
        lo *= 2
        if lo < -1e4:
            return -math.inf
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if valid(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class SliceIntersection:
    x: np.ndarray
    y: np.ndarray
    threshold: float
    graph_residual: float
    slice_residual: float


def normal_slice_intersection(w_plus: Sequence[float], w_minus: Sequence[float], k: int,
                              t: float, tol: float = 1e-8) -> SliceIntersection:
    """The point where the normal slice at (w+, w-) meets the graph of the time-t map.

    With e_k as origin the second component is y = w+(t) + w-, and the first
    is x = flow of y by -t.  ``graph_residual`` is |flow_t(x) - y| and
    ``slice_residual`` measures how far x is from the plane through w+
    parallel to the face [e_0, ..., e_k].
    """
    wp = np.asarray(w_plus, dtype=float)
    wm = np.asarray(w_minus, dtype=float)
    m = len(wp) - 1
    if len(wm) != m + 1:
        raise FlowError("w+ and w- must live on the same simplex")
    Wp, Wm = wpm_faces(m, k)
    if not (_interior_of(wp, Wp) or np.array_equal(wp, np.eye(m + 1)[k])):
        raise FlowError("w+ is not in the open stable set of e_k")
    if not (_interior_of(wm, Wm) or np.array_equal(wm, np.eye(m + 1)[k])):
        raise FlowError("w- is not in the open unstable set of e_k")
    thr = slice_threshold(wp, wm, k)
    if not t > thr:
        raise FlowError(f"t={t} is below the slice threshold {thr:.6g}")
    y = flow_coords(wp, t) + wm
    y[k] -= 1.0
    y = np.clip(y, 0.0, None)
    x = flow_coords(y, -t)
    graph = float(np.max(np.abs(flow_coords(x, t) - y)))
    slice_res = float(np.max(np.abs(x[k + 1:] - wp[k + 1:]), initial=0.0))
    if graph > tol:
        raise FlowError(f"graph residual {graph:.3g} exceeds {tol:g}")
    return SliceIntersection(x, y, thr, graph, slice_res)


def slice_graph_crossings(w_plus: Sequence[float], w_minus: Sequence[float], t: float,
                          grid: int = 2001) -> list[float]:
    """Scan the k=1 normal slice for points on the graph of the time-t map.

    The first factor of the slice is the segment x(s) = w+ + s (e_0 - e_1),
    the second the plane {y_0 = w-_0}.  Returns the parameters s at which
    flow_t(x(s))_0 - w-_0 changes sign, refined by bisection.
    """
    wp = np.asarray(w_plus, dtype=float)
    wm = np.asarray(w_minus, dtype=float)
    s_max = wp[1]
    # the expanding directions shrink preimages by e^{-t}, so scan on a log grid
    ss = s_max * np.logspace(-15, 0, grid)[:-1]

    def resid(s: float) -> float:
        x = wp.copy()
        x[0] += s
        x[1] -= s
        return flow_coords(x, t)[0] - wm[0]

    vals = np.array([resid(s) for s in ss])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        a, b = ss[i], ss[i + 1]
        for _ in range(60):
            c = 0.5 * (a + b)
            if np.sign(resid(c)) == np.sign(vals[i]):
                a = c
            else:
                b = c
        roots.append(0.5 * (a + b))
    return roots


@dataclass
class AsymptoticReport:
    m: int
    T: float
    count: int
    histogram: dict[tuple[int, int], int] = field(default_factory=dict)
    violations: int = 0
    ties: int = 0

    def to_json(self) -> dict:
        return {
            "m": self.m, "T": self.T, "count": self.count,
            "histogram": {f"{l},{k}": n for (l, k), n in sorted(self.histogram.items())},
            "violations": self.violations, "ties": self.ties,
        }


RATES = (0.5, 1.5, 2.5, 3.5)


def asymptotic_pair_sample(m: int, count: int, T: float = 20.0,
                           seed: int | np.random.Generator = 0,
                           alive: float = 0.5, dead: float = 1e-2) -> AsymptoticReport:
    """Classify limits of pairs (x(s), flow_s x(s)) along exponential paths.

    Each sample picks a limit point x_inf on a random face and approaches it
    along x(s) = x_inf + sum_i c_i e^{-a_i s} e_i (normalized) with rates a_i
    in :data:`RATES`.  Then x_inf lies in W+_l with l the lowest index of its
    support.  The image y(s) is evaluated at s = T and s = 2T; a coordinate
    is alive when y(2T)_i / y(T)_i > ``alive`` and vanishing when the ratio is
    below ``dead``.  The limit y_inf lies in W-_k with k the highest alive
    index.  Samples with a coordinate in neither class are counted as ties.
    """
    if T < 20 or count < 1 or m < 0:
        raise FlowError("need T >= 20, count >= 1 and m >= 0")
    rng = np.random.default_rng(seed)
    rep = AsymptoticReport(m, float(T), count)
    for _ in range(count):
        mask = rng.random(m + 1) < 0.5
        if not mask.any():
            mask[rng.integers(m + 1)] = True
        support = np.nonzero(mask)[0]
        x_inf = np.zeros(m + 1)
        x_inf[support] = rng.dirichlet(np.ones(len(support)))
        c = rng.uniform(0.1, 1.0, m + 1)
        rates = rng.choice(RATES, m + 1)

        def image(s: float) -> np.ndarray:
            x = x_inf + np.where(mask, 0.0, c * np.exp(-rates * s))
            return flow_coords(x / x.sum(), s)

        y1, y2 = image(T), image(2 * T)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(y1 > 0, y2 / y1, 0.0)
        if np.any((ratio >= dead) & (ratio <= alive)):
            rep.ties += 1
            continue
        alive_idx = np.nonzero(ratio > alive)[0]
        if len(alive_idx) == 0:
            rep.ties += 1
            continue
        l, k = int(support[0]), int(alive_idx[-1])
        rep.histogram[(l, k)] = rep.histogram.get((l, k), 0) + 1
        if l < k:
            rep.violations += 1
    return rep


__all__ = [
    "FlowError", "BarycentricPoint", "OrderedCarrier", "scalar_flow", "flow_coords",
    "simplex_flow", "complex_flow", "trajectory", "lyapunov_value", "flow_limits",
    "Linearization", "vertex_linearization", "product_flow", "ParallelismResult",
    "parallelism_check", "Stratum", "wpm_faces", "slice_threshold", "SliceIntersection",
    "normal_slice_intersection", "slice_graph_crossings", "AsymptoticReport",
    "asymptotic_pair_sample",
]
