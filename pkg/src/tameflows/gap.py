"""Gaps between subspaces, linear flows on Grassmannians and spectral ratios.

The gap from U to V is

    delta(U, V) = sup_{u in U, |u| = 1} dist(u, V) = ||P_U - P_V P_U||,

measured in the operator 2-norm.  The Frobenius norm appears only where a
trace inner product is meant (the Morse-Bott function on Grassmannians).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

ORTHO_TOL = 1e-10


class GapError(ValueError):
    """Dimension mismatch, degenerate input or a violated identity."""


class GapWarning(UserWarning):
    """Input basis was not orthonormal and has been re-orthonormalized."""


def _orthonormal_span(M: np.ndarray, tol: float = ORTHO_TOL) -> np.ndarray:
    if M.shape[1] == 0:
        return M.copy()
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return U[:, :r]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^n stored by an orthonormal basis (n x k)."""

    basis: np.ndarray

    def __post_init__(self) -> None:
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2:
            raise GapError("basis must be a 2-d array")
        k = B.shape[1]
        if k and np.max(np.abs(B.T @ B - np.eye(k))) > ORTHO_TOL:
            warnings.warn("basis is not orthonormal; re-orthonormalizing", GapWarning, stacklevel=3)
            B = _orthonormal_span(B)
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def span(cls, M: np.ndarray | Sequence[Sequence[float]], n: int | None = None) -> "Subspace":
        """Column span of ``M`` (any spanning set, rank-revealing)."""
        M = np.asarray(M, dtype=float)
        if M.ndim == 1:
            M = M[:, None]
        if M.size == 0:
            return cls(np.zeros((n if n is not None else M.shape[0], 0)))
        return cls(_orthonormal_span(M))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def perp(self) -> "Subspace":
        if self.dim == 0:
            return Subspace(np.eye(self.n))
        return Subspace(scipy.linalg.null_space(self.basis.T))

    def __add__(self, other: "Subspace") -> "Subspace":
        _same_ambient(self, other)
        return Subspace.span(np.hstack([self.basis, other.basis]), self.n)


def random_subspace(n: int, k: int, rng: np.random.Generator) -> Subspace:
    """Span of a Gaussian n x k matrix (almost surely k-dimensional)."""
    if not 0 <= k <= n:
        raise GapError(f"need 0 <= k <= n, got n={n}, k={k}")
    if k == 0:
        return Subspace.zero(n)
    Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return Subspace(Q)


def _same_ambient(U: Subspace, V: Subspace) -> None:
    if U.n != V.n:
        raise GapError(f"ambient dimensions differ: {U.n} vs {V.n}")


def projector(U: Subspace) -> np.ndarray:
    return U.projector


def gap(U: Subspace, V: Subspace) -> float:
    """delta(U, V) = ||(1 - P_V) P_U||, a number in [0, 1]."""
    _same_ambient(U, V)
    if U.dim == 0:
        return 0.0
    R = U.basis - V.basis @ (V.basis.T @ U.basis)
    return float(min(1.0, np.linalg.norm(R, 2)))


def subspace_dist(U: Subspace, V: Subspace) -> float:
    """||P_U - P_V|| in the operator norm."""
    _same_ambient(U, V)
    return float(np.linalg.norm(U.projector - V.projector, 2))


def hat_gap(U: Subspace, V: Subspace, tol: float = 1e-12) -> float:
    """delta(U, V) + delta(V, U), checked against ||P_U - P_V|| <= . <= 2||P_U - P_V||."""
    h = gap(U, V) + gap(V, U)
    d = subspace_dist(U, V)
    if not (d <= h + tol and h <= 2 * d + tol):
        raise GapError(f"projector sandwich fails: {d} <= {h} <= {2 * d}")
    return h


def graph_subspace(U: Subspace, S: np.ndarray) -> Subspace:
    """Graph {u + S u} of S: U -> U^perp, with S in the frames (basis U, basis U^perp)."""
    W = U.perp()
    S = np.asarray(S, dtype=float).reshape(W.dim, U.dim)
    return Subspace.span(U.basis + W.basis @ S, U.n)


def graph_gap_check(U: Subspace, S: np.ndarray) -> float:
    """|delta(graph S, U) - ||S|| / sqrt(1 + ||S||^2)|."""
    s = float(np.linalg.norm(np.asarray(S, dtype=float), 2)) if np.size(S) else 0.0
    return abs(gap(graph_subspace(U, S), U) - s / math.sqrt(1 + s * s))


@dataclass
class ShadowSlope:
    shadow: Subspace
    T: Subspace
    W: Subspace
    slope: np.ndarray
    slope_norm: float
    chain_residual: float
    graph_residual: float
    constant: float


def shadow_slope(U: Subspace, V: Subspace, tol: float = 1e-9) -> ShadowSlope:
    """Shadow S of U on V, T = V cap U^perp, W = U + T and the slope M: U -> U^perp.

    S is the graph of M over U.  The three gaps delta(W, V), delta(U, V)
    and delta(U, S) agree; ``chain_residual`` is their spread and
    ``graph_residual`` compares delta(S, U) with ||M|| (1 + ||M||^2)^{-1/2}.
    ``constant`` is delta(U, V) divided by that expression.
    """
    _same_ambient(U, V)
    if U.dim > V.dim:
        raise GapError("dim U must not exceed dim V")
    if U.dim and gap(U, V) >= 1 - 1e-12:
        raise GapError("V is not transversal to the orthogonal complement of U")
    PU, PV = U.projector, V.projector
    X = PV @ U.basis
    S = Subspace.span(X, U.n)
    if V.dim:
        N = scipy.linalg.null_space(U.basis.T @ V.basis) if U.dim else np.eye(V.dim)
        T = Subspace.span(V.basis @ N, U.n)
    else:
        T = Subspace.zero(U.n)
    W = U + T
    if U.dim:
        M = (np.eye(U.n) - PU) @ X @ np.linalg.solve(U.basis.T @ X, U.basis.T)
    else:
        M = np.zeros((U.n, U.n))
    m = float(np.linalg.norm(M, 2))
    g = [gap(W, V), gap(U, V), gap(U, S)]
    graph_val = m / math.sqrt(1 + m * m)
    res = ShadowSlope(S, T, W, M, m, max(g) - min(g), abs(gap(S, U) - graph_val),
                      g[1] / graph_val if graph_val > 0 else 1.0)
    if res.chain_residual > tol:
        raise GapError(f"gap equality chain off by {res.chain_residual:.3g}")
    return res


def _check_symmetric(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GapError("operator must be square")
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(A), initial=0.0)):
        raise GapError("operator is not symmetric")
    return 0.5 * (A + A.T)


def flow_subspace(A: np.ndarray, V: Subspace, t: float) -> Subspace:
    """The subspace e^{tA} V, computed without overflow.

    In the eigenbasis of A the coordinates of V are brought to column
    echelon form, with rows sorted by how fast e^{lambda t} grows.  Each
    column is then scaled by the growth factor of its own pivot, so every
    entry of the scaled matrix has modulus at most its unscaled value.
    """
    A = _check_symmetric(A)
    if A.shape[0] != V.n:
        raise GapError("operator and subspace live in different dimensions")
    if V.dim == 0:
        return V
    lam, Q = np.linalg.eigh(A)
    C = Q.T @ V.basis
    rows = np.argsort(-lam * t, kind="stable")
    C = C.copy()
    pivots = []
    free = list(range(C.shape[1]))
    scale = np.max(np.abs(C))
    for pos, r in enumerate(rows):
        if not free:
            break
        j = max(free, key=lambda c: abs(C[r, c]))
        if abs(C[r, j]) <= 1e-13 * scale:
            continue
        for c in free:
            if c != j:
                C[:, c] -= (C[r, c] / C[r, j]) * C[:, j]
        free.remove(j)
        pivots.append((j, r, pos))
    E = np.zeros_like(C)
    for j, r, pos in pivots:
        col = C[:, j].copy()
        # rows growing faster than the pivot were eliminated or negligible
        col[rows[:pos]] = 0.0
        E[:, j] = np.exp(np.minimum((lam - lam[r]) * t, 0.0)) * col
    return Subspace.span(Q @ E[:, [j for j, _, _ in pivots]], V.n)


def positive_eigenspace(A: np.ndarray) -> Subspace:
    A = _check_symmetric(A)
    lam, Q = np.linalg.eigh(A)
    return Subspace(Q[:, lam > 0])


@dataclass
class DecayReport:
    rows: np.ndarray
    rate: float
    slope_norm: float

    @property
    def ok(self) -> bool:
        return bool(np.all(self.rows[:, 1] <= self.rows[:, 2] + 1e-12))


def decay_bound_check(A: np.ndarray, V: Subspace, tgrid: Iterable[float]) -> DecayReport:
    """Rows (t, delta(U, e^{tA} V), e^{-(m_+ + m_-) t} ||M_V(U)||) with U the positive eigenspace.

    m_+ is the smallest positive eigenvalue of A and m_- that of -A.
    """
    A = _check_symmetric(A)
    lam = np.linalg.eigvalsh(A)
    if np.min(np.abs(lam)) <= 1e-12 * max(1.0, np.max(np.abs(lam))):
        raise GapError("operator is singular")
    if not (np.any(lam > 0) and np.any(lam < 0)):
        raise GapError("operator needs eigenvalues of both signs")
    rate = float(np.min(lam[lam > 0]) + np.min(-lam[lam < 0]))
    U = positive_eigenspace(A)
    sl = shadow_slope(U, V)
    rows = []
    for t in tgrid:
        t = float(t)
        rows.append((t, gap(U, flow_subspace(A, V, t)), math.exp(-rate * t) * sl.slope_norm))
    return DecayReport(np.array(rows), rate, sl.slope_norm)


def grassmann_graph_flow(I: Sequence[int], S: np.ndarray, lambdas: Sequence[float],
                         t: float) -> np.ndarray:
    """Flow of the graph of S over the coordinate plane E_I under e^{t diag(lambdas)}.

    ``S`` has rows indexed by the complement of I and columns by I (both in
    increasing order); the result has entries e^{(lam_a - lam_i) t} s_{a i}.
    """
    lam = np.asarray(lambdas, dtype=float)
    n = len(lam)
    I = sorted(int(i) for i in I)
    if len(set(I)) != len(I) or any(not 0 <= i < n for i in I):
        raise GapError("bad index set")
    J = [a for a in range(n) if a not in I]
    S = np.asarray(S, dtype=float)
    if S.shape != (len(J), len(I)):
        raise GapError(f"S must have shape {(len(J), len(I))}, got {S.shape}")
    return np.exp(np.subtract.outer(lam[J], lam[I]) * t) * S


def coordinate_graph(I: Sequence[int], S: np.ndarray, n: int) -> Subspace:
    """The subspace {x + S x : x in E_I} in standard coordinates."""
    I = sorted(int(i) for i in I)
    J = [a for a in range(n) if a not in I]
    B = np.zeros((n, len(I)))
    B[I, range(len(I))] = 1.0
    B[J, :] = np.asarray(S, dtype=float)
    return Subspace.span(B, n)


def trace_functional(A: np.ndarray, L: Subspace) -> float:
    """f_A(L) = tr(A P_L)."""
    A = np.asarray(A, dtype=float)
    return float(np.trace(A @ L.projector))


def fA_identity_check(U: Subspace, L: Subspace) -> float:
    """Residual of f_A(L) = |P_U - P_U P_L|_F^2 + dim L - dim U for A = 1 - P_U."""
    _same_ambient(U, L)
    PU, PL = U.projector, L.projector
    f = trace_functional(np.eye(U.n) - PU, L)
    rhs = np.linalg.norm(PU - PU @ PL, "fro") ** 2 + L.dim - U.dim
    return abs(f - rhs)


def _complete(U: Subspace, extra: np.ndarray, k: int) -> Subspace:
    return Subspace.span(np.hstack([U.basis, extra]), U.n)


def nearest_containing(L: Subspace, U: Subspace, k: int | None = None,
                       refine: bool = True) -> tuple[float, Subspace]:
    """A k-plane W containing U that is closest to L in ||P_L - P_W||.

    The starting guess adds to U the dominant (k - dim U)-dimensional left
    singular subspace of the part of L orthogonal to U.  With ``refine`` it
    is polished by a Nelder-Mead search over graphs around that guess.
    """
    _same_ambient(L, U)
    k = L.dim if k is None else int(k)
    j = U.dim
    if not j <= k <= U.n:
        raise GapError(f"need dim U <= k <= n, got dim U={j}, k={k}, n={U.n}")
    Up = U.perp()
    R = Up.basis.T @ L.basis
    Y, _, _ = np.linalg.svd(R, full_matrices=True)
    C = Up.basis @ Y[:, : k - j]
    D = Up.basis @ Y[:, k - j:]
    W0 = _complete(U, C, k)
    d0 = subspace_dist(L, W0)
    if not refine or k == j or D.shape[1] == 0 or d0 == 0:
        return d0, W0

    def cost(x: np.ndarray) -> float:
        X = x.reshape(D.shape[1], k - j)
        return subspace_dist(L, _complete(U, C + D @ X, k))

    res = scipy.optimize.minimize(cost, np.zeros(D.shape[1] * (k - j)), method="Nelder-Mead",
                                  options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
    if res.fun < d0:
        X = res.x.reshape(D.shape[1], k - j)
        return float(res.fun), _complete(U, C + D @ X, k)
    return d0, W0


def dist_to_containing(L: Subspace, U: Subspace, k: int | None = None) -> float:
    """Distance from L to the set of k-planes that contain U."""
    return nearest_containing(L, U, k)[0]


def morse_bott_ratio_check(U: Subspace, samples: Iterable[Subspace]) -> tuple[float, float]:
    """Empirical (min, max) of |P_U - P_U P_L|_F^2 / dist(L, planes containing U)^2."""
    ratios = []
    for L in samples:
        d = dist_to_containing(L, U)
        if d <= 1e-12:
            continue
        PU = U.projector
        ratios.append(np.linalg.norm(PU - PU @ L.projector, "fro") ** 2 / d ** 2)
    if not ratios:
        raise GapError("every sample already contains U")
    return float(min(ratios)), float(max(ratios))


@dataclass(frozen=True)
class CriticalSpectrum:
    """Hessian eigenvalues at a stationary point; negative ones are unstable."""

    eigenvalues: tuple

    @property
    def hyperbolic(self) -> bool:
        ev = self.eigenvalues
        return any(x < 0 for x in ev) and any(x > 0 for x in ev) and all(x != 0 for x in ev)

    def ratio(self):
        if not self.hyperbolic:
            raise GapError(f"spectrum {self.eigenvalues!r} is not hyperbolic")
        neg = [-x for x in self.eigenvalues if x < 0]
        pos = [x for x in self.eigenvalues if x > 0]
        return (min(neg) + min(pos)) / max(pos)


def _exact(x):
    return Fraction(x) if isinstance(x, (int, Fraction)) else float(x)


def spectral_nu(spectra: Iterable[CriticalSpectrum | Sequence[float]]):
    """min over points of (gamma_u + gamma_s) / Gamma_s.

    gamma_u is the smallest modulus of a negative eigenvalue, gamma_s the
    smallest positive eigenvalue and Gamma_s the largest.  Integer or
    Fraction input gives an exact Fraction.
    """
    vals = []
    for sp in spectra:
        if not isinstance(sp, CriticalSpectrum):
            sp = CriticalSpectrum(tuple(_exact(x) for x in sp))
        vals.append(sp.ratio())
    if not vals:
        raise GapError("no spectra given")
    return min(vals)


def projective_spectra(lambdas: Sequence[float]) -> list[CriticalSpectrum]:
    """Hessian spectra lambda_j - lambda_i at the hyperbolic points p_1..p_{n-1}."""
    lam = [_exact(x) for x in lambdas]
    n = len(lam) - 1
    return [CriticalSpectrum(tuple(lam[j] - lam[i] for j in range(n + 1) if j != i))
            for i in range(1, n)]


@dataclass
class SivReport:
    a: float
    rows: np.ndarray
    closed_form_error: float
    ratio_increasing: bool
    columns: tuple[str, ...] = field(default=("t", "gap", "closed_form", "dist", "ratio"))

    def ratio_at(self, t: float) -> float:
        i = int(np.argmin(np.abs(self.rows[:, 0] - t)))
        return float(self.rows[i, 4])


def siv_model_demo(a: float, tgrid: Iterable[float]) -> SivReport:
    """Gap between span(d_x) and span{d_z, d_x + a e^{-2t} d_y} against dist(0, q_t) = e^{-3t}.

    The gap behaves like |a| e^{-2t} while the distance decays like e^{-3t},
    so their ratio grows like e^t.
    """
    if a == 0:
        raise GapError("a must be nonzero")
    U = Subspace(np.array([[1.0], [0.0], [0.0]]))
    rows = []
    for t in tgrid:
        t = float(t)
        e = a * math.exp(-2 * t)
        V = Subspace.span(np.array([[0.0, 1.0], [0.0, e], [1.0, 0.0]]))
        g = gap(U, V)
        closed = abs(e) / math.sqrt(1 + e * e)
        d = math.exp(-3 * t)
        rows.append((t, g, closed, d, g / d))
    R = np.array(rows)
    err = float(np.max(np.abs(R[:, 1] - R[:, 2])))
    tail = R[len(R) // 2:, 4]
    return SivReport(float(a), R, err, bool(np.all(np.diff(tail) > 0)))


__all__ = [
    "GapError", "GapWarning", "Subspace", "random_subspace", "projector", "gap",
    "subspace_dist", "hat_gap", "graph_subspace", "graph_gap_check", "ShadowSlope",
    "shadow_slope", "flow_subspace", "positive_eigenspace", "DecayReport", "decay_bound_check",
    "grassmann_graph_flow", "coordinate_graph", "trace_functional", "fA_identity_check",
    "nearest_containing", "dist_to_containing", "morse_bott_ratio_check", "CriticalSpectrum",
    "spectral_nu", "projective_spectra", "SivReport", "siv_model_demo",
]
