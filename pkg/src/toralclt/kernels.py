"""Summation sequences on Z^d and their kernels.

A sequence is a finite weighted point set.  The normalised kernel of
weights R is |sum_l R(l) e(<l,t>)|^2 / sum_l R(l)^2 with e(x) = exp(2 pi i x).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidCoefficientsError, KernelScaleLimitError, UndefinedDefectError

MAX_SIMPLEX_POINTS = 5_000_000


@dataclass(frozen=True, eq=False)
class SummationSequence:
    points: np.ndarray  # (m, d) int64
    weights: np.ndarray  # (m,) float
    kind: str = "custom"
    exact: tuple = None  # optional exact weights (Fractions)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(pts):
            raise ValueError("points and weights differ in length")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.weights)

    @property
    def norm2(self):
        return float(np.sum(self.weights ** 2))

    @property
    def total(self):
        return float(np.sum(self.weights))

    @property
    def is_indicator(self):
        return bool(np.all((self.weights == 0) | (self.weights == 1)))

    def support(self):
        return {tuple(int(x) for x in p) for p, w in zip(self.points, self.weights) if w > 0}

    def transform(self, t):
        """sum_l R(l) e(<l,t>) for t of shape (..., d)."""
        t = np.asarray(t, dtype=float)
        if self.dim == 1 and (t.ndim == 0 or t.shape[-1] != 1):
            t = t[..., None]
        flat = t.reshape(-1, self.dim)
        out = np.empty(len(flat), dtype=complex)
        step = max(1, 2_000_000 // max(1, len(self)))
        for s in range(0, len(flat), step):
            ph = flat[s:s + step] @ self.points.T.astype(float)
            out[s:s + step] = np.exp(2j * np.pi * ph) @ self.weights
        return out.reshape(t.shape[:-1])


# ---------------------------------------------------------------------------
# constructors

def rectangle(sides) -> SummationSequence:
    sides = [int(s) for s in sides]
    grid = np.array(list(itertools.product(*[range(s) for s in sides])), dtype=np.int64)
    return SummationSequence(grid.reshape(-1, len(sides)), np.ones(len(grid)), "rectangle")


def square(side: int, d: int = 2) -> SummationSequence:
    seq = rectangle([side] * d)
    return SummationSequence(seq.points, seq.weights, "square")


def triangle(side: int, d: int = 2) -> SummationSequence:
    pts = [p for p in itertools.product(range(side), repeat=d) if sum(p) < side]
    return SummationSequence(np.array(pts, dtype=np.int64), np.ones(len(pts)), "triangle")


def _in_polygon(x, y, verts):
    inside = np.zeros(x.shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xint)
    return inside


def dilated(shape: dict, scale: float) -> SummationSequence:
    """Lattice cells whose centres lie in scale * domain.

    ``shape`` is {"type": "ellipse", "axes": [a, b, ...]} (centred at 0) or
    {"type": "polygon", "vertices": [[x, y], ...]} in two dimensions.
    """
    kind = shape.get("type")
    if kind == "ellipse":
        axes = np.asarray(shape["axes"], dtype=float) * scale
        rng = [range(-math.ceil(a) - 1, math.ceil(a) + 1) for a in axes]
        grid = np.array(list(itertools.product(*rng)), dtype=np.int64)
        c = grid + 0.5
        keep = np.sum((c / axes) ** 2, axis=1) <= 1.0
    elif kind == "polygon":
        v = np.asarray(shape["vertices"], dtype=float) * scale
        lo, hi = np.floor(v.min(axis=0)) - 1, np.ceil(v.max(axis=0)) + 1
        grid = np.array(list(itertools.product(range(int(lo[0]), int(hi[0])),
                                               range(int(lo[1]), int(hi[1])))), dtype=np.int64)
        c = grid + 0.5
        keep = _in_polygon(c[:, 0], c[:, 1], v)
    else:
        raise ValueError(f"unknown domain type {kind!r}")
    pts = grid[keep]
    return SummationSequence(pts, np.ones(len(pts)), "dilated")


def gap(n: int, power: int = 2) -> SummationSequence:
    """D_n = {j^power : 0 <= j < n} in dimension one."""
    pts = np.array([j ** power for j in range(n)], dtype=np.int64)[:, None]
    return SummationSequence(pts, np.ones(n), "gap")


def custom(points, weights=None) -> SummationSequence:
    points = np.asarray(points, dtype=np.int64)
    w = np.ones(len(points)) if weights is None else weights
    return SummationSequence(points, w, "custom")


def from_json(doc: dict) -> SummationSequence:
    kind = doc["kind"]
    d = int(doc.get("dim", 2))
    if kind == "square":
        return square(int(doc["side"]), d)
    if kind == "rectangle":
        return rectangle(doc["sides"])
    if kind == "triangle":
        return triangle(int(doc["side"]), d)
    if kind == "dilated":
        return dilated(doc["shape"], float(doc["scale"]))
    if kind == "gap":
        return gap(int(doc["n"]), int(doc.get("power", 2)))
    if kind == "barycenter":
        return barycenter_weights(ProbabilityVector(doc["p"]), int(doc["n"]))
    if kind == "custom":
        return custom(doc["points"], doc.get("weights"))
    raise ValueError(f"unknown sequence kind {kind!r}")


# ---------------------------------------------------------------------------
# defect and kernels

def folner_defect(seq: SummationSequence, p) -> float:
    """1 - |D ∩ (D + p)| / |D| for an indicator sequence."""
    if not seq.is_indicator:
        raise ValueError("defect is defined for indicator sequences only")
    D = seq.support()
    if not D:
        raise UndefinedDefectError("empty support")
    p = tuple(int(x) for x in np.atleast_1d(p))
    shifted = {tuple(a + b for a, b in zip(x, p)) for x in D}
    return 1.0 - len(D & shifted) / len(D)


def kernel_eval(seq: SummationSequence, t):
    """Normalised kernel |sum R e(<l,t>)|^2 / sum R^2."""
    if len(seq) == 0 or seq.norm2 == 0:
        raise UndefinedDefectError("empty support")
    return np.abs(seq.transform(t)) ** 2 / seq.norm2


def fejer_kernel(N, t):
    """(1/N) (sin(pi N t) / sin(pi t))^2; product over coordinates for tuple N."""
    if np.ndim(N) > 0:
        t = np.asarray(t, dtype=float)
        return np.prod([fejer_kernel(n, t[..., i]) for i, n in enumerate(N)], axis=0)
    t = np.asarray(t, dtype=float)
    s = np.sin(np.pi * t)
    small = np.abs(s) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (np.sin(np.pi * N * t) / np.where(small, 1.0, s)) ** 2 / N
    return np.where(small, float(N), val)


def fejer_l2_squared(N):
    """||K_N||_2^2 = (2N^2 + 1) / (3N)."""
    return (2 * N * N + 1) / (3 * N)


def jackson_kernel(N, t):
    """K_N^2 / ||K_N||_2^2, a probability density on the circle."""
    if np.ndim(N) > 0:
        t = np.asarray(t, dtype=float)
        return np.prod([jackson_kernel(n, t[..., i]) for i, n in enumerate(N)], axis=0)
    return fejer_kernel(N, t) ** 2 / fejer_l2_squared(N)


def jackson_moment(N: int, k: int, panels: int = None, order: int = 20) -> float:
    """int_0^{1/2} t^k J_N(t) dt by composite Gauss-Legendre."""
    panels = panels or max(64, 8 * N)
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 0.5, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    t = 0.5 * (b - a) * x + 0.5 * (a + b)
    vals = t ** k * jackson_kernel(N, t)
    return float(np.sum(0.5 * (b - a) * w * vals))


def jackson_moment_constant(Ns=(8, 16, 32, 64), ks=(0, 1, 2)):
    """Smallest c with moment(N, k) <= c N^-k on the grid, and the table."""
    table = {(N, k): jackson_moment(N, k) for N in Ns for k in ks}
    c = max(v * N ** k for (N, k), v in table.items())
    return c, table


# ---------------------------------------------------------------------------
# barycenter weights

class ProbabilityVector:
    """Positive probability vector, kept exactly as Fractions."""

    def __init__(self, p):
        vals = [x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, str) else Fraction(x)
                for x in p]
        if not vals or any(v <= 0 for v in vals):
            raise InvalidCoefficientsError("probability entries must be positive")
        s = sum(vals)
        if abs(float(s) - 1.0) > 1e-12:
            raise InvalidCoefficientsError(f"entries sum to {float(s)}, not 1")
        self.exact = tuple(v / s for v in vals)

    @property
    def d(self):
        return len(self.exact)

    @property
    def values(self):
        return np.array([float(v) for v in self.exact])

    @property
    def q(self):
        """Tail coefficients q_j = p_{j+1}."""
        return self.values[1:]

    def __repr__(self):
        return f"ProbabilityVector({[str(v) for v in self.exact]})"


def _simplex_count(n, d):
    return math.comb(n + d - 1, d - 1)


def _exact_multinomial(p: ProbabilityVector, n: int):
    """Integer numerators of multinomial(n; l) p^l over a common denominator D^n."""
    D = 1
    for v in p.exact:
        D = D * v.denominator // math.gcd(D, v.denominator)
    a = [int(v * D) for v in p.exact]
    d = p.d
    if _simplex_count(n, d) > MAX_SIMPLEX_POINTS:
        raise KernelScaleLimitError(
            f"{_simplex_count(n, d)} simplex points exceed the limit {MAX_SIMPLEX_POINTS}")

    def rec(m, j):
        if j == d - 1:
            yield (m,), a[j] ** m
            return
        pw = 1
        for l in range(m + 1):
            c = math.comb(m, l) * pw
            for rest, w in rec(m - l, j + 1):
                yield (l,) + rest, c * w
            pw *= a[j]

    return list(rec(n, 0)), D ** n


def barycenter_weights(p: ProbabilityVector, n: int) -> SummationSequence:
    if n < 0:
        raise ValueError("n must be >= 0")
    terms, den = _exact_multinomial(p, n)
    pts = np.array([t for t, _ in terms], dtype=np.int64)
    w = np.array([num / den for _, num in terms])
    exact = tuple(Fraction(num, den) for _, num in terms)
    return SummationSequence(pts, w, "barycenter", exact)


def In_exact(p: ProbabilityVector, n: int, exact: bool = False):
    """I_n = sum_l (multinomial(n; l) p^l)^2 by exact integer sums."""
    terms, den = _exact_multinomial(p, n)
    val = Fraction(sum(w * w for _, w in terms), den * den)
    return val if exact else float(val)


def barycenter_normalization(p: ProbabilityVector, n: int) -> float:
    """c_n = (4 pi)^{(d-1)/2} (p_1...p_d)^{1/2} n^{(d-1)/2}."""
    d = p.d
    return (4 * math.pi) ** ((d - 1) / 2) * math.sqrt(float(np.prod(p.values))) * n ** ((d - 1) / 2)


def barycenter_kernel_moment(p: ProbabilityVector, n: int, k) -> float:
    """int c_n |sum_l w_l e(<l,t>)|^2 e(<k,t>) dt = c_n sum_l w_l w_{l+k}."""
    seq = barycenter_weights(p, n)
    table = {tuple(int(x) for x in pt): w for pt, w in zip(seq.points, seq.weights)}
    k = tuple(int(x) for x in k)
    s = sum(w * table.get(tuple(a + b for a, b in zip(pt, k)), 0.0) for pt, w in table.items())
    return barycenter_normalization(p, n) * s


# ---------------------------------------------------------------------------
# quadratic form

class QuadraticFormQ:
    """Q(t) = sum q_j t_j^2 - (sum q_j t_j)^2 with matrix A = diag(q) - q q^T."""

    def __init__(self, q):
        q = np.asarray(q, dtype=float).ravel()
        if len(q) == 0 or np.any(q <= 0):
            raise InvalidCoefficientsError("coefficients must be positive")
        if q.sum() > 1 + 1e-12:
            raise InvalidCoefficientsError(f"sum of coefficients {q.sum()} exceeds 1")
        self.q = q

    @property
    def matrix(self):
        return np.diag(self.q) - np.outer(self.q, self.q)

    @property
    def det(self):
        return (1.0 - self.q.sum()) * float(np.prod(self.q))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t ** 2 @ self.q - (t @ self.q) ** 2

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix)[0])


def quadratic_form(q) -> QuadraticFormQ:
    return QuadraticFormQ(q)


def det_Q(q) -> float:
    return QuadraticFormQ(q).det


def neighb_F(q, t):
    """F(t) = 1 - |1 + sum q_j (e(t_j) - 1)|^2 for t of shape (..., r)."""
    q = np.asarray(q, dtype=float)
    z = 1 + (np.exp(2j * np.pi * np.asarray(t, dtype=float)) - 1) @ q
    return 1.0 - np.abs(z) ** 2
