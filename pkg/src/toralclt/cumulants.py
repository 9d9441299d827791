"""Set partitions, moment/cumulant transforms and exact moments of trigonometric polynomials."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CumulantScaleLimitError, IncompleteTableError

MAX_ORDER = 10


@dataclass(frozen=True)
class SetPartition:
    blocks: tuple  # tuple of sorted tuples of indices

    def __len__(self):
        return len(self.blocks)


@lru_cache(maxsize=None)
def _partitions_of(items: tuple):
    """Partitions of ``items`` via restricted growth strings."""
    n = len(items)
    out = []
    a = [0] * n

    def rec(i, m):
        if i == n:
            blocks = [[] for _ in range(m + 1)]
            for idx, b in enumerate(a):
                blocks[b].append(items[idx])
            out.append(SetPartition(tuple(tuple(b) for b in blocks)))
            return
        for b in range(m + 2):
            a[i] = b
            rec(i + 1, max(m, b))

    if n == 0:
        return (SetPartition(()),)
    a[0] = 0
    rec(1, 0)
    return tuple(out)


def partitions(r: int):
    """All set partitions of {1..r}; Bell(r) of them."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if r > MAX_ORDER:
        raise CumulantScaleLimitError(f"r={r} exceeds the supported order {MAX_ORDER}")
    return list(_partitions_of(tuple(range(1, r + 1))))


@dataclass
class CumulantTable:
    """Values indexed by nonempty subsets (frozensets) of {1..r}."""

    order: int
    values: dict = field(default_factory=dict)

    def __getitem__(self, J):
        return self.values[frozenset(J)]

    def __setitem__(self, J, v):
        self.values[frozenset(J)] = v

    def full(self):
        return self.values[frozenset(range(1, self.order + 1))]

    def subsets(self):
        idx = range(1, self.order + 1)
        for size in range(1, self.order + 1):
            for J in itertools.combinations(idx, size):
                yield J


def _transform(table: CumulantTable, signed: bool) -> CumulantTable:
    if table.order > MAX_ORDER:
        raise CumulantScaleLimitError(f"order {table.order} exceeds {MAX_ORDER}")
    for J in table.subsets():
        if frozenset(J) not in table.values:
            raise IncompleteTableError(f"missing value for subset {set(J)}")
    out = CumulantTable(table.order)
    for J in table.subsets():
        total = 0
        for part in _partitions_of(J):
            p = len(part)
            term = math.prod((table.values[frozenset(b)] for b in part.blocks), start=1)
            if signed:
                term = (-1) ** (p - 1) * math.factorial(p - 1) * term
            total += term
        out[J] = total
    return out


def moments_to_cumulants(m: CumulantTable) -> CumulantTable:
    """s(J) = sum over partitions of (-1)^(p-1) (p-1)! prod m(I_i)."""
    return _transform(m, signed=True)


def cumulants_to_moments(s: CumulantTable) -> CumulantTable:
    """m(J) = sum over partitions of prod s(I_i)."""
    return _transform(s, signed=False)


# ---------------------------------------------------------------------------
# exact moments under the action

def _dual_images(f, action, n):
    out = {}
    for k, c in f.coeffs.items():
        y = action.dual_apply(k, n)
        if y is not None:
            out[y] = out.get(y, 0) + c
    return out


def exact_moments_trigpoly(f, action, ns):
    """E[f(A^{n_1} x) ... f(A^{n_r} x)] by summing over support tuples with zero total dual vector."""
    ns = [tuple(int(x) for x in n) for n in ns]
    if not ns:
        return 1
    partial = {(0,) * f.rho: 1}
    for n in ns:
        img = _dual_images(f, action, n)
        nxt = {}
        for s, a in partial.items():
            for y, c in img.items():
                key = tuple(u + v for u, v in zip(s, y))
                nxt[key] = nxt.get(key, 0) + a * c
        partial = nxt
    return partial.get((0,) * f.rho, 0)


def _canonical(ns):
    d = len(ns[0])
    lo = [min(n[i] for n in ns) for i in range(d)]
    return tuple(tuple(x - m for x, m in zip(n, lo)) for n in ns)


def joint_cumulant_trigpoly(f, action, ns, _cache=None):
    """s_f(n_1, ..., n_r): joint cumulant of f o A^{n_1}, ..., f o A^{n_r}."""
    ns = _canonical([tuple(int(x) for x in n) for n in ns])
    r = len(ns)
    cache = {} if _cache is None else _cache

    def moment(idx):
        key = _canonical([ns[i - 1] for i in idx])
        key = tuple(sorted(key))
        if key not in cache:
            cache[key] = exact_moments_trigpoly(f, action, key)
        return cache[key]

    total = 0
    for part in _partitions_of(tuple(range(1, r + 1))):
        p = len(part)
        term = math.prod((moment(b) for b in part.blocks), start=1)
        total += (-1) ** (p - 1) * math.factorial(p - 1) * term
    return total


def cumulant_of_sum(R, s_f, r, radius=None):
    """c^(r)(sum_l R(l) T^l f) = sum over tuples of s_f(l_1..l_r) R(l_1)...R(l_r).

    ``R`` maps points of Z^d to weights (SummationSequence or dict);
    ``s_f`` is a callable on r-tuples of exponents.  With ``radius`` the sum
    uses stationarity and only offsets l_i - l_1 with sup norm <= radius.
    """
    if hasattr(R, "points"):
        R = {tuple(int(x) for x in p): float(w) for p, w in zip(R.points, R.weights) if w != 0}
    pts = list(R)
    if radius is None:
        return sum(s_f(t) * math.prod(R[p] for p in t) for t in itertools.product(pts, repeat=r))
    d = len(pts[0])
    offsets = list(itertools.product(range(-radius, radius + 1), repeat=d))
    total = 0
    for deltas in itertools.product(offsets, repeat=r - 1):
        w = 0.0
        for p in pts:
            prod = R[p]
            for dl in deltas:
                q = tuple(a + b for a, b in zip(p, dl))
                v = R.get(q)
                if v is None:
                    prod = 0.0
                    break
                prod *= v
            w += prod
        if w == 0:
            continue
        zero = (0,) * d
        total += s_f((zero,) + deltas) * w
    return total


@dataclass(frozen=True)
class VanishingRadius:
    radius: float  # None when not found
    found: bool
    window: int
    nonzero: int


def vanishing_radius(f, action, r, M_search) -> VanishingRadius:
    """Smallest M with s_f = 0 whenever max_ij ||l_i - l_j||_2 > M, on the scanned window.

    Offsets l_i - l_1 range over [-W, W]^d with W = M_search (nonnegative
    canonical tuples in endomorphism mode).  If a nonzero cumulant touches
    the window boundary a radius cannot be certified and ``found`` is False.
    """
    if r > 4:
        raise CumulantScaleLimitError("vanishing_radius supports r <= 4")
    d = action.rank
    W = int(M_search)
    offsets = list(itertools.product(range(-W, W + 1), repeat=d))
    cache = {}
    seen = set()
    best, count, edge = 0.0, 0, False
    zero = (0,) * d
    for deltas in itertools.product(offsets, repeat=r - 1):
        key = tuple(sorted(_canonical((zero,) + deltas)))
        if key in seen:
            continue
        seen.add(key)
        s = joint_cumulant_trigpoly(f, action, (zero,) + deltas, cache)
        if s == 0 or abs(s) < 1e-12:
            continue
        count += 1
        pts = (zero,) + deltas
        sep = max(math.dist(a, b) for a in pts for b in pts)
        best = max(best, sep)
        if any(abs(x) == W for dl in deltas for x in dl):
            edge = True
    if edge:
        return VanishingRadius(None, False, W, count)
    return VanishingRadius(best, True, W, count)


# ---------------------------------------------------------------------------
# empirical cumulants

def empirical_cumulants(samples, r=None) -> CumulantTable:
    """Plug-in joint cumulants of the columns of ``samples`` (M x r)."""
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    r = r or X.shape[1]
    X = X[:, :r]
    mean = X.mean(axis=0)
    Xc = X - mean
    m = CumulantTable(r)
    for J in m.subsets():
        m[J] = float(np.mean(np.prod(Xc[:, [j - 1 for j in J]], axis=1)))
    s = moments_to_cumulants(m)
    for j in range(1, r + 1):
        s[(j,)] = float(mean[j - 1])
    return s


def univariate_cumulants(x, rmax=4):
    """[kappa_1, ..., kappa_rmax] of a sample via the joint-cumulant transform."""
    x = np.asarray(x, dtype=float)
    out = []
    for r in range(1, rmax + 1):
        out.append(empirical_cumulants(np.repeat(x[:, None], r, axis=1)).full())
    return out
