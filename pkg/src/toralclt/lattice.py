"""Exact integer linear algebra for commuting toral endomorphisms.

Matrices are stored as tuples of tuples of Python ints, so products of
arbitrary length stay exact.  Rational matrices (inverses of
endomorphisms) only appear internally and are handled with ``Fraction``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidActionError,
    OrbitSearchError,
    SingularMatrixError,
    UnsupportedDegreeError,
)

__all__ = [
    "IntPolynomial",
    "IntMatrix",
    "LatticeAction",
    "OrbitClass",
    "OrbitSection",
    "TotalErgodicity",
    "char_poly",
    "cyclotomic",
    "is_irreducible_over_Q",
    "is_ergodic",
    "is_totally_ergodic",
    "dual_apply",
    "orbit_section",
    "action_to_json",
    "action_from_json",
]


# ---------------------------------------------------------------------------
# polynomials (ascending coefficient lists)

def _strip(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _pmul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _strip(out)


def _pdivmod(a, b):
    """Division over Q. Returns (quotient, remainder) as Fraction lists."""
    a = [Fraction(x) for x in _strip(a)]
    b = [Fraction(x) for x in _strip(b)]
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        factor = a[-1] / b[-1]
        q[shift] = factor
        for i, y in enumerate(b):
            a[i + shift] -= factor * y
        a = _strip(a)
    return _strip(q), a


def _pdivides(d, p):
    return not _pdivmod(p, d)[1]


def _pgcd(a, b):
    a, b = _strip(a), _strip(b)
    while b:
        a, b = b, _pdivmod(a, b)[1]
    if not a:
        return []
    lead = Fraction(a[-1])
    return [Fraction(x) / lead for x in a]


def _peval(c, x):
    acc = 0
    for y in reversed(c):
        acc = acc * x + y
    return acc


@lru_cache(maxsize=None)
def cyclotomic(m: int) -> tuple:
    """Coefficients (ascending) of the m-th cyclotomic polynomial."""
    if m < 1:
        raise ValueError("m must be positive")
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            q, r = _pdivmod(num, cyclotomic(d))
            assert not r
            num = q
    return tuple(int(x) for x in num)


def _totient(m):
    result, n, p = m, m, 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1
    if n > 1:
        result -= result // n
    return result


@lru_cache(maxsize=None)
def _cyclotomic_orders(rho):
    # phi(m) >= sqrt(m/2), so m <= 2 rho^2 covers every m with phi(m) <= rho
    return tuple(m for m in range(1, 2 * rho * rho + 3) if _totient(m) <= rho)


def _has_root_of_unity(poly, rho):
    return any(_pdivides(cyclotomic(m), poly) for m in _cyclotomic_orders(rho))


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial with ascending coefficients."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in _strip(self.coeffs))
        if not c:
            raise ValueError("the zero polynomial is not allowed")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_descending(cls, coeffs):
        return cls(tuple(reversed(list(coeffs))))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        return _peval(self.coeffs, x)

    def evaluate_matrix(self, M: "IntMatrix") -> "IntMatrix":
        n = M.dim
        acc = [[0] * n for _ in range(n)]
        for c in reversed(self.coeffs):
            acc = [[sum(acc[i][k] * M.rows[k][j] for k in range(n)) for j in range(n)]
                   for i in range(n)]
            for i in range(n):
                acc[i][i] += c
        return IntMatrix(acc)

    def __str__(self):
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("X" if i == 1 else f"X^{i}")
            if mono and abs(c) == 1:
                txt = ("-" if c < 0 else "+") + mono
            else:
                txt = f"{c:+d}" + mono
            terms.append(txt)
        s = "".join(terms)
        return s[1:] if s.startswith("+") else s


# ---------------------------------------------------------------------------
# integer matrices

def _bareiss_det(rows):
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def _matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p))
                 for i in range(n))


def _matvec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def _transpose(a):
    return tuple(zip(*a))


def _faddeev_leverrier(rows):
    """Characteristic polynomial det(XI - M), ascending, exact."""
    n = len(rows)
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    Mk = tuple(tuple(0 for _ in range(n)) for _ in range(n))
    for k in range(1, n + 1):
        Mk = _matmul(rows, Mk)
        c_prev = coeffs[n - k + 1]
        Mk = tuple(tuple(Mk[i][j] + (c_prev if i == j else 0) for j in range(n))
                   for i in range(n))
        AM = _matmul(rows, Mk)
        tr = sum(AM[i][i] for i in range(n))
        if isinstance(tr, Fraction):
            coeffs[n - k] = -tr / k
        else:
            q, r = divmod(-tr, k)
            assert r == 0
            coeffs[n - k] = q
    return coeffs


@dataclass(frozen=True)
class IntMatrix:
    """Square nonsingular integer matrix."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("matrix must be square and nonempty")
        for r, raw in zip(rows, self.rows):
            for x, y in zip(r, raw):
                if x != y:
                    raise ValueError("matrix entries must be integers")
        object.__setattr__(self, "rows", rows)
        if _bareiss_det(rows) == 0:
            raise SingularMatrixError("matrix is singular")

    @classmethod
    def identity(cls, n):
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def diag_blocks(cls, *blocks):
        n = sum(b.dim for b in blocks)
        rows = [[0] * n for _ in range(n)]
        off = 0
        for b in blocks:
            for i in range(b.dim):
                for j in range(b.dim):
                    rows[off + i][off + j] = b.rows[i][j]
            off += b.dim
        return cls(rows)

    @property
    def dim(self):
        return len(self.rows)

    @cached_property
    def det(self):
        return _bareiss_det(self.rows)

    @property
    def is_unimodular(self):
        return abs(self.det) == 1

    @cached_property
    def T(self):
        return IntMatrix(_transpose(self.rows))

    def tolist(self):
        return [list(r) for r in self.rows]

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            return IntMatrix(_matmul(self.rows, other.rows))
        return _matvec(self.rows, tuple(other))

    def __add__(self, other):
        return IntMatrix(tuple(tuple(x + y for x, y in zip(r, s))
                               for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other):
        return IntMatrix(tuple(tuple(x - y for x, y in zip(r, s))
                               for r, s in zip(self.rows, other.rows)))

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = IntMatrix.identity(self.dim).rows
        base = self.rows
        while e:
            if e & 1:
                result = _matmul(result, base)
            base = _matmul(base, base)
            e >>= 1
        return IntMatrix(result)

    @cached_property
    def adjugate(self):
        n = self.dim
        if n == 1:
            return ((1,),)
        adj = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [r[:j] + r[j + 1:] for k, r in enumerate(self.rows) if k != i]
                adj[j][i] = (-1) ** (i + j) * _bareiss_det(minor)
        return tuple(tuple(r) for r in adj)

    def inverse(self):
        if not self.is_unimodular:
            raise SingularMatrixError("inverse is not integral (|det| != 1)")
        return IntMatrix(tuple(tuple(x * self.det for x in r) for r in self.adjugate))

    def char_poly(self) -> IntPolynomial:
        return IntPolynomial(tuple(_faddeev_leverrier(self.rows)))

    def commutes_with(self, other):
        return _matmul(self.rows, other.rows) == _matmul(other.rows, self.rows)

    def __repr__(self):
        return f"IntMatrix({self.tolist()})"


def char_poly(M: IntMatrix) -> IntPolynomial:
    """Exact characteristic polynomial det(XI - M)."""
    return M.char_poly()


# ---------------------------------------------------------------------------
# irreducibility and ergodicity

def _divisors(n):
    n = abs(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _has_rational_root(c):
    a0, an = c[0], c[-1]
    for p in _divisors(a0):
        for q in _divisors(an):
            if math.gcd(p, q) != 1:
                continue
            for s in (p, -p):
                # homogeneous evaluation: sum a_i s^i q^(n-i)
                n = len(c) - 1
                if sum(a * s ** i * q ** (n - i) for i, a in enumerate(c)) == 0:
                    return True
    return False


def _find_integer_factor(c, m):
    """Search an integer factor of degree m of primitive c, or None."""
    n = len(c) - 1
    norm2 = math.isqrt(sum(a * a for a in c)) + 1
    bounds = [math.comb(m, i) * norm2 for i in range(m + 1)]
    test_points = [t for t in range(-3, 4) if _peval(c, t) != 0][: m + 2]
    pvals = {t: _peval(c, t) for t in test_points}
    mid = [np.arange(-bounds[i], bounds[i] + 1, dtype=object) for i in range(1, m)]
    grids = np.meshgrid(*mid, indexing="ij") if mid else []
    flat = [g.ravel() for g in grids]
    for lead in _divisors(c[-1]):
        for b0 in _divisors(c[0]):
            for const in (b0, -b0):
                ok = np.ones(flat[0].shape if flat else (1,), dtype=bool)
                for t in test_points:
                    q = const + lead * t ** m
                    q = q + sum(f * t ** (i + 1) for i, f in enumerate(flat)) if flat else np.array([q], dtype=object)
                    q = np.asarray(q, dtype=object)
                    nz = q != 0
                    good = np.zeros_like(ok)
                    good[nz] = (pvals[t] % q[nz]) == 0
                    ok &= good
                    if not ok.any():
                        break
                for idx in np.flatnonzero(ok):
                    cand = [const] + [int(f[idx]) for f in flat] + [lead]
                    if _pdivides(cand, c):
                        return cand
    return None


def is_irreducible_over_Q(P: IntPolynomial) -> bool:
    """Irreducibility over Q by bounded exhaustive factor search (degree <= 6)."""
    c = list(P.coeffs)
    n = len(c) - 1
    if n > 6:
        raise UnsupportedDegreeError(f"degree {n} > 6 is not supported")
    if n <= 0:
        return False
    if n == 1:
        return True
    g = 0
    for a in c:
        g = math.gcd(g, a)
    c = [a // g for a in c]
    if c[-1] < 0:
        c = [-a for a in c]
    if c[0] == 0 or _has_rational_root(c):
        return False
    for m in range(2, n // 2 + 1):
        if _find_integer_factor(c, m) is not None:
            return False
    return True


def is_ergodic(A: IntMatrix) -> bool:
    """No eigenvalue of ``A`` is a root of unity (exact cyclotomic test)."""
    return not _has_root_of_unity(list(A.char_poly().coeffs), A.dim)


# ---------------------------------------------------------------------------
# actions

@lru_cache(maxsize=4096)
def _tpow(M: IntMatrix, e: int):
    """Rows of (M^T)^e for e >= 0."""
    return (M.T ** e).rows


@lru_cache(maxsize=4096)
def _tpow_inv(M: IntMatrix, e: int):
    """(adj(M^T)^e, det(M)^e) so that (M^T)^-e = adj^e / det^e."""
    adjT = _transpose(M.adjugate)
    acc = tuple(tuple(int(i == j) for j in range(M.dim)) for i in range(M.dim))
    for _ in range(e):
        acc = _matmul(acc, adjT)
    return acc, M.det ** e


@dataclass(frozen=True)
class LatticeAction:
    """Commuting nonsingular integer matrices A_1..A_d acting on the torus.

    ``mode`` is "auto" when every generator is unimodular; otherwise
    "endo", in which case dual images may leave the integer lattice.
    """

    generators: tuple
    mode: str = None

    def __post_init__(self):
        gens = tuple(g if isinstance(g, IntMatrix) else IntMatrix(g) for g in self.generators)
        if not gens:
            raise InvalidActionError("an action needs at least one generator")
        rho = gens[0].dim
        if any(g.dim != rho for g in gens):
            raise InvalidActionError("generators must share one dimension")
        for i, j in itertools.combinations(range(len(gens)), 2):
            if not gens[i].commutes_with(gens[j]):
                raise InvalidActionError(f"generators {i} and {j} do not commute")
        inferred = "auto" if all(g.is_unimodular for g in gens) else "endo"
        mode = self.mode or inferred
        if mode not in ("auto", "endo"):
            raise InvalidActionError(f"unknown mode {mode!r}")
        if mode == "auto" and inferred == "endo":
            raise InvalidActionError("mode 'auto' requires |det| = 1 for every generator")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "mode", mode)

    @property
    def rank(self):
        return len(self.generators)

    @property
    def dim(self):
        return self.generators[0].dim

    def power(self, n) -> IntMatrix:
        """A^n; negative exponents only for unimodular generators."""
        acc = IntMatrix.identity(self.dim)
        for g, e in zip(self.generators, n):
            if e:
                acc = acc @ (g ** e)
        return acc

    def dual_apply(self, k, n):
        """(A^n)^T k, or None when the image is not integral (endo mode)."""
        y = tuple(int(x) for x in k)
        neg = []
        for g, e in zip(self.generators, n):
            if e > 0:
                y = _matvec(_tpow(g, e), y)
            elif e < 0:
                if self.mode == "auto":
                    y = _matvec(_tpow(g.inverse(), -e), y)
                else:
                    neg.append((g, -e))
        for g, e in neg:
            adj, det = _tpow_inv(g, e)
            z = _matvec(adj, y)
            if any(x % det for x in z):
                return None
            y = tuple(x // det for x in z)
        return y


def dual_apply(action: LatticeAction, k, n):
    return action.dual_apply(k, n)


def action_to_json(action: LatticeAction) -> dict:
    def enc(x):
        return x if abs(x) < 2 ** 63 else str(x)

    return {
        "dim": action.dim,
        "rank": action.rank,
        "generators": [[enc(x) for r in g.rows for x in r] for g in action.generators],
        "mode": action.mode,
    }


def action_from_json(doc: dict) -> LatticeAction:
    if "dim" in doc:
        rho = int(doc["dim"])
    else:
        first = doc["generators"][0]
        rho = len(first) if first and isinstance(first[0], list) else math.isqrt(len(first))
    gens = []
    for g in doc["generators"]:
        flat = [int(x) for x in (itertools.chain.from_iterable(g) if g and isinstance(g[0], list) else g)]
        if len(flat) != rho * rho:
            raise InvalidActionError(f"generator has {len(flat)} entries, expected {rho * rho}")
        gens.append(IntMatrix([flat[i * rho:(i + 1) * rho] for i in range(rho)]))
    if "rank" in doc and int(doc["rank"]) != len(gens):
        raise InvalidActionError("rank does not match the number of generators")
    return LatticeAction(tuple(gens), doc.get("mode"))


# ---------------------------------------------------------------------------
# total ergodicity

@dataclass(frozen=True)
class TotalErgodicity:
    verdict: object  # True, False or None (unknown)
    path: str
    certificate: dict = field(default_factory=dict)

    @property
    def label(self):
        return {True: "true", False: "false", None: "unknown"}[self.verdict]


def _frac_power(action, n):
    """A^n as a Fraction matrix (any sign of exponents)."""
    rho = action.dim
    acc = tuple(tuple(Fraction(int(i == j)) for j in range(rho)) for i in range(rho))
    for g, e in zip(action.generators, n):
        if e > 0:
            acc = _matmul(acc, (g ** e).rows)
        elif e < 0:
            adj = g.adjugate
            inv = tuple(tuple(Fraction(x, g.det) for x in r) for r in adj)
            for _ in range(-e):
                acc = _matmul(acc, inv)
    return acc


def _box(d, radius, half=False):
    for n in itertools.product(range(-radius, radius + 1), repeat=d):
        if not any(n):
            continue
        if half:
            first = next(x for x in n if x)
            if first < 0:
                continue
        yield n


def _factorize(n):
    n, out, p = abs(n), {}, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _rank_q(rows):
    a = [[Fraction(x) for x in r] for r in rows]
    rank, cols = 0, len(a[0]) if a else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][c] != 0:
                f = a[i][c] / a[rank][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def _log_modulus_matrix(action, B):
    """Rows log|lambda_{i,s}| of each generator on the eigenbasis of B."""
    Bf = np.array(B.rows, dtype=float)
    _, vecs = np.linalg.eig(Bf)
    L = np.empty((action.rank, action.dim))
    resid = 0.0
    for i, g in enumerate(action.generators):
        G = np.array(g.rows, dtype=float)
        for s in range(action.dim):
            v = vecs[:, s]
            lam = np.vdot(v, G @ v) / np.vdot(v, v)
            resid = max(resid, float(np.linalg.norm(G @ v - lam * v) / max(1.0, abs(lam))))
            L[i, s] = math.log(abs(lam))
    return L, resid


def is_totally_ergodic(action: LatticeAction, search_radius: int = 4) -> TotalErgodicity:
    """Semi-decision for total ergodicity of the Z^d action.

    Paths: (c) a box exponent with a root-of-unity eigenvalue gives False;
    (a) an irreducible word plus the box check plus either independence of
    the prime exponents of |det A_i| (b) or a rank-d log-modulus matrix
    gives True.  Otherwise the verdict is unknown.
    """
    rho, d = action.dim, action.rank
    checks = {"box_radius": search_radius}
    for n in _box(d, search_radius, half=True):
        if action.mode == "auto" or all(e >= 0 for e in n):
            poly = list(action.power(n).char_poly().coeffs)
        else:
            poly = _faddeev_leverrier(_frac_power(action, n))
        if _has_root_of_unity(poly, rho):
            return TotalErgodicity(False, "root-of-unity", {"exponent": list(n), **checks})
    checks["box_clear"] = True

    if rho > 6:
        return TotalErgodicity(None, "unknown", {**checks, "reason": "dimension > 6"})
    word = None
    candidates = sorted(
        (n for n in _box(d, 2) if action.mode == "auto" or all(e >= 0 for e in n)),
        key=lambda n: (sum(map(abs, n)), [-x for x in n]),
    )
    for n in candidates:
        B = action.power(n)
        if is_irreducible_over_Q(B.char_poly()):
            word = (n, B)
            break
    if word is None:
        return TotalErgodicity(None, "unknown", {**checks, "reason": "no irreducible word found"})
    checks["irreducible_word"] = list(word[0])

    primes = sorted({p for g in action.generators for p in _factorize(g.det)})
    if primes:
        expo = [[_factorize(g.det).get(p, 0) for p in primes] for g in action.generators]
        if _rank_q(expo) == d:
            return TotalErgodicity(True, "irreducible+det-independence",
                                   {**checks, "primes": primes, "exponents": expo})
    L, resid = _log_modulus_matrix(action, word[1])
    sv = np.linalg.svd(L, compute_uv=False)
    checks["log_modulus_singular_values"] = [float(x) for x in sv]
    checks["eigen_residual"] = resid
    if len(sv) == d and sv[-1] > 1e-8 * max(1.0, sv[0]) and resid < 1e-6:
        return TotalErgodicity(True, "irreducible+box", checks)
    return TotalErgodicity(None, "unknown", {**checks, "reason": "no independence certificate"})


# ---------------------------------------------------------------------------
# orbit sections

def _norm2(k):
    return sum(x * x for x in k)


@dataclass(frozen=True)
class OrbitClass:
    representative: tuple
    members: tuple  # ((character, exponent), ...), exponent relative to representative


@dataclass(frozen=True)
class OrbitSection:
    classes: tuple
    radius: int

    def class_of(self):
        return {k: (j, n) for j, c in enumerate(self.classes) for k, n in c.members}


@lru_cache(maxsize=256)
def growth_constants(action):
    """(C, tau) fitted on a small ball of characters; cached per action."""
    from .spectral import daka_estimate

    est = daka_estimate(action, K=3.0 if action.dim <= 3 else 2.0, N=6)
    return est.C, est.tau


def _certified_radius(action, kmax_norm2):
    C, tau = growth_constants(action)
    K = math.sqrt(kmax_norm2)
    R = ((action.dim + 1) * math.log(max(K, 1.0)) - math.log(C)) / tau
    return max(1, math.ceil(R))


def orbit_section(action: LatticeAction, support: Iterable, radius: int = None,
                  max_radius: int = 24) -> OrbitSection:
    """Partition ``support`` into dual-orbit classes with minimal-norm representatives."""
    support = sorted({tuple(int(x) for x in k) for k in support})
    if any(not any(k) for k in support):
        raise ValueError("support must exclude the zero character")
    if not support:
        return OrbitSection((), 0)
    if radius is None:
        radius = _certified_radius(action, max(_norm2(k) for k in support))
        if radius > max_radius:
            worst = max(support, key=_norm2)
            raise OrbitSearchError(
                f"certified search radius {radius} exceeds max_radius={max_radius}",
                pair=(worst, worst), radius=radius)
    d = action.rank
    parent = {k: k for k in support}
    offset = {k: (0,) * d for k in support}  # k = (A^offset)^T parent[k]

    def find(k):
        path = []
        while parent[k] != k:
            path.append(k)
            k = parent[k]
        root, acc = k, (0,) * d
        for x in reversed(path):
            acc = tuple(a + b for a, b in zip(acc, offset[x]))
            offset[x], parent[x] = acc, root
        return root

    seen = {}
    for k in support:
        images = {}
        for a in itertools.product(range(radius + 1), repeat=d):
            img = action.dual_apply(k, a)
            images.setdefault(img, a)
        for img, a in images.items():
            if img in seen:
                k0, a0 = seen[img]
                # (A^a0)^T k0 = (A^a)^T k  =>  k = (A^(a0-a))^T k0
                n = tuple(x - y for x, y in zip(a0, a))
                r0, r1 = find(k0), find(k)
                o0, o1 = offset[k0], offset[k]
                if r0 != r1:
                    # k = A^(o1) r1 and k = A^(n + o0) r0
                    parent[r1] = r0
                    offset[r1] = tuple(x + y - z for x, y, z in zip(n, o0, o1))
                elif tuple(x + y for x, y in zip(n, o0)) != o1:
                    raise InvalidActionError(f"dual action is not free at {k}")
            else:
                seen[img] = (k, a)
    groups = {}
    for k in support:
        groups.setdefault(find(k), []).append(k)
    classes = []
    for root, ks in groups.items():
        rep = min(ks, key=lambda k: (_norm2(k), k))
        orep = offset[rep]
        members = tuple(sorted(
            (k, tuple(x - y for x, y in zip(offset[k], orep))) for k in ks))
        classes.append(OrbitClass(rep, members))
    classes.sort(key=lambda c: (_norm2(c.representative), c.representative))
    return OrbitSection(tuple(classes), radius)
