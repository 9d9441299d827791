"""Monte Carlo on the dyadic grid.

Torus points are x = v / 2^B with v in (Z / 2^B)^rho.  Integer matrices
preserve the grid, so f(A^l x) is evaluated through the dual identity
<k, A^l x> = <(A^l)^T k, x> with the phase reduced exactly modulo 1.

The vectorised path stores each coordinate scaled to 128 bits
(V = v * 2^(128-B)) as two uint64 limbs.  The phase of a character w is the
top 64 bits of <w, V> mod 2^128, computed exactly with wrapping uint64
arithmetic.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import kernels
from .cumulants import univariate_cumulants
from .errors import ConfigurationError
from .lattice import LatticeAction, action_from_json
from .spectral import (barycenter_variance, rotated_variance, spectral_density, variance)
from .trigpoly import TrigPolynomial

MASK64 = (1 << 64) - 1
M32 = np.uint64(0xFFFFFFFF)
S32 = np.uint64(32)
SCALE = 2.0 ** -64
CHUNK = 1024  # samples per RNG substream; fixes results independently of threads


# ---------------------------------------------------------------------------
# exact point API (any precision)

@dataclass(frozen=True)
class DyadicPoint:
    v: tuple
    B: int

    def as_float(self):
        return np.array([x / 2 ** self.B for x in self.v])


def _draw_words(rng, m, rho, B):
    W = max(2, -(-B // 64))
    return rng.integers(0, 2 ** 64, size=(m, rho, W), dtype=np.uint64, endpoint=False), W


def _chunk_rngs(seed, M):
    n_chunks = -(-M // CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    return [(np.random.Generator(np.random.PCG64(s)), min(CHUNK, M - i * CHUNK))
            for i, s in enumerate(seqs)]


def sample_points(rho, B, M, seed):
    """M uniform grid points at precision B, one RNG substream per chunk."""
    if B < 64:
        raise ConfigurationError("precision B must be >= 64")
    out = []
    for rng, m in _chunk_rngs(seed, M):
        words, W = _draw_words(rng, m, rho, B)
        for row in words:
            v = []
            for coord in row:
                x = 0
                for w in coord:
                    x = (x << 64) | int(w)
                v.append(x >> (64 * W - B))
            out.append(DyadicPoint(tuple(v), B))
    return out


def evolve(action: LatticeAction, x: DyadicPoint, l) -> DyadicPoint:
    """v -> A^l v mod 2^B, exact."""
    if any(e < 0 for e in l):
        raise ValueError("evolve is defined for l >= 0")
    mod = 1 << x.B
    v = tuple(x.v)
    for g, e in zip(action.generators, l):
        for _ in range(e):
            v = tuple(sum(a * b for a, b in zip(row, v)) % mod for row in g.rows)
    return DyadicPoint(v, x.B)


def evaluate(f: TrigPolynomial, x: DyadicPoint):
    """f(x) with each phase <k, v> reduced mod 2^B before the exponential."""
    mod = 1 << x.B
    total = 0j
    for k, c in f.coeffs.items():
        ph = sum(a * b for a, b in zip(k, x.v)) % mod
        total += complex(c) * np.exp(2j * np.pi * (ph / mod))
    return total


def evaluate_dual(f: TrigPolynomial, action, x: DyadicPoint, l):
    """f(A^l x) through ((A^l)^T k, v): never moves the point."""
    mod = 1 << x.B
    total = 0j
    for k, c in f.coeffs.items():
        w = action.dual_apply(k, l)
        ph = sum(a * b for a, b in zip(w, x.v)) % mod
        total += complex(c) * np.exp(2j * np.pi * (ph / mod))
    return total


# ---------------------------------------------------------------------------
# vectorised 128-bit path

@dataclass
class DyadicBatch:
    hi: np.ndarray  # (m, rho) uint64, top word of V
    lo: np.ndarray  # (m, rho) uint64
    B: int

    def __len__(self):
        return self.hi.shape[0]

    def to_points(self):
        return [DyadicPoint(tuple(((int(h) << 64) | int(l)) >> (128 - self.B)
                                  for h, l in zip(hr, lr)), self.B)
                for hr, lr in zip(self.hi, self.lo)]


def _batch_from_words(words, W, B):
    if W != 2:
        raise ConfigurationError("the vectorised path supports B <= 128")
    hi = words[:, :, 0].copy()
    lo = words[:, :, 1].copy()
    drop = 128 - B
    if drop >= 64:
        lo[:] = 0
        hi = (hi >> np.uint64(drop - 64)) << np.uint64(drop - 64)
    elif drop:
        lo = (lo >> np.uint64(drop)) << np.uint64(drop)
    return DyadicBatch(hi, lo, B)


def sample_batches(rho, B, M, seed):
    """Same points as ``sample_points`` split into per-substream batches."""
    if B < 64:
        raise ConfigurationError("precision B must be >= 64")
    if B > 128:
        raise ConfigurationError("the vectorised path supports B <= 128")
    out = []
    for rng, m in _chunk_rngs(seed, M):
        words, W = _draw_words(rng, m, rho, B)
        out.append(_batch_from_words(words, W, B))
    return out


def _mulhi(a, b):
    a0, a1 = a & M32, a >> S32
    b0, b1 = b & M32, b >> S32
    p00, p01, p10, p11 = a0 * b0, a0 * b1, a1 * b0, a1 * b1
    mid = (p00 >> S32) + (p01 & M32) + (p10 & M32)
    return p11 + (p01 >> S32) + (p10 >> S32) + (mid >> S32)


def _phases(wh, wl, batch: DyadicBatch):
    """Top 64 bits of <w, V> mod 2^128 as floats in [0,1): shape (pairs, samples).

    Exact: high products, the 32-bit split of the low product and the carries
    out of the low word are all accumulated with wrapping uint64 arithmetic.
    """
    P, m = wh.shape[0], len(batch)
    top = np.zeros((P, m), dtype=np.uint64)
    low = np.zeros((P, m), dtype=np.uint64)
    t1 = np.empty((P, m), dtype=np.uint64)
    t2 = np.empty((P, m), dtype=np.uint64)
    t3 = np.empty((P, m), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for i in range(wh.shape[1]):
            a_h, a_l = wh[:, i:i + 1], wl[:, i:i + 1]
            a0, a1 = a_l & M32, a_l >> S32
            v_h, v_l = batch.hi[None, :, i], batch.lo[None, :, i]
            b0, b1 = v_l & M32, v_l >> S32
            np.multiply(a_h, v_l, out=t1)
            top += t1
            np.multiply(a_l, v_h, out=t1)
            top += t1
            # mulhi(a_l, v_l) from 32-bit halves
            np.multiply(a1, b1, out=t1)
            top += t1
            np.multiply(a0, b1, out=t2)
            np.right_shift(t2, S32, out=t3)
            top += t3
            np.bitwise_and(t2, M32, out=t2)
            np.multiply(a1, b0, out=t1)
            np.right_shift(t1, S32, out=t3)
            top += t3
            np.bitwise_and(t1, M32, out=t1)
            t2 += t1
            np.multiply(a0, b0, out=t1)
            np.right_shift(t1, S32, out=t1)
            t2 += t1
            np.right_shift(t2, S32, out=t2)
            top += t2
            # low word and its carry
            np.multiply(a_l, v_l, out=t1)
            low += t1
            np.less(low, t1, out=t3, casting="unsafe")
            top += t3
    return top.astype(np.float64) * SCALE


def _split128(x):
    x &= (1 << 128) - 1
    return x >> 64, x & MASK64


@dataclass
class _PairTable:
    """Distinct dual characters w = (A^l)^T k mod 2^128.

    Each w carries amplitudes so that its contribution to the statistic is
    cos_amp * cos(2 pi phi) + sin_amp * sin(2 pi phi).
    """

    wh: np.ndarray
    wl: np.ndarray
    cos_amp: np.ndarray
    sin_amp: np.ndarray


def _pair_table(f: TrigPolynomial, action, points, weights, theta=None):
    coeffs = f.coeffs
    real = f.is_real(tol=1e-15)
    # for real f use one of each {k, -k} and add the conjugate term
    keys = [k for k in sorted(coeffs) if k > tuple(-x for x in k)] if real else sorted(coeffs)
    alpha, beta = {}, {}
    for l, R in zip(points, weights):
        l = tuple(int(x) for x in l)
        if R == 0:
            continue
        a = complex(R)
        if theta is not None:
            a *= np.exp(2j * np.pi * float(np.dot(l, theta)))
        for k in keys:
            w = action.dual_apply(k, l)
            if w is None:
                raise ConfigurationError("summation points must be nonnegative in endomorphism mode")
            w = tuple(x & ((1 << 128) - 1) for x in w)
            c = complex(coeffs[k])
            alpha[w] = alpha.get(w, 0j) + a * c
            if real:
                beta[w] = beta.get(w, 0j) + a * c.conjugate()
    ws = list(alpha)
    wh = np.array([[x >> 64 for x in w] for w in ws], dtype=np.uint64)
    wl = np.array([[x & MASK64 for x in w] for w in ws], dtype=np.uint64)
    al = np.array([alpha[w] for w in ws], dtype=complex)
    be = np.array([beta.get(w, 0j) for w in ws], dtype=complex)
    # alpha e(phi) + beta e(-phi)
    return _PairTable(wh, wl, al + be, 1j * (al - be))


def _stat_chunk(table: _PairTable, batch: DyadicBatch, block=None):
    m = len(batch)
    P = len(table.cos_amp)
    block = block or max(1, 32768 // max(m, 1))
    out = np.zeros(m, dtype=complex)
    for s in range(0, P, block):
        ph = _phases(table.wh[s:s + block], table.wl[s:s + block], batch)
        ph *= 2 * np.pi
        out += table.cos_amp[s:s + block] @ np.cos(ph)
        out += table.sin_amp[s:s + block] @ np.sin(ph)
    return out


def _run_chunks(fn, batches, threads):
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(batches) == 1:
        return np.concatenate([fn(b) for b in batches])
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return np.concatenate(list(ex.map(fn, batches)))


def weighted_sums(f, action, points, weights, batches, theta=None, threads=None):
    """sum_l R(l) e(<l,theta>) f(A^l x) for every sampled x (unnormalised)."""
    table = _pair_table(f, action, points, weights, theta)
    return _run_chunks(lambda b: _stat_chunk(table, b), batches, threads)


def normalized_sums(f, action, seq: kernels.SummationSequence, batches, theta=None, threads=None):
    if len(seq) == 0 or seq.norm2 == 0:
        raise ConfigurationError("empty summation sequence")
    if theta is not None and not np.any(theta):
        theta = None
    s = weighted_sums(f, action, seq.points, seq.weights, batches, theta, threads)
    return s / math.sqrt(seq.norm2)


def normalized_sum(f, action, seq, x: DyadicPoint, theta=None):
    """Single-point version on the exact Python-int path."""
    if len(seq) == 0 or seq.norm2 == 0:
        raise ConfigurationError("empty summation sequence")
    total = 0j
    for l, R in zip(seq.points, seq.weights):
        l = tuple(int(v) for v in l)
        ph = 1.0 if theta is None else np.exp(2j * np.pi * float(np.dot(l, theta)))
        total += R * ph * evaluate_dual(f, action, x, l)
    return total / math.sqrt(seq.norm2)


def barycenter_sums(f, action, p, n, batches, threads=None):
    """c_n^{1/2} P^n f(x) with P f = sum_j p_j f o A_j."""
    if n > 512:
        raise ConfigurationError("barycenter sums support n <= 512")
    seq = kernels.barycenter_weights(p, n)
    s = weighted_sums(f, action, seq.points, seq.weights, batches, None, threads)
    scale = math.sqrt(kernels.barycenter_normalization(p, n)) if n > 0 else 1.0
    return s * scale


def barycenter_sum(f, action, p, n, x: DyadicPoint):
    seq = kernels.barycenter_weights(p, n)
    total = sum(w * evaluate_dual(f, action, x, tuple(int(v) for v in l))
                for l, w in zip(seq.points, seq.weights))
    scale = math.sqrt(kernels.barycenter_normalization(p, n)) if n > 0 else 1.0
    return total * scale


def expected_second_moment(data, seq: kernels.SummationSequence, theta=None):
    """Exact E|normalised sum|^2 for a finite sequence via phi_hat."""
    coef = data.fourier_coefficients()
    table = {tuple(int(x) for x in p): complex(w) for p, w in zip(seq.points, seq.weights)}
    if theta is not None:
        table = {l: w * np.exp(2j * np.pi * float(np.dot(l, theta))) for l, w in table.items()}
    total = 0j
    for m, c in coef.items():
        # sum over l of a_l conj(a_{l - m}) times phi_hat(-m)
        acc = 0j
        for l, a in table.items():
            b = table.get(tuple(x - y for x, y in zip(l, m)))
            if b is not None:
                acc += a * b.conjugate()
        total += complex(coef.get(tuple(-x for x in m), 0)) * acc
    return float(total.real) / seq.norm2


# ---------------------------------------------------------------------------
# experiments

@dataclass
class ExperimentConfig:
    action: LatticeAction
    f: TrigPolynomial
    sequence: dict = field(default_factory=lambda: {"kind": "square", "side": 64})
    thetas: list = field(default_factory=list)
    M: int = 5000
    seed: int = 0
    B: int = 128
    threads: int = None
    thresholds: dict = field(default_factory=dict)
    target: str = "auto"  # "auto", "normal" or "delta0"

    def __post_init__(self):
        if self.M < 100:
            raise ConfigurationError("M must be >= 100")
        if self.B < 64:
            raise ConfigurationError("precision B must be >= 64")

    @classmethod
    def from_json(cls, doc, base_dir="."):
        act = doc["action"]
        if isinstance(act, str):
            with open(os.path.join(base_dir, act)) as fh:
                act = json.load(fh)
        f = doc["f"]
        if isinstance(f, str):
            with open(os.path.join(base_dir, f)) as fh:
                f = json.load(fh)
        return cls(action=action_from_json(act), f=TrigPolynomial.from_json(f),
                   sequence=doc.get("sequence", {"kind": "square", "side": 64}),
                   thetas=[list(t) for t in doc.get("thetas", [])], M=int(doc.get("M", 5000)),
                   seed=int(doc.get("seed", 0)), B=int(doc.get("B", 128)),
                   threads=doc.get("threads"), thresholds=doc.get("thresholds", {}),
                   target=doc.get("target", "auto"))


DEFAULT_THRESHOLDS = {"ks": 0.03, "c3": 0.15, "c4": 0.3, "var_rel": 0.10,
                      "ks_rotated": 0.04, "delta0_second_moment": 0.05}


@dataclass
class CltReport:
    limit: str
    sigma2: float
    mean: float
    variance: float
    expected_variance: float
    ks: float
    cumulants: list
    per_theta: list
    checks: dict
    samples: np.ndarray = field(repr=False, default=None)
    abs_quantiles: list = None  # |statistic| at levels 0.5, 0.9, 0.99, 1 (delta0 target)

    @property
    def passed(self):
        return all(self.checks.values())

    def to_dict(self):
        return {"limit": self.limit, "sigma2": self.sigma2, "mean": self.mean,
                "variance": self.variance, "expected_variance": self.expected_variance,
                "ks": self.ks, "cumulants": self.cumulants, "per_theta": self.per_theta,
                "checks": self.checks, "passed": self.passed,
                "abs_quantiles": self.abs_quantiles}


def ks_normal(x, var):
    return float(stats.kstest(np.asarray(x, dtype=float), "norm", args=(0.0, math.sqrt(var))).statistic)


def _statistic(config: ExperimentConfig, batches, theta=None):
    seq_doc = config.sequence
    if seq_doc.get("kind") == "barycenter":
        p = kernels.ProbabilityVector(seq_doc["p"])
        if theta is not None:
            raise ConfigurationError("rotations are not defined for barycenter sums")
        return barycenter_sums(config.f, config.action, p, int(seq_doc["n"]), batches, config.threads)
    seq = kernels.from_json({"dim": config.action.rank, **seq_doc})
    return normalized_sums(config.f, config.action, seq, batches, theta, config.threads)


def run_clt_experiment(config: ExperimentConfig) -> CltReport:
    th = {**DEFAULT_THRESHOLDS, **config.thresholds}
    act, f = config.action, config.f
    data = spectral_density(f, act)
    barycentric = config.sequence.get("kind") == "barycenter"
    if barycentric:
        sigma2 = barycenter_variance(f, act, data=data)
        seq = None
        expected = sigma2
    else:
        sigma2 = float(variance(f, act, data))
        seq = kernels.from_json({"dim": act.rank, **config.sequence})
        expected = expected_second_moment(data, seq)
    degenerate = sigma2 <= 1e-12 * max(f.norm2_squared, 1e-300)
    if config.target == "normal" and degenerate:
        raise ConfigurationError("theoretical variance is zero; use the delta0 target")
    limit = "delta0" if (config.target == "delta0" or (config.target == "auto" and degenerate)) else "normal"

    batches = sample_batches(act.dim, config.B, config.M, config.seed)
    S = _statistic(config, batches)
    x = S.real
    mean = float(np.mean(x))
    var = float(np.mean(np.abs(S) ** 2))
    checks = {}
    quant = None
    checks["unbiased"] = abs(mean) <= 4 * max(float(np.std(x)), 1e-300) / math.sqrt(len(x)) + 1e-12
    if limit == "normal":
        ks = ks_normal(x, sigma2)
        z = x / math.sqrt(sigma2)
        cum = [float(c) for c in univariate_cumulants(z, 4)]
        checks["ks"] = ks <= th["ks"]
        checks["c3"] = abs(cum[2]) <= th["c3"]
        checks["c4"] = abs(cum[3]) <= th["c4"]
        checks["variance"] = abs(var - sigma2) <= th["var_rel"] * sigma2
    else:
        ks = None
        quant = np.quantile(np.abs(S), [0.5, 0.9, 0.99, 1.0]).tolist()
        cum = [float(c) for c in univariate_cumulants(x, 4)]
        checks["delta0"] = var <= th["delta0_second_moment"] * max(f.norm2_squared, 1e-300)
    per_theta = []
    for theta in config.thetas:
        theta = np.asarray(theta, dtype=float)
        St = _statistic(config, batches, theta)
        s2 = rotated_variance(f, act, theta, data)
        exp_t = expected_second_moment(data, seq, theta) if seq is not None else s2
        entry = {"theta": theta.tolist(), "sigma2": s2, "expected_second_moment": exp_t,
                 "second_moment": float(np.mean(np.abs(St) ** 2)),
                 "mean_re": float(np.mean(St.real)), "mean_im": float(np.mean(St.imag))}
        if s2 > 1e-12:
            entry.update({
                "ks_re_half": ks_normal(St.real, s2 / 2), "ks_im_half": ks_normal(St.imag, s2 / 2),
                "ks_re_full": ks_normal(St.real, s2), "ks_im_full": ks_normal(St.imag, s2),
            })
            checks[f"ks_theta_{len(per_theta)}"] = entry["ks_re_half"] <= th["ks_rotated"]
        per_theta.append(entry)
    return CltReport(limit, sigma2, mean, var, expected, ks, cum, per_theta, checks, S, quant)
