"""Correlations, spectral densities, variances and coboundary decompositions.

For a trigonometric polynomial f the dual orbits of its support are split
by ``orbit_section``.  On class j (representative chi_j, members
k = (A^n)^T chi_j) the series gamma_j(t) = sum_n c_f(k) e(<n,t>) is finite
and the spectral density is phi_f = sum_j |gamma_j|^2.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GrowthEstimationError, ResolutionError
from .lattice import LatticeAction, OrbitSection, orbit_section
from .trigpoly import TrigPolynomial, _conj


def _e(x):
    return cmath.exp(2j * math.pi * x)


# ---------------------------------------------------------------------------
# correlations

def correlation(f: TrigPolynomial, action: LatticeAction, n):
    """sum_k c_f((A^n)^T k) conj(c_f(k)); non-lattice images are absent."""
    total = 0
    for k, c in f.coeffs.items():
        y = action.dual_apply(k, n)
        if y is not None and y in f.coeffs:
            total += f.coeffs[y] * _conj(c)
    return total


# ---------------------------------------------------------------------------
# spectral density

@dataclass(frozen=True)
class SpectralData:
    section: OrbitSection
    gamma: tuple  # per class: dict exponent -> coefficient
    d: int

    def gamma_at(self, t):
        """Array (classes, ...) of gamma_j(t) for t of shape (..., d)."""
        t = np.asarray(t, dtype=float)
        if self.d == 1 and (t.ndim == 0 or t.shape[-1] != 1):
            t = t[..., None]
        out = []
        for g in self.gamma:
            ns = np.array(list(g), dtype=float).reshape(-1, self.d)
            cs = np.array([complex(c) for c in g.values()])
            out.append(np.exp(2j * np.pi * (t @ ns.T)) @ cs)
        return np.array(out)

    def density(self, t):
        """phi_f(t) = sum_j |gamma_j(t)|^2."""
        g = self.gamma_at(t)
        return np.sum(np.abs(g) ** 2, axis=0) if len(g) else np.zeros(np.shape(t)[:-1])

    def fourier_coefficients(self):
        """Exact coefficients phi_hat(m) = sum_j sum_n c_{n+m} conj(c_n)."""
        out = {}
        for g in self.gamma:
            for n1, c1 in g.items():
                for n2, c2 in g.items():
                    m = tuple(a - b for a, b in zip(n1, n2))
                    out[m] = out.get(m, 0) + c1 * _conj(c2)
        return out

    def degree(self):
        return max((max(abs(x) for x in m) for m in self.fourier_coefficients()), default=0)


def spectral_density(f: TrigPolynomial, action: LatticeAction, section: OrbitSection = None,
                     **orbit_kw) -> SpectralData:
    section = section or orbit_section(action, f.support(), **orbit_kw)
    gamma = []
    for cls in section.classes:
        gamma.append({n: f.coeffs[k] for k, n in cls.members})
    return SpectralData(section, tuple(gamma), action.rank)


def _grid(d, size):
    axes = [np.arange(size) / size] * d
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def density_grid(data: SpectralData, size=64):
    return data.density(_grid(data.d, size))


def correlation_support(data: SpectralData):
    return sorted(data.fourier_coefficients())


# ---------------------------------------------------------------------------
# variances

def variance(f, action, data: SpectralData = None):
    """sigma^2(f) = phi_f(0) = sum over classes of |sum of coefficients|^2."""
    data = data or spectral_density(f, action)
    return sum(abs(sum(g.values())) ** 2 for g in data.gamma)


def variance_by_correlations(f, action, data: SpectralData = None):
    """sum_n correlation(f, n) over the (finite) set of n where it can be nonzero."""
    data = data or spectral_density(f, action)
    return sum(correlation(f, action, m) for m in correlation_support(data))


def rotated_variance(f, action, theta, data: SpectralData = None):
    """Limit of E|sum_l e(<l,theta>) f(A^l x)|^2 / |D| for Folner squares.

    Equal to phi_f(-theta), which is phi_f(theta) for real f.
    """
    data = data or spectral_density(f, action)
    theta = np.asarray(theta, dtype=float)
    return float(data.density(-theta))


def barycenter_variance(f, action, p=None, data: SpectralData = None, min_points=1024):
    """sigma_P^2 = int_T phi_f(u, ..., u) du by an exact-size uniform quadrature."""
    data = data or spectral_density(f, action)
    deg = max((abs(sum(m)) for m in data.fourier_coefficients()), default=0)
    L = max(min_points, 1 << (2 * deg + 1).bit_length())
    u = np.arange(L) / L
    t = np.repeat(u[:, None], data.d, axis=1)
    return float(np.mean(data.density(t)))


def barycenter_variance_exact(data: SpectralData):
    """Sum of phi_hat(m) over m with m_1 + ... + m_d = 0."""
    return sum(c for m, c in data.fourier_coefficients().items() if sum(m) == 0)


def m_theta(f, action, theta, data: SpectralData = None):
    """Map representative -> gamma_j(theta)."""
    data = data or spectral_density(f, action)
    vals = data.gamma_at(np.asarray(theta, dtype=float))
    return {cls.representative: complex(v) for cls, v in zip(data.section.classes, vals)}


# ---------------------------------------------------------------------------
# coboundaries

@dataclass
class CoboundaryDecomposition:
    transfer: list  # u_1..u_d
    residual: TrigPolynomial
    theta: tuple
    reconstruction_error: float = 0.0

    @property
    def is_coboundary(self):
        return len(self.residual) == 0


def _phase(theta, m):
    if theta is None:
        return 1
    x = sum(a * b for a, b in zip(theta, m))
    return 1 if x == 0 else _e(x)


def _poly_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def _power_minus_identity(d, t, m):
    e = [0] * d
    e[t] = m
    return {tuple(e): 1, (0,) * d: -1}


def _v_poly(d, t, m):
    """V_t with S_t^m = I + (I - S_t) V_t."""
    out = {}
    if m > 0:
        for s in range(m):
            e = [0] * d
            e[t] = s
            out[tuple(e)] = -1
    else:
        for s in range(1, -m + 1):
            e = [0] * d
            e[t] = -s
            out[tuple(e)] = 1
    return out


def _transfer_terms(m):
    """For S^m - I = sum_t (I - S_t) W_t, return the polynomials W_t."""
    d = len(m)
    active = [t for t in range(d) if m[t] != 0]
    W = [dict() for _ in range(d)]
    for size in range(1, len(active) + 1):
        for S in itertools.combinations(active, size):
            t0 = S[0]
            poly = _v_poly(d, t0, m[t0])
            for t in S[1:]:
                poly = _poly_mul(poly, _power_minus_identity(d, t, m[t]))
            for e, c in poly.items():
                W[t0][e] = W[t0].get(e, 0) + c
    return W


def apply_coboundary_operator(u: TrigPolynomial, action, t, theta=None):
    """(I - e(theta_t) A_t) u with A_t u = u o A_t."""
    e = [0] * action.rank
    e[t] = 1
    ph = 1 if theta is None or theta[t] == 0 else _e(theta[t])
    moved = {action.dual_apply(k, e): ph * c for k, c in u.coeffs.items()}
    return u - TrigPolynomial(u.rho, moved)


def solve_coboundary(f: TrigPolynomial, action: LatticeAction, theta=None,
                     data: SpectralData = None) -> CoboundaryDecomposition:
    """Write f = v + sum_t (I - e(theta_t) A_t) u_t with v = sum_j gamma_j(-theta) chi_j.

    Each member c chi_k with k = (A^n)^T chi_j equals c e(-<n,theta>) S^n chi_j
    for S_t = e(theta_t) A_t; S^n - I is expanded into sum_t (I - S_t) W_t.
    In endomorphism mode members are first moved to the upper corner of
    their class so that every intermediate character stays integral.
    """
    d = action.rank
    if theta is not None:
        theta = tuple(float(x) for x in theta)
        if not any(theta):
            theta = None
    data = data or spectral_density(f, action)
    u = [dict() for _ in range(d)]
    v = {}

    def push(base, m, coeff):
        # coeff * S^m chi_base = coeff chi_base + sum_t (I - S_t) W_t chi_base
        for t, W in enumerate(_transfer_terms(m)):
            for e, c in W.items():
                k = action.dual_apply(base, e)
                assert k is not None, "intermediate character left the lattice"
                u[t][k] = u[t].get(k, 0) + coeff * c * _phase(theta, e)

    for cls in data.section.classes:
        rep = cls.representative
        acc = 0
        if action.mode == "auto" or all(all(x >= 0 for x in n) for _, n in cls.members):
            for k, n in cls.members:
                coeff = f.coeffs[k] * _conj_phase(theta, n)
                push(rep, n, coeff)
                acc += coeff
        else:
            corner = tuple(max(n[i] for _, n in cls.members) for i in range(d))
            top = action.dual_apply(rep, corner)
            top_acc = 0
            for k, n in cls.members:
                m = tuple(a - b for a, b in zip(n, corner))
                coeff = f.coeffs[k] * _conj_phase(theta, m)
                push(top, m, coeff)
                top_acc += coeff
            # top_acc chi_top = top_acc e(-<corner,theta>) S^corner chi_rep
            coeff = top_acc * _conj_phase(theta, corner)
            push(rep, corner, coeff)
            acc = coeff
        if acc != 0:
            v[rep] = acc
    transfer = [TrigPolynomial(f.rho, ut) for ut in u]
    residual = TrigPolynomial(f.rho, v)
    recon = residual
    for t, ut in enumerate(transfer):
        recon = recon + apply_coboundary_operator(ut, action, t, theta)
    diff = recon - f
    err = max((abs(c) for c in diff.coeffs.values()), default=0.0)
    return CoboundaryDecomposition(transfer, residual, theta or (0.0,) * d, float(err))


def _conj_phase(theta, m):
    if theta is None:
        return 1
    x = sum(a * b for a, b in zip(theta, m))
    return 1 if x == 0 else _e(-x)


# ---------------------------------------------------------------------------
# growth of the dual action

@dataclass(frozen=True)
class DakaEstimate:
    C: float
    tau: float
    K: float
    N: float
    samples: int
    points: tuple = field(default=(), repr=False)  # (|n|, y) pairs used in the fit

    def bound(self, n_norm, k_norm, rho):
        return self.C * math.exp(self.tau * n_norm) * k_norm ** (-rho)


def _characters_in_ball(rho, K):
    R = int(math.floor(K))
    pts = np.array(list(itertools.product(range(-R, R + 1), repeat=rho)), dtype=np.int64)
    norms = np.sqrt(np.sum(pts.astype(float) ** 2, axis=1))
    keep = (norms <= K) & (norms > 0)
    return pts[keep], norms[keep]


def _exponents_in_ball(action, N):
    R = int(math.floor(N))
    out = []
    for n in itertools.product(range(-R, R + 1), repeat=action.rank):
        r = math.sqrt(sum(x * x for x in n))
        if r <= N:
            out.append((n, r))
    return out


def _dual_images(action, ks, n):
    """Images (A^n)^T k for the rows of ks, with a mask of integral ones."""
    pos = tuple(max(e, 0) for e in n)
    neg = tuple(max(-e, 0) for e in n)
    Y = ks.astype(object)
    if action.mode == "auto":
        M = action.power(n).T
        return Y @ np.array(M.rows, dtype=object).T, np.ones(len(ks), dtype=bool)
    P = action.power(pos).T
    Y = Y @ np.array(P.rows, dtype=object).T
    mask = np.ones(len(ks), dtype=bool)
    if any(neg):
        Q = action.power(neg)
        # (Q^T)^-1 y = adj(Q)^T y / det, i.e. rows times adj(Q)
        Z = Y @ np.array(Q.adjugate, dtype=object)
        det = Q.det
        mask = np.all(np.vectorize(lambda z: z % det == 0, otypes=[bool])(Z), axis=1)
        Y = np.vectorize(lambda z: z // det, otypes=[object])(Z)
    return Y, mask


def _growth_samples(action, K, N):
    ks, knorm = _characters_in_ball(action.dim, K)
    if len(ks) == 0:
        raise GrowthEstimationError("no nonzero characters in the ball")
    rho = action.dim
    xs, ys, pairs = [], [], []
    for n, r in _exponents_in_ball(action, N):
        Y, mask = _dual_images(action, ks, n)
        if not mask.any():
            continue
        img = np.sqrt(np.array([float(sum(int(v) ** 2 for v in row)) for row in Y[mask]]))
        vals = img * knorm[mask] ** rho
        xs.append(r)
        ys.append(math.log(float(vals.min())))
    return np.array(xs), np.array(ys)


def daka_estimate(action: LatticeAction, K: float, N: float) -> DakaEstimate:
    """Fit ||(A^n)^T k|| >= C e^{tau ||n||} ||k||^{-rho} over ||k|| <= K, ||n|| <= N."""
    xs, ys = _growth_samples(action, K, N)
    if len(xs) < 2 or np.ptp(xs) == 0:
        raise GrowthEstimationError("not enough exponents with integral images to fit a rate")
    tau, _ = np.polyfit(xs, ys, 1)
    if not tau > 0:
        raise GrowthEstimationError(f"fitted growth rate tau={tau:.3g} is not positive")
    C = math.exp(float(np.min(ys - tau * xs)))
    return DakaEstimate(C, float(tau), K, N, len(xs), tuple(zip(xs.tolist(), ys.tolist())))


def certify_daka(action, est: DakaEstimate, K=None, N=None):
    """Minimum over fresh samples of log(observed) - log(bound); >= 0 certifies."""
    xs, ys = _growth_samples(action, K or est.K, N or est.N)
    return float(np.min(ys - (math.log(est.C) + est.tau * xs)))


# ---------------------------------------------------------------------------
# decorrelation

@dataclass(frozen=True)
class DecorrelationProfile:
    profile: tuple  # (|n|, |corr|)
    alpha: float
    truncation_radius: float


def decorrelation_profile(f, action, N) -> DecorrelationProfile:
    """Exact correlations over ||n||_inf <= N and a fitted power-law exponent."""
    prof = []
    for n in itertools.product(range(-N, N + 1), repeat=action.rank):
        r = math.sqrt(sum(x * x for x in n))
        prof.append((r, abs(correlation(f, action, n))))
    nz = [(r, c) for r, c in prof if c > 0]
    trunc = max((r for r, _ in nz), default=0.0)
    fit = [(r, c) for r, c in nz if r > 0]
    if len(fit) >= 2 and len({r for r, _ in fit}) >= 2:
        alpha = -float(np.polyfit(np.log([r for r, _ in fit]), np.log([c for _, c in fit]), 1)[0])
    else:
        alpha = math.inf
    return DecorrelationProfile(tuple(prof), alpha, trunc)


# ---------------------------------------------------------------------------
# grid-sampled functions

def partial_sum_error(f_grid, N):
    """||f - S_N f||_2 for the square partial sum S_N, via the DFT."""
    f_grid = np.asarray(f_grid)
    L = f_grid.shape[0]
    if any(s < 4 * N for s in f_grid.shape):
        raise ResolutionError(f"grid of size {f_grid.shape} is too coarse for N={N}")
    F = np.fft.fftn(f_grid) / f_grid.size
    keep = np.ones(F.shape, dtype=bool)
    for ax, s in enumerate(F.shape):
        freq = np.fft.fftfreq(s, 1.0 / s)
        shape = [1] * F.ndim
        shape[ax] = s
        keep &= (np.abs(freq) <= N).reshape(shape)
    return float(np.sqrt(np.sum(np.abs(F[~keep]) ** 2)))


def modulus_of_continuity(f_grid, delta):
    """max over grid shifts |tau_i| <= delta of ||f(. + tau) - f||_2."""
    f_grid = np.asarray(f_grid)
    ranges = [range(-int(math.floor(delta * s + 1e-12)), int(math.floor(delta * s + 1e-12)) + 1)
              for s in f_grid.shape]
    best = 0.0
    for shift in itertools.product(*ranges):
        g = np.roll(f_grid, shift, axis=tuple(range(f_grid.ndim)))
        best = max(best, float(np.sqrt(np.mean(np.abs(g - f_grid) ** 2))))
    return best


def lp_density_bound(f, action, r, grid=128, data: SpectralData = None):
    """(||phi_f||_p on a grid, (sum |c|^r)^{2/r}) with p = r / (2(r - 1))."""
    if not 1 < r <= 2:
        raise ValueError("r must lie in (1, 2]")
    data = data or spectral_density(f, action)
    p = r / (2 * (r - 1))
    phi = density_grid(data, grid)
    norm = float(np.mean(phi ** p) ** (1 / p))
    bound = sum(abs(c) ** r for c in f.coeffs.values()) ** (2 / r)
    return norm, float(bound)
