"""Finite Fourier series on the torus T^rho with zero mean."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def _key(k):
    return tuple(int(x) for x in k)


def _conj(c):
    return c.conjugate() if isinstance(c, complex) else c


class TrigPolynomial:
    """f(x) = sum_k c_k e(<k, x>) over a finite set of nonzero k in Z^rho.

    Coefficients may be ints, Fractions, floats or complex numbers; the
    arithmetic keeps whatever exactness the inputs have.
    """

    def __init__(self, rho, coeffs=None):
        self.rho = int(rho)
        self.coeffs = {}
        for k, c in (coeffs or {}).items():
            k = _key(k)
            if len(k) != self.rho:
                raise ValueError(f"character {k} has wrong length for rho={self.rho}")
            if not any(k):
                raise ValueError("the zero character is excluded (zero mean)")
            if c != 0:
                self.coeffs[k] = self.coeffs.get(k, 0) + c
        self.coeffs = {k: c for k, c in self.coeffs.items() if c != 0}

    # --- constructors
    @classmethod
    def real_pair(cls, k, c=None):
        """(c chi_k + conj(c) chi_{-k}); default c = 1/sqrt(2) gives unit L2 norm."""
        k = _key(k)
        c = 1 / math.sqrt(2) if c is None else c
        return cls(len(k), {k: c, tuple(-x for x in k): _conj(c)})

    @classmethod
    def random(cls, rho, size, rng, max_entry=3, real=True, rational=False):
        """Random support of ``size`` characters (size even when ``real``)."""
        coeffs = {}
        target = size // 2 if real else size
        while len(coeffs) < (2 * target if real else target):
            k = tuple(int(x) for x in rng.integers(-max_entry, max_entry + 1, rho))
            nk = tuple(-x for x in k)
            if not any(k) or k in coeffs:
                continue
            if rational:
                c = Fraction(int(rng.integers(-9, 10)) or 1, int(rng.integers(1, 7)))
            else:
                c = complex(rng.normal(), rng.normal())
            coeffs[k] = c
            if real:
                coeffs[nk] = _conj(c)
        return cls(rho, coeffs)

    @classmethod
    def from_json(cls, doc):
        coeffs = {}
        for item in doc["coeffs"]:
            re, im = item.get("re", 0.0), item.get("im", 0.0)
            coeffs[_key(item["k"])] = complex(re, im) if im else float(re)
        return cls(int(doc["rho"]), coeffs)

    def to_json(self):
        out = []
        for k in sorted(self.coeffs):
            c = complex(self.coeffs[k])
            out.append({"k": list(k), "re": c.real, "im": c.imag})
        return {"rho": self.rho, "coeffs": out}

    # --- basic data
    def support(self):
        return sorted(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs.get(_key(k), 0)

    @property
    def norm2_squared(self):
        return sum(abs(c) ** 2 for c in self.coeffs.values())

    @property
    def norm_c(self):
        """Sum of absolute values of coefficients."""
        return sum(abs(c) for c in self.coeffs.values())

    def is_real(self, tol=0.0):
        for k, c in self.coeffs.items():
            other = self.coeffs.get(tuple(-x for x in k), 0)
            if abs(other - _conj(c)) > tol:
                return False
        return True

    def degree(self):
        return max((max(abs(x) for x in k) for k in self.coeffs), default=0)

    # --- arithmetic
    def __add__(self, other):
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return TrigPolynomial(self.rho, out)

    def __neg__(self):
        return TrigPolynomial(self.rho, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a):
        return TrigPolynomial(self.rho, {k: a * c for k, c in self.coeffs.items()})

    def compose(self, action, n):
        """f o A^n for n >= 0: coefficient c_k moves to (A^n)^T k."""
        if any(e < 0 for e in n) and action.mode != "auto":
            raise ValueError("composition with negative exponents needs an automorphism action")
        return TrigPolynomial(self.rho, {action.dual_apply(k, n): c for k, c in self.coeffs.items()})

    def equals(self, other, tol=0.0):
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self[k] - other[k]) <= tol for k in keys)

    # --- evaluation
    def __call__(self, x):
        """Evaluate at points x of shape (..., rho) (floats in [0,1))."""
        x = np.asarray(x, dtype=float)
        ks = np.array(self.support(), dtype=float)
        cs = np.array([complex(self.coeffs[k]) for k in self.support()])
        ph = x @ ks.T
        return np.exp(2j * np.pi * ph) @ cs

    def __repr__(self):
        return f"TrigPolynomial(rho={self.rho}, terms={len(self)})"
