"""Limit variance of a few observables on the cubic action.

Compares the spectral density at zero with the sum of correlations and
with a Monte Carlo estimate over a square of exponents.
"""

from fractions import Fraction

import numpy as np

from toralclt import kernels, simulate, spectral
from toralclt.catalog import named_example
from toralclt.trigpoly import TrigPolynomial


def main():
    act = named_example("cubic-12-10")
    rng = np.random.default_rng(3)
    g = TrigPolynomial.random(3, 4, rng, max_entry=2, rational=True)
    observables = {
        "cos(2 pi x1)": TrigPolynomial.real_pair((1, 0, 0)),
        "random, support 8": TrigPolynomial.random(3, 8, rng, rational=True),
        "g + g o A1 / 2": g + g.compose(act, (1, 0)).scale(Fraction(1, 2)),
        "u - u o A1": spectral.apply_coboundary_operator(g, act, 0),
    }
    seq = kernels.square(32)
    batches = simulate.sample_batches(3, 128, 3000, seed=11)
    for label, f in observables.items():
        data = spectral.spectral_density(f, act)
        s2 = spectral.variance(f, act, data)
        s2c = spectral.variance_by_correlations(f, act, data)
        emp = float(np.mean(np.abs(simulate.normalized_sums(f, act, seq, batches)) ** 2))
        cob = spectral.solve_coboundary(f, act).is_coboundary
        print(f"{label:18s} sigma2 = {s2!s:>12}  correlations = {s2c!s:>12}  "
              f"Monte Carlo = {emp:.4f}  ||f||^2 = {float(f.norm2_squared):.4f}  coboundary = {cob}")
    th = np.array([0.2, 0.45])
    f = observables["g + g o A1 / 2"]
    print(f"rotated by {th.tolist()}: sigma2 = {spectral.rotated_variance(f, act, th):.4f}")


if __name__ == "__main__":
    main()
