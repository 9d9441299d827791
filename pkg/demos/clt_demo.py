"""Normalised ergodic sums of cos(2 pi x1) under the cubic action.

Prints a text histogram against the standard normal density and the
report of the built-in experiment runner.
"""

import json
import math

import numpy as np

from toralclt import kernels, simulate
from toralclt.catalog import named_example
from toralclt.trigpoly import TrigPolynomial


def histogram(x, bins=21, width=50):
    edges = np.linspace(-3.5, 3.5, bins + 1)
    counts, _ = np.histogram(x, edges)
    dens = counts / (len(x) * (edges[1] - edges[0]))
    for lo, hi, d in zip(edges, edges[1:], dens):
        mid = (lo + hi) / 2
        normal = math.exp(-mid * mid / 2) / math.sqrt(2 * math.pi)
        bar = "#" * int(round(d * width / 0.45))
        print(f"{mid:+5.2f} {bar:<{width}s} {d:.3f} (normal {normal:.3f})")


def main():
    act = named_example("cubic-12-10")
    f = TrigPolynomial.real_pair((1, 0, 0))
    batches = simulate.sample_batches(3, 128, 5000, seed=1)
    x = simulate.normalized_sums(f, act, kernels.square(48), batches).real
    histogram(x)
    print(f"KS distance to N(0,1): {simulate.ks_normal(x, 1.0):.4f}")

    cfg = simulate.ExperimentConfig(act, f, sequence={"kind": "square", "side": 48}, M=5000, seed=1,
                                    thetas=[[0.3141, 0.7183]])
    print(json.dumps(simulate.run_clt_experiment(cfg).to_dict(), indent=1, default=str)[:1500])


if __name__ == "__main__":
    main()
