"""Run the total ergodicity test on every catalog action and print the verdicts."""

from toralclt.catalog import EXAMPLES, named_example
from toralclt.lattice import char_poly, is_ergodic, is_totally_ergodic


def main():
    for name in sorted(EXAMPLES):
        act = named_example(name)
        res = is_totally_ergodic(act, search_radius=3)
        gens = ", ".join("ergodic" if is_ergodic(A) else "not ergodic" for A in act.generators)
        print(f"{name:22s} dim={act.dim} rank={act.rank}  {res.label:8s} via {res.path}")
        print(f"{'':22s} generators: {gens}")
        for A in act.generators:
            print(f"{'':22s} char poly {char_poly(A).coeffs}")


if __name__ == "__main__":
    main()
