"""XOR sanity run over fixed seeds; prints generations and wall time per seed."""

import argparse
import time

from eneat.evolution import EvolutionConfig, evolve
from eneat.nn import ActivationKind
from eneat.synthetic import xor_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--population", type=int, default=150)
    ap.add_argument("--generations", type=int, default=300)
    ap.add_argument("--classic", action="store_true",
                    help="start with no hidden nodes and sigmoid only")
    args = ap.parse_args()
    extra = {}
    if args.classic:
        extra = dict(hidden_count=0, activation_pool=(ActivationKind.SIGMOID,))
    solved = 0
    for seed in range(args.seeds):
        cfg = EvolutionConfig(population_size=args.population, max_generations=args.generations,
                              seed=seed, **extra)
        start = time.perf_counter()
        best, report = evolve(cfg, xor_table())
        ok = best.fitness == 1.0
        solved += ok
        print(f"seed {seed}: fitness {best.fitness:.3f} after {len(report.generations)} generations, "
              f"{time.perf_counter() - start:.1f}s{'' if ok else '  (unsolved)'}")
    print(f"solved {solved}/{args.seeds}")


if __name__ == "__main__":
    main()
