"""Sweep random Z/2[t] maps through the basis reduction.

Reports how often the reduced degrees sit strictly below the bound
|alpha_i| + q, and how the stable degree is distributed.
"""

import argparse
import random
from collections import Counter
from dataclasses import dataclass

from eqsurf.graded_maps import PolyMap, poly_basis_reduce, stable_degree, verify_poly_iso


@dataclass
class SweepConfig:
    trials: int = 2000
    max_size: int = 5
    max_degree: int = 4
    density: float = 0.6
    seed: int = 0


def random_map(rng: random.Random, cfg: SweepConfig) -> PolyMap:
    m = rng.randint(1, cfg.max_size)
    target = [rng.randint(0, cfg.max_degree) for _ in range(m)]
    q = rng.randint(0, 2)
    lo = max(0, max(target) - cfg.max_degree - q)
    source = [rng.randint(lo, cfg.max_degree) for _ in range(m)]
    rows = [
        tuple(
            1 << (source[j] + q - target[i])
            if 0 <= source[j] + q - target[i] <= cfg.max_degree and rng.random() < cfg.density
            else 0
            for j in range(m)
        )
        for i in range(m)
    ]
    return PolyMap(tuple(rows), tuple(source), tuple(target), q)


def sweep(cfg: SweepConfig) -> dict:
    rng = random.Random(cfg.seed)
    singular, slack, stable = 0, Counter(), Counter()
    for _ in range(cfg.trials):
        f = random_map(rng, cfg)
        g = stable_degree(f)
        if g is None:
            singular += 1
            continue
        stable[g] += 1
        g0 = g
        while verify_poly_iso(f, [g0 - 1])[g0 - 1] and g0 > -cfg.max_degree:
            g0 -= 1
        basis = poly_basis_reduce(f, g0)
        for b, a in zip(basis.degrees, f.source):
            slack[a + f.q - b] += 1
    return {"singular": singular, "slack": dict(sorted(slack.items())),
            "stable_degree": dict(sorted(stable.items()))}


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--density", type=float, default=0.6)
    a = ap.parse_args()
    res = sweep(SweepConfig(trials=a.trials, seed=a.seed, density=a.density))
    print(f"singular maps skipped: {res['singular']}")
    print("slack |alpha|+q-|beta| : count")
    for k, v in res["slack"].items():
        print(f"  {k:>3} : {v}")
    print("stable degree : count")
    for k, v in res["stable_degree"].items():
        print(f"  {k:>3} : {v}")
