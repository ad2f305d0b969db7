"""Run the theorem-consistency fuzzer over several seeds and summarize."""

import argparse
import json
import time
from dataclasses import asdict, dataclass

from eqsurf.verification import fuzz_surfaces


@dataclass
class FuzzConfig:
    seeds: tuple = (0, 1, 2)
    depth: int = 10
    count: int = 200


def run(cfg: FuzzConfig) -> dict:
    out = {"config": asdict(cfg), "runs": []}
    for seed in cfg.seeds:
        t0 = time.perf_counter()
        rep = fuzz_surfaces(seed, cfg.depth, cfg.count)
        out["runs"].append({**rep.to_json(), "seconds": round(time.perf_counter() - t0, 2)})
        print(rep.summary())
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--depth", type=int, default=10)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--out", help="write a JSON summary here")
    a = ap.parse_args()
    result = run(FuzzConfig(tuple(a.seeds), a.depth, a.count))
    if a.out:
        with open(a.out, "w") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
