"""How often the greedy cascade misses its structure and the reserve cascade takes over.

    python3 scripts/cascade_fallback.py --count 200
"""

import argparse
from collections import Counter

from treecvrp.classify import Kind, classify_all
from treecvrp.generate import generate, suite_params
from treecvrp.instance import normalize
from treecvrp.rewrite import from_normalized, simplify
from treecvrp.solver import RootReady, iteration_step, resolve_root
from treecvrp.strategies import cascade_ok, literal_cascade, peel_heavy_clients


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--shape", default="chain-stack")
    args = ap.parse_args()
    seen: Counter = Counter()
    missed: Counter = Counter()
    example = None
    for seed in range(1, args.count + 1):
        t = from_normalized(normalize(generate(suite_params(seed, args.shape))), allow_heavy=True)
        peel_heavy_clients(t)
        while True:
            simplify(t)
            for cls in classify_all(t).values():
                if cls.kind is not Kind.LONG:
                    continue
                lab = cls.label
                seen[lab.p] += 1
                tours = literal_cascade(t, lab)
                if not cascade_ok(t, lab, tours):
                    missed[lab.p] += 1
                    if example is None:
                        example = (seed, t.q, [[t.sub[v] for v in lab.leaves_bottom_up()]],
                                   [sum(a for _, a in pk) for pk in tours])
            if isinstance(iteration_step(t), RootReady):
                resolve_root(t)
                break
    print("p,chains,greedy_misses")
    for p in sorted(seen):
        print(f"{p},{seen[p]},{missed[p]}")
    if example:
        seed, q, demands, loads = example
        print(f"# first miss: seed={seed} Q={q} leaf demands={demands[0]} greedy loads={loads}")


if __name__ == "__main__":
    main()
