"""Print planned topple counts per pair combination and mode, next to the executed counts."""
import argparse
from dataclasses import dataclass

from packpair.catalog import SHOES
from packpair.planner import Mode, PairCombination, required_topples
from packpair.scenario import admissible, random_scene
from packpair.simulator import simulate


@dataclass
class Config:
    seeds: int = 5


def main(cfg: Config) -> None:
    print(f"{'combination':<24}" + "".join(f"{m.value:>10}" for m in Mode) + "   executed(with/without)")
    for combo in PairCombination:
        counts = {m: set() for m in Mode}
        for ci in range(len(SHOES)):
            if not admissible(ci, combo):
                continue
            for seed in range(cfg.seeds):
                scene = random_scene(ci, combo, seed)
                for m in Mode:
                    plan, trace = simulate(scene, m)
                    assert trace.success
                    counts[m].add(plan.topple_count)
        table = "".join(f"{required_topples(combo, m):>10}" for m in Mode)
        seen = "/".join(",".join(map(str, sorted(counts[m]))) for m in Mode)
        print(f"{combo.value:<24}{table}   {seen}")
    for m in Mode:
        print(f"sum {m.value}: {sum(required_topples(c, m) for c in PairCombination)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=Config.seeds, help="scenes per shoe and combination")
    main(Config(**vars(ap.parse_args())))
