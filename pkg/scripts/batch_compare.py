"""Compare packing with and without edge reorientation across failure rates."""
import argparse
from dataclasses import dataclass

from packpair.cli import run_batch
from packpair.planner import Mode
from packpair.simulator import FailureModel


@dataclass
class Config:
    count: int = 200
    seed: int = 0
    noise: float = 1.0
    over_rotation: tuple[float, ...] = (0.0, 0.05, 0.1, 0.2)
    replan: bool = False
    jobs: int = 1


def main(cfg: Config) -> None:
    print("over_rotation mode     success  mean_topples")
    for p in cfg.over_rotation:
        f = FailureModel(keypoint_noise_sigma=cfg.noise, over_rotation_probability=p, seed=cfg.seed)
        rep = run_batch(cfg.count, cfg.seed, tuple(Mode), f, cfg.replan, jobs=cfg.jobs)
        for m in Mode:
            rs = rep.for_mode(m)
            ok = sum(r.overall for r in rs) / len(rs)
            topples = sum(r.predicted_topples for r in rs) / len(rs)
            print(f"{p:>13.2f} {m.value:<8} {ok:>7.3f}  {topples:>12.3f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=Config.count)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--noise", type=float, default=Config.noise)
    ap.add_argument("--over-rotation", type=float, nargs="+", default=list(Config.over_rotation))
    ap.add_argument("--replan", action="store_true")
    ap.add_argument("--jobs", type=int, default=Config.jobs)
    a = ap.parse_args()
    main(Config(a.count, a.seed, a.noise, tuple(a.over_rotation), a.replan, a.jobs))
