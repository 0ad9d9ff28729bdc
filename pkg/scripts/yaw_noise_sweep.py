"""Yaw error of the toe/heel estimator under Gaussian keypoint noise, with a text histogram."""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from packpair.catalog import shoe
from packpair.geometry import wrap_angle
from packpair.perception import ShoePose, ShoeState, estimate_shoe_pose, synthesize_keypoints


@dataclass
class Config:
    shoe: str = "sports"
    samples: int = 5000
    sigmas: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0, 8.0)
    seed: int = 0
    bins: int = 12


def yaw_errors(model, sigma, n, rng):
    out = np.empty(n)
    for i in range(n):
        yaw = rng.uniform(-math.pi, math.pi)
        pose = ShoePose.for_state((0, 0, 0), yaw, ShoeState.TOP)
        k = synthesize_keypoints(model, pose, ShoeState.TOP, sigma, int(rng.integers(2**31)))
        out[i] = abs(wrap_angle(estimate_shoe_pose(k, ShoeState.TOP).yaw - yaw))
    return np.degrees(out)


def main(cfg: Config) -> None:
    model = shoe(cfg.shoe)
    rng = np.random.default_rng(cfg.seed)
    for sigma in cfg.sigmas:
        e = yaw_errors(model, sigma, cfg.samples, rng)
        # small-angle estimate: heading noise std is sigma*sqrt(2)/length
        approx = math.degrees(sigma * math.sqrt(2) / model.length) * math.sqrt(2 / math.pi)
        print(f"sigma={sigma:g}mm mean={e.mean():.4f}deg p95={np.percentile(e, 95):.4f}deg "
              f"small_angle_mean={approx:.4f}deg")
        hist, edges = np.histogram(e, bins=cfg.bins)
        for h, lo, hi in zip(hist, edges, edges[1:]):
            print(f"  {lo:7.3f}-{hi:7.3f} {'#' * int(60 * h / hist.max())}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--shoe", default=Config.shoe)
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--sigmas", type=float, nargs="+", default=list(Config.sigmas))
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--bins", type=int, default=Config.bins)
    a = ap.parse_args()
    main(Config(a.shoe, a.samples, tuple(a.sigmas), a.seed, a.bins))
