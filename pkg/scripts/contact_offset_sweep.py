"""Sweep the rim offset and drop height for one catalog shoe and tabulate the landing state."""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from packpair.catalog import shoe
from packpair.contact import CrossSection, EdgePlacement, predict_contact_outcome
from packpair.errors import NoRotation
from packpair.geometry import Pose

CODES = {"bottom": "B", "side-inside-up": "I", "side-outside-up": "O"}


@dataclass
class Config:
    shoe: str = "sports"
    offsets: int = 10  # even, so d = 0 is never sampled
    drops: tuple[float, ...] = (0.0, 20.0, 40.0, 60.0, 80.0, 110.0, 150.0)


def main(cfg: Config) -> None:
    cs = CrossSection.of(shoe(cfg.shoe))
    ds = np.linspace(-0.95, 0.95, cfg.offsets) * cs.width / 2
    ds = ds[ds != 0]
    print(f"{cfg.shoe}: width={cs.width} height={cs.height} com_height={cs.com_height}")
    print("drop\\d " + "".join(f"{d:>8.1f}" for d in ds))
    for h in cfg.drops:
        cells = []
        for d in ds:
            try:
                o = predict_contact_outcome(cs, EdgePlacement(float(d), Pose((0, 0, 0)), h))
                cells.append(f"{CODES[o.final_state.value]}{math.degrees(o.rotation_at_floor):5.1f}")
            except NoRotation:
                cells.append("   -  ")
        print(f"{h:>7.0f} " + "".join(f"{c:>8}" for c in cells))
    print("cells: landing state (B bottom, I inside up, O outside up) and rotation at the floor in degrees")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--shoe", default=Config.shoe)
    ap.add_argument("--offsets", type=int, default=Config.offsets)
    ap.add_argument("--drops", type=float, nargs="+", default=list(Config.drops))
    a = ap.parse_args()
    main(Config(a.shoe, a.offsets, tuple(a.drops)))
