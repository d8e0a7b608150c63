"""Grid geodesic distance error against the analytic distance.

Prints the max error at a few probe points for a sequence of grid steps
on the unit sphere and the flat cylinder, with the observed orders.
"""
import argparse
import math
from dataclasses import dataclass, field

import numpy as np

from hyperlab import geom
from hyperlab.distance import distance_field, grid_distance


@dataclass
class DistanceConfig:
    steps: list = field(default_factory=lambda: [0.1, 0.05, 0.025])
    init_radius: float | None = None  # None: the library default


CASES = {
    "sphere": (geom.sphere, [math.pi / 2, 1.0], [[1.0, 2.0], [2.0, 3.5], [1.3, 5.0], [0.6, 0.5], [1.2, 1.6]]),
    "cylinder": (geom.cylinder, [math.pi, 0.0], [[1.0, 0.5], [2.0, -0.7], [-2.5, 0.3], [3.0, 1.5]]),
}


def run(cfg: DistanceConfig):
    table = {}
    for name, (make, u0, probes) in CASES.items():
        ch = make()
        u0, U = np.array(u0), np.array(probes)
        exact = distance_field(ch, u0)(U)
        errs = []
        for h in cfg.steps:
            g = grid_distance(ch, u0, h, init_radius=cfg.init_radius)
            errs.append(float(np.abs(g(U) - exact).max()))
        orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        table[name] = (errs, orders)
        print(name, " ".join(f"h={h:g}: {e:.3e}" for h, e in zip(cfg.steps, errs)),
              " orders", " ".join(f"{o:.2f}" for o in orders))
    return table


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=float, nargs="+", default=DistanceConfig().steps)
    ap.add_argument("--init-radius", type=float, default=None)
    a = ap.parse_args()
    run(DistanceConfig(a.steps, a.init_radius))
