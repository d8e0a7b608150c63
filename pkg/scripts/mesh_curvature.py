"""Quadric-fit principal curvatures on refined icospheres: max error against 1."""
import argparse
import math
from dataclasses import dataclass, field

import numpy as np

from hyperlab.mesh import icosphere, mesh_spectra


@dataclass
class MeshConfig:
    levels: list = field(default_factory=lambda: [1, 2, 3, 4])
    rings: int = 2


def run(cfg: MeshConfig):
    errs = []
    for k in cfg.levels:
        _, lam = mesh_spectra(icosphere(k), cfg.rings)
        errs.append(float(np.abs(lam - 1.0).max()))
    for i, (k, e) in enumerate(zip(cfg.levels, errs)):
        order = "" if i == 0 else f"  order {math.log2(errs[i - 1] / e):.2f}"
        print(f"level {k}: max |kappa - 1| = {e:.3e}{order}")
    return errs


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, nargs="+", default=MeshConfig().levels)
    ap.add_argument("--rings", type=int, default=2)
    a = ap.parse_args()
    run(MeshConfig(a.levels, a.rings))
