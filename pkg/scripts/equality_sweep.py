"""Ratio LHS/RHS of the S_r Poincare inequality on geodesic spheres.

Constant u and f on a geodesic sphere give equality, so every row should
print a ratio of 1 up to quadrature error.
"""
import argparse
import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path

from hyperlab import geom, ineq
from hyperlab import measure as ms


@dataclass
class SweepConfig:
    radii: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    curvatures: list = field(default_factory=lambda: [0.0, -1.0, 1.0])
    dims: list = field(default_factory=lambda: [2, 3])
    out: Path = Path("results/equality_sweep.csv")


def run(cfg: SweepConfig):
    rows = []
    for R, c, m in itertools.product(cfg.radii, cfg.curvatures, cfg.dims):
        if c > 0 and R >= 1.5:  # stays inside the open hemisphere
            continue
        ch = geom.geodesic_sphere(R, c, m=m)
        region = ms.whole(ch)
        for r in range(m):
            rep = ineq.poincare_spaceform(ch, region, r)
            rows.append((R, c, m, r, rep.lhs, rep.rhs, rep.lhs / rep.rhs))
            print(f"R={R:<4} c={c:<5} m={m} r={r}  ratio {rep.lhs / rep.rhs:.12f}")
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    with cfg.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["R", "c", "m", "r", "lhs", "rhs", "ratio"])
        w.writerows(rows)
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=SweepConfig.out)
    run(SweepConfig(out=ap.parse_args().out))
