"""Periodic caustics of the billiard inside an ellipse, checked by simulation and Theorem 1.

    python scripts/porism_periods.py --axes 4 1 --periods 3 8
"""

import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from poncelet.abeljacobi import gamma_curve, theorem1_check
from poncelet.confocal import ConfocalFamily, admissibility_polynomial, elliptic_coordinates
from poncelet.dynamics import Domain, lambda_ranges, simulate, winding_counts
from poncelet.search import search_period_d2


@dataclass
class Config:
    axes: tuple = (4.0, 1.0)
    lo: int = 3
    hi: int = 8


def run(cfg: Config) -> list:
    fam = ConfocalFamily(cfg.axes)
    dom = Domain.inside(fam)
    rows = []
    for n in range(cfg.lo, cfg.hi + 1):
        res = search_period_d2(fam, n)
        row = {"period": n, "found": res.found}
        if res.found:
            alpha = res.caustics[0]
            x, v = np.array(res.start), np.array(res.direction)
            ranges = lambda_ranges(dom, admissibility_polynomial(fam, [alpha]), elliptic_coordinates(fam, x))
            counts = winding_counts(simulate(dom, x, v, n), ranges, n)
            rep = theorem1_check(gamma_curve(fam, [alpha]), ranges, counts)
            row.update(caustic=alpha, closure_error=res.closure_error, counts=counts.tolist(),
                       theorem1_accepted=rep.accepted, theorem1_residual=rep.residual)
        rows.append(row)
    return rows


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--axes", type=float, nargs=2, default=Config.axes)
    p.add_argument("--periods", type=int, nargs=2, default=(Config.lo, Config.hi))
    args = p.parse_args()
    cfg = Config(tuple(args.axes), *args.periods)
    print(json.dumps({"config": asdict(cfg), "rows": run(cfg)}, indent=2))


if __name__ == "__main__":
    main()
