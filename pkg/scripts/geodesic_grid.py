"""Billiards on a triaxial ellipsoid cut by a confocal quadric: simulator, Proposition 2 and Theorem 3 over a grid.

Writes one CSV row per (gamma, alpha) grid point.

    python scripts/geodesic_grid.py --n 10 --out grid.csv
"""

import argparse
import csv
import sys
from dataclasses import dataclass

from poncelet.abeljacobi import gamma1_curve, theorem3_check
from poncelet.conditions import prop2_condition
from poncelet.confocal import ConfocalFamily
from poncelet.search import classify_geodesic


@dataclass
class Config:
    axes: tuple = (4.0, 2.0, 1.0)
    n: int = 30
    periods: tuple = (5, 6, 7, 8)
    precision_bits: int = 128


def grid(a, n):
    for i in range(n):
        g = a[2] + (a[1] - a[2]) * (i + 0.5) / n
        for j in range(n):
            yield g, g + (a[1] - g) * (j + 0.5) / n


def run(cfg: Config, sink) -> None:
    fam = ConfocalFamily(cfg.axes)
    a = fam.a
    out = csv.writer(sink)
    out.writerow(["gamma", "alpha", "simulator", "period", "min_gap", "prop2", "theorem3"])
    for g, al in grid(a, cfg.n):
        ver = classify_geodesic(fam, g, al, cfg.periods)
        p2 = t3 = ""
        if ver.status != "abstain":
            ks = [ver.period] if ver.status == "closed" else list(cfg.periods)
            p2 = any(prop2_condition(a, g, al, k, cfg.precision_bits).satisfied for k in ks)
            cur = gamma1_curve(fam, [al])
            t3 = any(theorem3_check(cur, [(a[1], a[0]), (g, al)], ver.counts(k)).accepted for k in ks)
        gap = min(ver.gaps.values()) if ver.gaps else ""
        out.writerow([f"{g:.12g}", f"{al:.12g}", ver.status, ver.period or "", gap, p2, t3])


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--axes", type=float, nargs=3, default=Config.axes)
    p.add_argument("--n", type=int, default=Config.n)
    p.add_argument("--out", help="CSV path (default stdout)")
    args = p.parse_args()
    cfg = Config(tuple(args.axes), args.n)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            run(cfg, fh)
    else:
        run(cfg, sys.stdout)


if __name__ == "__main__":
    main()
