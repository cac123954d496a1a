"""Alternating closure between two confocal ellipsoids in R^3 and its Proposition 1 verdict.

    python scripts/annulus_closure.py --axes 3 2 1 --walls 0 0.9 --rounds 3 8
"""

import argparse
import json
from dataclasses import asdict, dataclass

import mpmath

from poncelet.conditions import prop1_condition
from poncelet.confocal import ConfocalFamily
from poncelet.search import refine_game, search_annulus_d3


@dataclass
class Config:
    axes: tuple = (3.0, 2.0, 1.0)
    walls: tuple = (0.0, 0.9)
    rounds: tuple = (3, 8)
    precision_bits: int = 256
    shift: float = 0.05


def run(cfg: Config) -> dict:
    fam = ConfocalFamily(cfg.axes)
    betas = list(cfg.walls)
    res = search_annulus_d3(fam, betas, range(cfg.rounds[0], cfg.rounds[1] + 1))
    if not res.found:
        return {"found": False, "candidates": len(res.scan)}
    m = res.period // 2
    z, norm = refine_game(fam, betas, [1, -1], m, res.caustics, start=res.game_start)
    at = prop1_condition(fam, betas[0], betas[1], z, m, cfg.precision_bits)
    perturbed = []
    for idx in range(len(z)):
        for e in (cfg.shift, -cfg.shift):
            with mpmath.workprec(1024):
                c = list(z)
                c[idx] = c[idx] + e
            try:
                rep = prop1_condition(fam, betas[0], betas[1], c, m, cfg.precision_bits)
            except ValueError as exc:
                perturbed.append({"caustic": idx + 1, "shift": e, "error": str(exc)})
                continue
            perturbed.append({"caustic": idx + 1, "shift": e, "decision": rep.decision, "residual": rep.residual})
    return {
        "found": True, "m": m, "caustics": [float(c) for c in z], "simulated_gap": res.closure_error,
        "refinement_residual": float(norm), "notes": res.notes,
        "prop1": {"decision": at.decision, "certified": at.certified, "rank": at.rank, "residual": at.residual},
        "perturbed": perturbed,
    }


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--axes", type=float, nargs=3, default=Config.axes)
    p.add_argument("--walls", type=float, nargs=2, default=Config.walls)
    p.add_argument("--rounds", type=int, nargs=2, default=Config.rounds)
    p.add_argument("--precision-bits", type=int, default=Config.precision_bits)
    args = p.parse_args()
    cfg = Config(tuple(args.axes), tuple(args.walls), tuple(args.rounds), args.precision_bits)
    print(json.dumps({"config": asdict(cfg), "result": run(cfg)}, indent=2))


if __name__ == "__main__":
    main()
