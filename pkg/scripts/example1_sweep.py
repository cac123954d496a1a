"""Sign changes of the explicit 3x3 determinant (printed and derived entries) against the generic m = 4 determinant.

    python scripts/example1_sweep.py
"""

import argparse
import json
from dataclasses import asdict, dataclass

from poncelet.crossval import example1_sweep


@dataclass
class Config:
    precision_bits: int = 64


def run(cfg: Config) -> dict:
    return {variant: example1_sweep(variant, cfg.precision_bits) for variant in ("printed", "derived")}


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--precision-bits", type=int, default=Config.precision_bits)
    cfg = Config(p.parse_args().precision_bits)
    print(json.dumps({"config": asdict(cfg), "sweeps": run(cfg)}, indent=2, default=float))


if __name__ == "__main__":
    main()
