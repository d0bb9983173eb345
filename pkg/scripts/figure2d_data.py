"""Codebooks and assignments of the six 2D runs (n = 41, 10^4 samples) via the CLI.

    python scripts/figure2d_data.py [--out DIR] [--seed N]
"""

import argparse
import json
from pathlib import Path

from bregquant.cli import main as cli_main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("out/fig2d"))
    p.add_argument("--seed", type=int, default=None)
    args = p.parse_args()
    for cfg in sorted(CONFIGS.glob("fig2d_*.json")):
        target = args.out / cfg.stem
        argv = ["quantize2d", "--config", str(cfg), "--out", str(target)]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        status = cli_main(argv)
        report = json.loads((target / "report.json").read_text())
        trace = report["trace"]
        print(f"{cfg.stem}: exit {status}, {trace['iterations']} iterations, "
              f"{sum(trace['reseeded'])} reseeds, distortion {report['distortion']:.6g}")


if __name__ == "__main__":
    main()
