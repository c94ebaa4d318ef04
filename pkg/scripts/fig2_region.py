"""Revelation verdicts over the (p2, p3) plane at fixed theta1, theta3, p1.

Writes a CSV with one row per grid point; a plotting tool can colour it by verdict.
"""
import argparse
import csv
from dataclasses import dataclass

import numpy as np

from hidden_gtnl.scan import REVEALED, classify_point, closed_form_verdict
from hidden_gtnl.states import StateFamilyParams


@dataclass
class Fig2Config:
    theta1: float = 0.1
    theta3: float = 0.144
    p1: float = 0.3
    step: float = 0.01
    pipeline: bool = False   # full swapping simulation instead of closed forms
    output: str = "fig2_region.csv"


def main(cfg: Fig2Config):
    grid = np.round(np.arange(0, 1 + cfg.step / 2, cfg.step), 10)
    counts = {}
    with open(cfg.output, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p2", "p3", "verdict", "revealed"])
        for p2 in grid:
            for p3 in grid:
                params = StateFamilyParams(cfg.theta1, cfg.p1, p2, cfg.theta3, p3)
                v = classify_point(params).verdict if cfg.pipeline else closed_form_verdict(params)
                counts[v.value] = counts.get(v.value, 0) + 1
                w.writerow([p2, p3, v.value, v in REVEALED])
    print(f"wrote {cfg.output}: {counts}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(Fig2Config()).items():
        kind = (lambda s: s.lower() in ("1", "true", "yes")) if isinstance(default, bool) else type(default)
        ap.add_argument(f"--{name.replace('_', '-')}", type=kind, default=default)
    main(Fig2Config(**vars(ap.parse_args())))
