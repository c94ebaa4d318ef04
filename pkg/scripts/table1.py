"""Range of p3 where the swapped state violates a facet while the inputs do not.

Uses the built-in Svetlichny and facet-3 inequalities unless a facet file is given.
"""
import argparse
from dataclasses import dataclass
from typing import Optional

from hidden_gtnl.bellineq import ns3_facet, read_facet_file, svetlichny_facet
from hidden_gtnl.optimize import OptimizerConfig
from hidden_gtnl.scan import ns_revelation_range

ROWS = (0.1, 0.3, 0.5, 0.7, 0.785)


@dataclass
class Table1Config:
    facet_file: Optional[str] = None
    theta1: float = 0.1
    p1: float = 0.5
    p2: float = 0.6
    starts: int = 32
    width: float = 1e-3


def main(cfg: Table1Config):
    facets = read_facet_file(cfg.facet_file) if cfg.facet_file else [svetlichny_facet(), ns3_facet()]
    label = cfg.facet_file or "built-in facets 185 and 3 (partial coverage)"
    print(f"facet set: {label}")
    for theta3 in ROWS:
        lo, hi = ns_revelation_range(facets, cfg.theta1, theta3, cfg.p1, cfg.p2,
                                     OptimizerConfig(starts=cfg.starts), cfg.width)
        print(f"theta3={theta3:<6} p3 in [{lo:.4f}, {hi:.4f}]")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--facet-file", default=None)
    for name, default in vars(Table1Config()).items():
        if name != "facet_file":
            ap.add_argument(f"--{name}", type=type(default), default=default)
    main(Table1Config(**vars(ap.parse_args())))
