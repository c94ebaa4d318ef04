"""Largest facet-3 value on rho1 against p1, before and after diagonal filtering."""
import argparse
from dataclasses import dataclass

import numpy as np

from hidden_gtnl.bellineq import ns3_facet
from hidden_gtnl.optimize import OptimizerConfig, maximize_facet, maximize_facet_filtered
from hidden_gtnl.states import make_rho1


@dataclass
class Facet3Config:
    theta1: float = 0.1
    lo: float = 0.49
    hi: float = 0.53
    points: int = 9
    starts: int = 512
    filtered: bool = True


def main(cfg: Facet3Config):
    opt = OptimizerConfig(starts=cfg.starts)
    print("p1         excess_unfiltered  excess_filtered  filters")
    for p1 in np.linspace(cfg.lo, cfg.hi, cfg.points):
        rho = make_rho1(cfg.theta1, p1)
        plain = maximize_facet(rho, ns3_facet(), opt).value - 4
        line = f"{p1:.5f}    {plain: .3e}"
        if cfg.filtered:
            r = maximize_facet_filtered(rho, ns3_facet(), opt)
            line += f"         {r.value - 4: .3e}       {np.round(r.filters.as_tuple(), 4).tolist()}"
        print(line)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(Facet3Config()).items():
        kind = (lambda s: s.lower() in ("1", "true", "yes")) if isinstance(default, bool) else type(default)
        ap.add_argument(f"--{name}", type=kind, default=default)
    main(Facet3Config(**vars(ap.parse_args())))
