"""Svetlichny violation thresholds of the four families, with and without local filters."""
import argparse
from dataclasses import dataclass

from hidden_gtnl.bellineq import svetlichny_facet
from hidden_gtnl.optimize import OptimizerConfig, violation_threshold
from hidden_gtnl.scan import svetlichny_threshold
from hidden_gtnl.states import Family, StateFamilyParams, make_rho4_closed_form


@dataclass
class ThresholdConfig:
    theta1: float = 0.1
    theta3: float = 0.144
    starts: int = 64


def main(cfg: ThresholdConfig):
    base = StateFamilyParams(theta1=cfg.theta1, theta3=cfg.theta3)
    for fam in (Family.RHO1, Family.RHO2, Family.RHO3):
        plain = svetlichny_threshold(fam, base)
        filt = svetlichny_threshold(fam, base, filtered=True)
        print(f"{fam.value}: unfiltered {plain}  filtered {filt}")
    t4 = violation_threshold(lambda p3: make_rho4_closed_form(cfg.theta1, cfg.theta3, p3),
                             svetlichny_facet(), 0.3, 1.0, OptimizerConfig(starts=cfg.starts))
    print(f"rho4 (optimizer): p3 > {t4:.5f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(ThresholdConfig()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    main(ThresholdConfig(**vars(ap.parse_args())))
