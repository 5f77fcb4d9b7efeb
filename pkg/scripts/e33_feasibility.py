"""Fraction of random ratio matrices in a box that give a feasible, certified E_33.

Compares a box around all-1/2 ratios with a box around the ratios measured
from the fixed E_33 table.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from epolytopes.gallery import fixed_gallery
from epolytopes.geometry import FLOAT, PointConfiguration
from epolytopes.lattice import polygon_lattice
from epolytopes.realize import InfeasibleConstruction, e33_from_ratios, ratio_matrix, split_e_product


@dataclass
class SamplingConfig:
    samples: int = 200
    seed: int = 7
    widths: tuple = (0.05, 0.01, 0.001)


def rate(center: np.ndarray, width: float, cfg: SamplingConfig) -> float:
    rng = np.random.default_rng(cfg.seed)
    tri = PointConfiguration(((1.0, 0.0), (0.0, 0.0), (0.0, 1.0)), FLOAT)
    good = 0
    for _ in range(cfg.samples):
        R = (center + rng.uniform(-width, width, (3, 3))).tolist()
        try:
            good += e33_from_ratios(tri, tri, R).certificate.certified
        except InfeasibleConstruction:
            pass
    return good / cfg.samples


def run(cfg: SamplingConfig) -> None:
    f0, f1 = split_e_product(fixed_gallery("feasible_e33"), 2, 3, 3, polygon_lattice(3), polygon_lattice(3))
    centers = {"half": np.full((3, 3), 0.5), "table": np.array(ratio_matrix(f0, f1), dtype=float)}
    print("center width feasible_fraction")
    for name, c in centers.items():
        for w in cfg.widths:
            print(f"{name} {w} {rate(c, w, cfg):.3f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--widths", type=float, nargs="+", default=[0.05, 0.01, 0.001])
    a = p.parse_args()
    run(SamplingConfig(a.samples, a.seed, tuple(a.widths)))
