"""Assemble E_mn from D-factors over a grid and report certificate margins and timings."""
import argparse
import time
from dataclasses import dataclass

from epolytopes.realize import assemble_e_product, build_polygon_d


@dataclass
class GridConfig:
    lo: int = 3
    hi: int = 10
    ratio: float = 0.5


def run(cfg: GridConfig) -> None:
    print("m n facets min_margin seconds")
    for m in range(cfg.lo, cfg.hi + 1):
        for n in range(cfg.lo, cfg.hi + 1):
            t0 = time.perf_counter()
            E = assemble_e_product(build_polygon_d(m, cfg.ratio).as_factor(), build_polygon_d(n, cfg.ratio).as_factor())
            dt = time.perf_counter() - t0
            c = E.certificate
            print(f"{m} {n} {len(c.facet_evidence)} {float(c.global_min_margin):.4g} {dt:.3f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--lo", type=int, default=3)
    p.add_argument("--hi", type=int, default=10)
    p.add_argument("--ratio", type=float, default=0.5)
    run(GridConfig(**vars(p.parse_args())))
