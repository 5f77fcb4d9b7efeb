"""Affine/projective realizability of the rotations of E_mn on concrete realizations,
and the projective automorphism scan of the fixed 24-cell tables."""
import argparse
from dataclasses import dataclass

from epolytopes.analysis import certify_type, projective_automorphism_scan, symmetry_report
from epolytopes.gallery import fixed_gallery
from epolytopes.realize import InfeasibleConstruction, build_emn


@dataclass
class ScanConfig:
    max_mn: int = 7
    tables: bool = True


def run(cfg: ScanConfig) -> None:
    for m in range(3, cfg.max_mn + 1):
        for n in range(m, cfg.max_mn + 1):
            for method in ("d", "regular"):
                try:
                    E = build_emn(m, n, method=method)
                except InfeasibleConstruction:
                    continue
                rep = symmetry_report(E.config, E.lattice, mn=(m, n))
                flags = " ".join(f"{e.name}={'A' if e.affine else 'P' if e.projective else '-'}"
                                 for e in rep.entries if e.name != "self-duality")
                print(f"E_{m},{n} {method}: {flags}")
    if cfg.tables:
        for name in ("no_proj_autos_24cell", "regular_squares_e44"):
            c = fixed_gallery(name)
            order, found = projective_automorphism_scan(c, certify_type(c).lattice)
            print(f"{name}: {found} of {order - 1} nontrivial automorphisms are projective")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-mn", type=int, default=7)
    p.add_argument("--no-tables", action="store_true")
    a = p.parse_args()
    run(ScanConfig(a.max_mn, not a.no_tables))
