"""Command-line front end.

Exit codes: 0 success, 2 verification failure, 3 infeasible construction,
4 bad input.  Errors are reported on stderr as a single line
``error <kind>: <reason>``.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import analysis, document, gallery, realize
from .document import Document, DocumentError
from .geometry import RATIONAL, GeometryError, PointConfiguration, certify_realization, discover_facets
from .lattice import LatticeError, dual_lattice, emn_lattice, lattice_from_incidence, lattice_isomorphism

EXIT_OK, EXIT_VERIFY, EXIT_INFEASIBLE, EXIT_INPUT = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


def _bad(message: str) -> CliError:
    return CliError(EXIT_INPUT, "input", message)


def _number(text: str):
    """Exact Fraction for integer, p/q or decimal literals."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise _bad(f"not a number: {text!r}") from exc


def _read(path: str) -> Document:
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
    except OSError as exc:
        raise _bad(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return document.loads(text)
    except DocumentError as exc:
        raise _bad(str(exc)) from exc


def _lattice_of(doc: Document):
    """Claimed lattice from FACETS, or the discovered one if there is none."""
    try:
        if doc.facets is not None:
            return doc.lattice(), "claimed"
        cfg = doc.config()
        return lattice_from_incidence(len(cfg), discover_facets(cfg)), "discovered"
    except (LatticeError, GeometryError) as exc:
        raise _bad(f"facets do not form a polytope lattice: {exc}") from exc


# --------------------------------------------------------------------------
# construct


def _certified_doc(cfg: PointConfiguration, lattice, meta: dict, certify: bool = True) -> Document:
    if certify:
        cert = certify_realization(cfg, lattice)
        meta["certificate"] = cert.summary()
        if not cert.certified:
            raise CliError(EXIT_VERIFY, "verify", cert.summary())
    return Document.from_config(cfg, lattice, **meta)


def _construct_emn(args) -> Document:
    ratio = None if args.ratio is None else float(_number(args.ratio))
    try:
        E = realize.build_emn(args.m, args.n, ratio, args.method, certify=False)
    except (realize.InfeasibleConstruction, ValueError) as exc:
        raise CliError(EXIT_INFEASIBLE, "infeasible", str(exc)) from exc
    meta = {"construction": "emn", "m": args.m, "n": args.n, "method": args.method}
    if ratio is not None:
        meta["ratio"] = repr(ratio)
    return _certified_doc(E.config, E.lattice, meta, not args.no_certify)


def _unit_triangle():
    return PointConfiguration(((Fraction(1), Fraction(0)), (Fraction(0), Fraction(0)), (Fraction(0), Fraction(1))), RATIONAL)


def _construct_e33(args) -> Document:
    toks = [t for chunk in args.ratios for t in chunk.split(",") if t]
    if len(toks) != 9:
        raise _bad(f"need 9 ratios, got {len(toks)}")
    vals = [_number(t) for t in toks]
    R = [vals[3 * x:3 * x + 3] for x in range(3)]
    branches = tuple(args.branches.split(","))
    if len(branches) != 2 or any(b not in ("plus", "minus") for b in branches):
        raise _bad("branches must be two of plus/minus, e.g. plus,plus")
    tri = _unit_triangle()
    try:
        E = realize.e33_from_ratios(tri, tri, R, branches, certify=False)
    except realize.InfeasibleConstruction as exc:
        raise CliError(EXIT_INFEASIBLE, "infeasible", str(exc)) from exc
    except ValueError as exc:
        raise _bad(str(exc)) from exc
    meta = {"construction": "e33", "ratios": ",".join(toks), "branches": args.branches}
    return _certified_doc(E.config, E.lattice, meta, not args.no_certify)


def _type_doc(cfg: PointConfiguration, target, meta: dict) -> Document:
    tc = analysis.certify_type(cfg, target)
    meta["certificate"] = tc.certificate.summary()
    if not tc.certified:
        raise CliError(EXIT_VERIFY, "verify", tc.certificate.summary() if not tc.certificate.certified
                       else "hull is not of the expected combinatorial type")
    return Document.from_config(cfg, tc.lattice, **meta)


def _construct_family24(args) -> Document:
    vals = [_number(x) for x in (args.a1, args.b1, args.a2, args.b2)]
    try:
        cfg = gallery.family24(gallery.Family24Params(*vals))
    except ValueError as exc:
        raise _bad(str(exc)) from exc
    meta = {"construction": "family24", "params": ",".join(document.format_scalar(v, RATIONAL) for v in vals)}
    return _type_doc(cfg, emn_lattice(4, 4), meta)


def _construct_gallery(args) -> Document:
    try:
        cfg = gallery.fixed_gallery(args.name)
    except KeyError as exc:
        raise _bad(str(exc.args[0])) from exc
    target = emn_lattice(3, 3) if args.name == "feasible_e33" else emn_lattice(4, 4)
    return _type_doc(cfg, target, {"construction": "gallery", "name": args.name})


def _construct_factor(args) -> Document:
    ratio = None if args.ratio is None else float(_number(args.ratio))
    try:
        if args.kind == "cube":
            f = realize.build_cube_factor(args.dim)
        elif args.kind == "simplex":
            f = realize.build_simplex_factor(args.dim, 0.5 if ratio is None else ratio)
        else:
            f = realize.polygon_factor(args.m, 0.5 if ratio is None else ratio, args.method)
    except realize.InfeasibleConstruction as exc:
        raise CliError(EXIT_INFEASIBLE, "infeasible", str(exc)) from exc
    except ValueError as exc:
        raise _bad(str(exc)) from exc
    ok, why = realize.check_vertex_preserving(f) if f.dim >= 2 else (True, "ok")
    if not ok:
        raise CliError(EXIT_VERIFY, "verify", why)
    cfg, L = f.e_realization()
    num = lambda x: document.format_scalar(x, RATIONAL) if f.exact else repr(float(x))
    meta = {
        "construction": "factor",
        "kind": args.kind,
        "dim": f.dim,
        "ratio": num(f.ratio),
        "s": ",".join(num(c) for c in f.s),
    }
    if f.dim <= 2:
        meta["body"] = ";".join(",".join(num(c) for c in p) for p in f.body.points)
    if f.dim == 1:
        return Document.from_config(cfg, L, **meta)
    return _certified_doc(cfg, L, meta)


# --------------------------------------------------------------------------
# reports


def _verify_one(path: str) -> tuple[str, str, str]:
    """(path, status, report line) with status ok / failed / error."""
    try:
        doc = _read(path)
        L, how = _lattice_of(doc)
        cert = certify_realization(doc.config(), L)
    except CliError as exc:
        return path, "error", f"error {exc.kind}: {exc}"
    except GeometryError as exc:
        return path, "error", f"error input: {exc}"
    line = cert.summary() + ("" if how == "claimed" else " (facets discovered)")
    return path, "ok" if cert.certified else "failed", line


def cmd_verify(args) -> int:
    paths = args.files
    if args.jobs > 1 and len(paths) > 1 and "-" not in paths:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_verify_one, paths))
    else:
        results = [_verify_one(p) for p in paths]
    for path, status, line in results:
        text = line if len(paths) == 1 else f"{path}: {line}"
        print(text, file=sys.stderr if status == "error" else sys.stdout)
    statuses = {status for _, status, _ in results}
    if "error" in statuses:
        return EXIT_INPUT
    return EXIT_VERIFY if "failed" in statuses else EXIT_OK


def cmd_flag(args) -> int:
    L, _ = _lattice_of(_read(args.file))
    if args.S is not None:
        try:
            S = [int(x) for x in args.S.split(",") if x != ""]
        except ValueError as exc:
            raise _bad(f"bad index set {args.S!r}") from exc
        if any(not 0 <= s < L.dim for s in S):
            raise _bad(f"indices must lie in 0..{L.dim - 1}")
        print(L.flag_entry(S))
        return EXIT_OK
    print("f " + " ".join(map(str, L.f_vector())))
    for S, val in sorted(L.flag_vector().entries.items(), key=lambda kv: (len(kv[0]), kv[0])):
        print("flag {" + ",".join(map(str, S)) + "} " + str(val))
    return EXIT_OK


def cmd_fatness(args) -> int:
    L, _ = _lattice_of(_read(args.file))
    if L.dim != 4:
        raise _bad("fatness needs a 4-polytope")
    try:
        print(analysis.fatness(L.f_vector()))
    except ZeroDivisionError as exc:
        raise _bad(str(exc)) from exc
    return EXIT_OK


def _emn_params(L):
    """(m, n) with m <= n if the f-vector is that of an E_mn, else None."""
    if L.dim != 4:
        return None
    f0, f1 = L.f_vector()[:2]
    if f1 % 6:
        return None
    p = f1 // 6
    s = f0 - p
    disc = s * s - 4 * p
    if disc < 0 or math.isqrt(disc) ** 2 != disc:
        return None
    m, n = (s - math.isqrt(disc)) // 2, (s + math.isqrt(disc)) // 2
    if m < 3 or m * n != p:
        return None
    return m, n


def cmd_dual_check(args) -> int:
    doc = _read(args.file)
    L, _ = _lattice_of(doc)
    mn = _emn_params(L)
    if mn is not None and L == emn_lattice(*mn):
        analysis.duality_isomorphism(*mn)
        print(f"self-dual: yes (explicit vertex-facet map of E_{mn[0]},{mn[1]}, order 2)")
        return EXIT_OK
    iso = lattice_isomorphism(dual_lattice(L), L)
    print("self-dual: " + ("yes (isomorphism search)" if iso is not None else "no"))
    return EXIT_OK


def cmd_symmetry(args) -> int:
    doc = _read(args.file)
    L, _ = _lattice_of(doc)
    cfg = doc.config()
    if args.perm is not None:
        try:
            perm = analysis.perm_from_cycles(args.perm, len(cfg))
        except (ValueError, IndexError) as exc:
            raise _bad(str(exc)) from exc
        rep = analysis.symmetry_report(cfg, L, {"perm": perm})
    else:
        mn = _emn_params(L)
        if mn is None:
            raise _bad("not an E_mn; pass --perm")
        try:
            rep = analysis.symmetry_report(cfg, L, mn=mn)
        except ValueError as exc:
            raise _bad(str(exc)) from exc
    for line in rep.lines():
        print(line)
    return EXIT_OK


def cmd_export(args) -> int:
    doc = _read(args.file)
    sys.stdout.write(document.FORMATS[args.format](doc))
    return EXIT_OK


def cmd_import(args) -> int:
    doc = _read(args.file)
    sys.stdout.write(document.dumps(doc))
    return EXIT_OK


def cmd_construct(args) -> int:
    builders = {
        "emn": _construct_emn,
        "e33": _construct_e33,
        "family24": _construct_family24,
        "gallery": _construct_gallery,
        "factor": _construct_factor,
    }
    doc = builders[args.what](args)
    sys.stdout.write(document.dumps(doc))
    return EXIT_OK


# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _bad(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="epolytopes", description="E-polytopes of products: construct, certify, analyse.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="build a realization and print it as a document")
    csub = c.add_subparsers(dest="what", required=True, parser_class=_Parser)
    e = csub.add_parser("emn")
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--ratio")
    e.add_argument("--method", choices=("d", "regular"), default="d")
    e.add_argument("--no-certify", action="store_true")
    e = csub.add_parser("e33")
    e.add_argument("--ratios", nargs="+", required=True, help="nine ratios r_xy, row-major")
    e.add_argument("--branches", default="plus,plus")
    e.add_argument("--no-certify", action="store_true")
    e = csub.add_parser("family24")
    for name in ("a1", "b1", "a2", "b2"):
        e.add_argument(f"--{name}", default="0")
    e = csub.add_parser("gallery")
    e.add_argument("name", choices=gallery.GALLERY_NAMES)
    e = csub.add_parser("factor")
    e.add_argument("--kind", choices=("cube", "simplex", "polygon"), required=True)
    e.add_argument("--dim", type=int, default=3)
    e.add_argument("--m", type=int, default=4)
    e.add_argument("--ratio")
    e.add_argument("--method", choices=("d", "regular"), default="d")

    v = sub.add_parser("verify", help="certify documents (exit 0 iff all certified)")
    v.add_argument("files", nargs="+")
    v.add_argument("--jobs", type=int, default=1)

    f = sub.add_parser("flag", help="f-vector and flag vector, or a single entry with --S")
    f.add_argument("file")
    f.add_argument("--S")
    for name in ("fatness", "dual-check", "import"):
        q = sub.add_parser(name)
        q.add_argument("file")
    s = sub.add_parser("symmetry", help="affine/projective realizability of symmetries")
    s.add_argument("file")
    s.add_argument("--perm", help="cycle notation, e.g. (0,4,8)(1,5,9)")
    x = sub.add_parser("export")
    x.add_argument("file")
    x.add_argument("--format", choices=tuple(document.FORMATS), default="polymake")
    return p


COMMANDS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "flag": cmd_flag,
    "fatness": cmd_fatness,
    "dual-check": cmd_dual_check,
    "symmetry": cmd_symmetry,
    "export": cmd_export,
    "import": cmd_import,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error {exc.kind}: {exc}", file=sys.stderr)
        return exc.code
    except (GeometryError, LatticeError) as exc:
        print(f"error input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
