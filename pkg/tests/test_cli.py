import io
import subprocess
import sys

import pytest

from epolytopes import document
from epolytopes.cli import main
from epolytopes.gallery import GALLERY_NAMES


def run(capsys, monkeypatch, argv, stdin=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def run_cli(capsys, monkeypatch):
    return lambda argv, stdin=None: run(capsys, monkeypatch, argv, stdin)


def construct(run_cli, *argv):
    code, out, err = run_cli(["construct", *argv])
    assert code == 0, err
    return out


def test_regular_e44_pipeline(run_cli):
    doc = construct(run_cli, "emn", "--m", "4", "--n", "4", "--method", "regular")
    code, out, _ = run_cli(["verify", "-"], stdin=doc)
    assert code == 0 and out.startswith("certified, facets=24")


def test_fatness_e10_10(run_cli, tmp_path):
    path = tmp_path / "e.txt"
    path.write_text(construct(run_cli, "emn", "--m", "10", "--n", "10"))
    code, out, _ = run_cli(["fatness", str(path)])
    assert code == 0 and out.strip() == "118/23"


def test_flag_entry(run_cli, tmp_path):
    path = tmp_path / "e.txt"
    path.write_text(construct(run_cli, "emn", "--m", "3", "--n", "4"))
    assert run_cli(["flag", str(path), "--S", "0,3"])[1].strip() == "110"
    code, out, _ = run_cli(["flag", str(path)])
    assert out.splitlines()[0] == "f 19 72 72 19"
    assert "flag {0,3} 110" in out.splitlines()
    assert run_cli(["flag", str(path), "--S", "0,7"])[0] == 4


def test_exit_codes(run_cli, tmp_path):
    code, _, err = run_cli(["construct", "emn", "--m", "5", "--n", "5", "--method", "regular"])
    assert code == 3 and err.startswith("error infeasible:")
    code, _, err = run_cli(["construct", "e33", "--ratios"] + ["0.5"] * 9)
    assert code == 3 and "degenerate" in err
    code, _, err = run_cli(["construct", "e33", "--ratios", "0.5,0.5"])
    assert code == 4
    assert run_cli(["verify", str(tmp_path / "missing.txt")])[0] == 4
    assert run_cli(["bogus"])[0] == 4
    assert run_cli(["construct", "family24", "--a1", "1"])[0] == 4
    assert run_cli(["verify", "-"], stdin="DIM\n2\nBACKEND\nrational\nPOINTS\n1 0 0\n1 x 0\n")[0] == 4
    assert len(err.strip().splitlines()) == 1


def test_verify_failure_exit_2(run_cli):
    # the square with its diagonals claimed as edges
    bad = "DIM\n2\nBACKEND\nrational\nPOINTS\n1 1 1\n1 -1 1\n1 -1 -1\n1 1 -1\nFACETS\n{0 2}\n{1 2}\n{1 3}\n{0 3}\n"
    code, out, _ = run_cli(["verify", "-"], stdin=bad)
    assert code == 2 and out.startswith("failed")


def test_e33_table_ratios(run_cli):
    ratios = "91/125,3/5,2/5,2/5,91/125,3/5,3/5,2/5,91/125"
    doc = document.loads(construct(run_cli, "e33", "--ratios", ratios))
    assert doc.backend == "rational" and len(doc.points) == 15
    assert doc.meta["certificate"].startswith("certified")


@pytest.mark.parametrize("fmt", ["native", "polymake", "json"])
@pytest.mark.parametrize("name", GALLERY_NAMES)
def test_roundtrip_gallery(run_cli, tmp_path, fmt, name):
    src = construct(run_cli, "gallery", name)
    path = tmp_path / "doc"
    path.write_text(src)
    code, exported, _ = run_cli(["export", str(path), "--format", fmt])
    assert code == 0
    path.write_text(exported)
    code, back, _ = run_cli(["import", str(path)])
    a, b = document.loads(src), document.loads(back)
    assert a.points == b.points and a.facets == b.facets and a.backend == b.backend


def test_float_roundtrip_is_exact(run_cli, tmp_path):
    src = construct(run_cli, "emn", "--m", "5", "--n", "7")
    path = tmp_path / "doc"
    path.write_text(src)
    back = run_cli(["export", str(path), "--format", "json"])[1]
    assert document.loads(back).points == document.loads(src).points


def test_factor_and_family(run_cli):
    for argv in (["--kind", "cube", "--dim", "3"], ["--kind", "simplex", "--dim", "3", "--ratio", "0.6"],
                 ["--kind", "polygon", "--m", "6", "--ratio", "1/2"]):
        out = construct(run_cli, "factor", *argv)
        assert "construction factor" in out
    out = construct(run_cli, "family24", "--a1", "3/10", "--b2", "-0.2")
    assert document.loads(out).meta["params"] == "3/10,0,0,-1/5"


def test_dual_check_and_symmetry(run_cli, tmp_path):
    path = tmp_path / "e.txt"
    path.write_text(construct(run_cli, "emn", "--m", "3", "--n", "6", "--method", "regular"))
    code, out, _ = run_cli(["dual-check", str(path)])
    assert code == 0 and out.startswith("self-dual: yes")
    code, out, _ = run_cli(["symmetry", str(path)])
    assert code == 0 and "S_m: automorphism=yes affine=yes" in out
    code, out, _ = run_cli(["symmetry", str(path), "--perm", "(0,1)"])
    assert code == 0 and "automorphism=no" in out


def test_batch_verify(run_cli, tmp_path):
    paths = []
    for name in GALLERY_NAMES:
        p = tmp_path / f"{name}.txt"
        p.write_text(construct(run_cli, "gallery", name))
        paths.append(str(p))
    code, out, _ = run_cli(["verify", "--jobs", "2", *paths])
    assert code == 0 and out.count("certified") == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "epolytopes", "construct", "gallery", "feasible_e33"],
                       capture_output=True, text=True, check=True)
    assert r.stdout.startswith("DIM\n4\n")
