"""Text format round trips, format error classification, CLI exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import meet_quantale, meet_tables
from morita import cli
from morita import io as mio
from morita.engine import (InvolutiveWitness, MoritaPairWitness,
                           build_context_from_pair, build_involutive_context,
                           check_morita_context)
from morita.errors import (FormatError, MissingInvolution, MoritaError,
                           NotAMultimorphism)
from morita.lattice import chain, diamond, m3, n5
from morita.modules import Bimodule, ModuleAction
from morita.quantale import InvolutiveQuantale, as_involutive_quantale, \
    endo_quantale
from morita.tensor import as_multimorphism, tensor_product


# --- formats -------------------------------------------------------------------------

def test_lattice_roundtrip_bit_exact(tmp_path):
    for lat in (chain(1), chain(4), diamond(), m3(), n5()):
        path = tmp_path / "l.lat"
        mio.write_lattice(path, lat)
        back = mio.read_lattice(path)
        assert back == lat and back.names == lat.names
        first = path.read_bytes()
        mio.write_lattice(path, back)
        assert path.read_bytes() == first


def test_lattice_parse_errors(tmp_path):
    cases = {
        "empty.lat": "",
        "short_names.lat": "n=2\nnames=a\nleq=11;01\n",
        "bad_row.lat": "n=2\nnames=a,b\nleq=11;0\n",
        "bad_char.lat": "n=2\nnames=a,b\nleq=11;0x\n",
        "bad_n.lat": "n=two\nnames=a,b\nleq=11;01\n",
        "dup_field.lat": "n=1\nn=1\nnames=a\nleq=1\n",
        "no_rows.lat": "n=2\nnames=a,b\n",
        "stray.lat": "n=1\nnames=a\nleq=1\nwhat is this\n",
    }
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(FormatError):
            mio.read_lattice(path)


def test_lattice_comments_and_blank_lines(tmp_path):
    path = tmp_path / "c.lat"
    path.write_text("# a chain\n\nn=2  # two points\nnames=a,b\nleq=11;01\n")
    lat = mio.read_lattice(path)
    assert lat.n == 2 and lat.names == ("a", "b")


def test_invalid_order_is_not_a_format_error(tmp_path):
    path = tmp_path / "anti.lat"
    path.write_text("n=2\nnames=a,b\nleq=10;01\n")
    leq, names = mio.read_lattice_raw(path)
    assert leq.shape == (2, 2)
    with pytest.raises(MoritaError) as exc:
        mio.read_lattice(path)
    assert not isinstance(exc.value, FormatError)


def test_write_rejects_unserializable_names(tmp_path):
    lat = chain(2).relabel(("a,b", "c"))
    with pytest.raises(FormatError):
        mio.write_lattice(tmp_path / "bad.lat", lat)


def test_quantale_roundtrip(tmp_path):
    path = tmp_path / "q.qnt"
    for q in (meet_quantale(diamond()), endo_quantale(chain(3))):
        mio.write_quantale(path, q)
        back = mio.read_quantale(path)
        assert back == q and back.carrier.names == q.carrier.names


def test_involutive_quantale_roundtrip(tmp_path):
    path = tmp_path / "iq.qnt"
    iq = as_involutive_quantale(endo_quantale(chain(3)), (0, 1, 3, 2, 4, 5))
    mio.write_quantale(path, iq)
    back = mio.read_quantale(path)
    assert isinstance(back, InvolutiveQuantale)
    assert back.star == iq.star and back.quantale == iq.quantale


def test_quantale_with_bad_star_rejected(tmp_path):
    path = tmp_path / "bad.qnt"
    q = endo_quantale(chain(3))
    mio.write_quantale(path, q)
    path.write_text(path.read_text() + "star=0,1,2,3,4,5\n")
    with pytest.raises(MissingInvolution):
        mio.read_quantale(path)
    path.write_text(path.read_text().replace("star=0,1,2,3,4,5", "star=0,1"))
    with pytest.raises(FormatError):
        mio.read_quantale(path)


def test_map_roundtrip_and_validation(tmp_path):
    x = chain(3)
    mio.write_lattice(tmp_path / "x.lat", x)
    f = as_multimorphism((x, x), x, x.meet)
    path = tmp_path / "f.map"
    mio.write_map(path, f, ("x.lat", "x.lat"), "x.lat")
    back = mio.read_map(path)
    assert back == f

    lines = path.read_text().splitlines()
    (tmp_path / "missing.map").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(FormatError):
        mio.read_map(tmp_path / "missing.map")
    (tmp_path / "dup.map").write_text("\n".join(lines + [lines[-1]]) + "\n")
    with pytest.raises(FormatError):
        mio.read_map(tmp_path / "dup.map")
    (tmp_path / "range.map").write_text(
        "\n".join(lines).replace("2,2 -> 2", "2,2 -> 9") + "\n")
    with pytest.raises(FormatError):
        mio.read_map(tmp_path / "range.map")
    # a complete table that breaks join preservation is rejected on load
    broken = "\n".join(lines).replace("2,2 -> 2", "2,2 -> 0") + "\n"
    (tmp_path / "notmorph.map").write_text(broken)
    with pytest.raises(NotAMultimorphism):
        mio.read_map(tmp_path / "notmorph.map")


def test_elem_sidecar_roundtrip(tmp_path):
    t = tensor_product(chain(3), diamond())
    path = tmp_path / "t.elem"
    mio.write_elem(path, t)
    table = mio.read_elem(path, 2)
    for coords in np.ndindex(3, 4):
        assert table[coords] == t.elem(coords)


def test_action_roundtrip_single_sided(tmp_path):
    lat = chain(3)
    q = meet_quantale(lat)
    mio.write_lattice(tmp_path / "x.lat", lat)
    mio.write_quantale(tmp_path / "a.qnt", q)
    mod = ModuleAction("left", q, lat, lat.meet)
    path = tmp_path / "m.act"
    mio.write_action(path, mod, {"carrier": "x.lat", "quantale": "a.qnt"})
    back = mio.read_action(path)
    assert isinstance(back, ModuleAction)
    assert back.side == "left" and back.carrier == lat
    assert np.array_equal(back.act, mod.act)


def test_action_roundtrip_bimodule(tmp_path):
    lat = chain(3)
    q = meet_quantale(lat)
    mio.write_lattice(tmp_path / "x.lat", lat)
    mio.write_quantale(tmp_path / "a.qnt", q)
    bim = Bimodule(ModuleAction("left", q, lat, lat.meet),
                   ModuleAction("right", q, lat, lat.meet))
    path = tmp_path / "m.act"
    mio.write_action(path, bim, {"carrier": "x.lat",
                                 "left_quantale": "a.qnt",
                                 "right_quantale": "a.qnt"})
    back = mio.read_action(path)
    assert isinstance(back, Bimodule)
    assert np.array_equal(back.left.act, bim.left.act)
    assert np.array_equal(back.right.act, bim.right.act)


def build_meet_context(lat):
    t = meet_tables(lat)
    return build_context_from_pair(
        MoritaPairWitness.from_generators(lat, lat, t, t))


def test_context_bundle_roundtrip(tmp_path):
    ctx = build_meet_context(chain(3))
    mio.write_context(tmp_path / "bundle", ctx)
    for name in mio.CONTEXT_FILES:
        assert (tmp_path / "bundle" / name).exists()
    back = mio.read_context(tmp_path / "bundle")
    assert check_morita_context(back).ok
    assert back.a == ctx.a and back.b == ctx.b
    assert np.array_equal(back.pair_xy.values, ctx.pair_xy.values)


def test_context_bundle_with_stars(tmp_path):
    w = InvolutiveWitness.from_generators(chain(3), meet_tables(chain(3)))
    ctx, (ia, ib), _ = build_involutive_context(w)
    mio.write_context(tmp_path / "bundle", ctx, stars=(ia, ib))
    qa = mio.read_quantale(tmp_path / "bundle" / "A.qnt")
    assert isinstance(qa, InvolutiveQuantale) and qa.star == ia.star
    assert check_morita_context(mio.read_context(tmp_path / "bundle")).ok


def test_context_bundle_missing_file(tmp_path):
    ctx = build_meet_context(chain(2))
    mio.write_context(tmp_path / "bundle", ctx)
    (tmp_path / "bundle" / "Y.act").unlink()
    with pytest.raises(FormatError):
        mio.read_context(tmp_path / "bundle")


# --- CLI -----------------------------------------------------------------------------

@pytest.fixture
def workdir(tmp_path):
    x2, x3 = chain(2), chain(3)
    mio.write_lattice(tmp_path / "c2.lat", x2)
    mio.write_lattice(tmp_path / "c3.lat", x3)
    p = as_multimorphism((x3, x3, x3), x3, meet_tables(x3))
    mio.write_map(tmp_path / "p33.map", p, ("c3.lat",) * 3, "c3.lat")
    z = as_multimorphism((x3, x3, x3), x3, np.zeros((3, 3, 3), np.int64))
    mio.write_map(tmp_path / "zero33.map", z, ("c3.lat",) * 3, "c3.lat")
    (tmp_path / "anti.lat").write_text("n=2\nnames=a,b\nleq=10;01\n")
    (tmp_path / "garbled.lat").write_text("n=2\nnames=a,b\nleq=1\n")
    return tmp_path


def test_cli_validate_exit_codes(workdir):
    assert cli.main(["validate", str(workdir / "c3.lat")]) == 0
    assert cli.main(["validate", str(workdir / "anti.lat")]) == 1
    assert cli.main(["validate", str(workdir / "garbled.lat")]) == 2
    assert cli.main(["validate", str(workdir / "absent.lat")]) == 2


def test_cli_tensor(workdir):
    out = workdir / "t.lat"
    code = cli.main(["tensor", str(workdir / "c3.lat"),
                     str(workdir / "c3.lat"), "-o", str(out)])
    assert code == 0
    assert mio.read_lattice(out).n == 6
    assert mio.read_elem(workdir / "t.elem", 2)[(2, 2)] == 5
    assert cli.main(["tensor", str(workdir / "c3.lat"), "-o", str(out)]) == 2


def test_cli_tensor_cap(workdir, monkeypatch):
    monkeypatch.setenv("MORITA_MAX_TENSOR", "4")
    code = cli.main(["tensor", str(workdir / "c3.lat"),
                     str(workdir / "c3.lat"), "-o", str(workdir / "t.lat")])
    assert code == 2


def test_cli_endo(workdir, capsys):
    assert cli.main(["endo", str(workdir / "c2.lat"),
                     "-o", str(workdir / "q.qnt")]) == 0
    out = capsys.readouterr().out
    assert "2 sup-endomorphisms" in out
    assert mio.read_quantale(workdir / "q.qnt").n == 2


def test_cli_check_pair(workdir, capsys):
    base = ["check-pair", "--x", str(workdir / "c3.lat"),
            "--y", str(workdir / "c3.lat"), "--p", str(workdir / "p33.map")]
    assert cli.main(base + ["--q", str(workdir / "p33.map")]) == 0
    assert "8/8 laws hold" in capsys.readouterr().out
    assert cli.main(base + ["--q", str(workdir / "zero33.map")]) == 1
    out = capsys.readouterr().out
    assert "FAIL q-surjective" in out
    # wiring mismatch is an input error, not a failed check
    assert cli.main(["check-pair", "--x", str(workdir / "c2.lat"),
                     "--y", str(workdir / "c3.lat"),
                     "--p", str(workdir / "p33.map"),
                     "--q", str(workdir / "p33.map")]) == 2


def test_cli_context_workflow(workdir, capsys):
    ctx_dir = workdir / "ctx"
    base = ["--x", str(workdir / "c3.lat"), "--y", str(workdir / "c3.lat"),
            "--p", str(workdir / "p33.map"), "--q", str(workdir / "p33.map")]
    assert cli.main(["build-context"] + base + ["-o", str(ctx_dir)]) == 0
    assert cli.main(["check-context", str(ctx_dir)]) == 0
    assert "20/20 laws hold" in capsys.readouterr().out

    p_out = workdir / "out_p.map"
    q_out = workdir / "out_q.map"
    assert cli.main(["extract", str(ctx_dir),
                     "-o", f"{p_out},{q_out}"]) == 0
    assert mio.read_map(p_out) == mio.read_map(workdir / "p33.map")
    assert mio.read_map(q_out) == mio.read_map(workdir / "p33.map")

    # a failing pair refuses to build
    assert cli.main(["build-context", "--x", str(workdir / "c3.lat"),
                     "--y", str(workdir / "c3.lat"),
                     "--p", str(workdir / "p33.map"),
                     "--q", str(workdir / "zero33.map"),
                     "-o", str(workdir / "nope")]) == 1
    assert not (workdir / "nope").exists()


def test_cli_check_context_flags_tampering(workdir):
    ctx_dir = workdir / "ctx"
    base = ["--x", str(workdir / "c3.lat"), "--y", str(workdir / "c3.lat"),
            "--p", str(workdir / "p33.map"), "--q", str(workdir / "p33.map")]
    assert cli.main(["build-context"] + base + ["-o", str(ctx_dir)]) == 0
    pair = ctx_dir / "pairXY.map"
    pair.write_text(pair.read_text().replace("2,2 -> 2", "2,2 -> 1"))
    code = cli.main(["check-context", str(ctx_dir)])
    assert code in (1, 2)  # broken law or no longer a multimorphism


def test_cli_check_involutive(workdir):
    assert cli.main(["check-involutive", "--x", str(workdir / "c3.lat"),
                     "--p", str(workdir / "p33.map")]) == 0
    assert cli.main(["check-involutive", "--x", str(workdir / "c3.lat"),
                     "--p", str(workdir / "zero33.map")]) == 1


def test_cli_census(workdir, capsys):
    out = workdir / "census.jsonl"
    assert cli.main(["census", "--max-x", "2", "--min-x", "2", "--min-y", "2",
                     "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["mode"] == "general"
    capsys.readouterr()
    assert cli.main(["census", "--max-x", "2", "--involutive"]) == 0
    printed = capsys.readouterr().out
    assert "mode=involutive" in printed
    assert cli.main(["census", "--max-x", "0"]) == 2


def test_cli_census_deterministic_across_jobs(workdir):
    outs = []
    for jobs in ("1", "3"):
        path = workdir / f"c{jobs}.jsonl"
        assert cli.main(["census", "--max-x", "3", "--jobs", jobs,
                         "-o", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_cli_rejects_unknown_command():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_console_script_entry_point(workdir):
    r = subprocess.run(["morita", "validate", str(workdir / "c3.lat")],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "PASS" in r.stdout
