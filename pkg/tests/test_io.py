import numpy as np
import pytest
from numpy.testing import assert_allclose

from pkscale.errors import ParseError
from pkscale.io import (
    load_manifest,
    load_matrix,
    load_signal,
    read_pgm,
    save_matrix,
    save_pgm,
    save_signal,
)


@pytest.mark.parametrize("binary", [False, True])
def test_matrix_round_trip(tmp_path, binary):
    rng = np.random.default_rng(1)
    m = rng.uniform(-1e3, 1e3, (5, 7))
    m[0, 0] = 1.0 / 3.0
    path = tmp_path / "m.pkm"
    save_matrix(path, m, binary=binary)
    assert_allclose(load_matrix(path), m, rtol=0, atol=0)


@pytest.mark.parametrize("binary", [False, True])
def test_signal_round_trip(tmp_path, binary):
    rng = np.random.default_rng(2)
    s = rng.standard_normal(33)
    path = tmp_path / "s.pks"
    save_signal(path, s, binary=binary)
    assert_allclose(load_signal(path), s, rtol=0, atol=0)


def test_text_formats_are_line_oriented(tmp_path):
    path = tmp_path / "m.pkm"
    save_matrix(path, [[1.0, 2.0], [3.0, 4.0]])
    lines = path.read_text().splitlines()
    assert lines[0] == "PKM 2 2"
    assert lines[1].split() == ["1", "2"]


def test_save_rejects_wrong_rank(tmp_path):
    with pytest.raises(ParseError):
        save_matrix(tmp_path / "m.pkm", np.ones(4))
    with pytest.raises(ParseError):
        save_signal(tmp_path / "s.pks", np.ones((2, 2)))


def test_load_matrix_bad_magic(tmp_path):
    path = tmp_path / "bad.pkm"
    path.write_text("NOPE 2 2\n1 2 3 4\n")
    with pytest.raises(ParseError, match="bad.pkm"):
        load_matrix(path)


def test_load_matrix_header_errors(tmp_path):
    cases = [
        "PKM 2\n1 2\n",             # wrong field count
        "PKM a 2\n1 2\n",           # non-integer dimension
        "PKM 0 2\n\n",               # non-positive dimension
    ]
    for i, text in enumerate(cases):
        path = tmp_path / f"h{i}.pkm"
        path.write_text(text)
        with pytest.raises(ParseError):
            load_matrix(path)


def test_load_matrix_payload_errors(tmp_path):
    short = tmp_path / "short.pkm"
    short.write_text("PKM 2 2\n1 2 3\n")
    with pytest.raises(ParseError, match="expected 4 values"):
        load_matrix(short)
    alpha = tmp_path / "alpha.pkm"
    alpha.write_text("PKM 1 2\n1 x\n")
    with pytest.raises(ParseError, match="non-numeric"):
        load_matrix(alpha)
    inf = tmp_path / "inf.pkm"
    inf.write_text("PKM 1 2\n1 inf\n")
    with pytest.raises(ParseError, match="non-finite"):
        load_matrix(inf)


def test_load_binary_truncated_payload(tmp_path):
    path = tmp_path / "trunc.pks"
    with open(path, "wb") as fh:
        fh.write(b"PKSB 4\n")
        fh.write(b"\x00" * 16)
    with pytest.raises(ParseError, match="payload bytes"):
        load_signal(path)


def test_load_signal_rejects_matrix_magic(tmp_path):
    path = tmp_path / "m.pkm"
    save_matrix(path, np.ones((2, 2)))
    with pytest.raises(ParseError, match="magic"):
        load_signal(path)


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    img = rng.uniform(0.0, 1.0, (6, 9))
    path = tmp_path / "img.pgm"
    save_pgm(path, img)
    back = read_pgm(path)
    assert back.shape == (6, 9)
    assert np.all((back >= 0.0) & (back <= 1.0))
    # 8-bit quantization bounds the round-trip error by half a level
    assert np.abs(back - img).max() <= 0.5 / 255.0 + 1e-12


def test_pgm_header_comments_skipped(tmp_path):
    path = tmp_path / "c.pgm"
    with open(path, "wb") as fh:
        fh.write(b"P5\n# a comment line\n3 # trailing\n2\n255\n")
        fh.write(bytes(range(6)))
    img = read_pgm(path)
    assert img.shape == (2, 3)
    assert_allclose(img[0, 1], 1.0 / 255.0)


def test_pgm_rejects_ascii_variant(tmp_path):
    path = tmp_path / "p2.pgm"
    path.write_bytes(b"P2\n2 2\n255\n0 1 2 3\n")
    with pytest.raises(ParseError, match="magic"):
        read_pgm(path)


def test_pgm_rejects_wide_maxval_and_truncation(tmp_path):
    wide = tmp_path / "wide.pgm"
    wide.write_bytes(b"P5\n2 2\n65535\n" + b"\x00" * 8)
    with pytest.raises(ParseError, match="8-bit"):
        read_pgm(wide)
    trunc = tmp_path / "t.pgm"
    trunc.write_bytes(b"P5\n4 4\n255\n" + b"\x00" * 7)
    with pytest.raises(ParseError, match="raster"):
        read_pgm(trunc)


def test_manifest_parses_and_resolves(tmp_path):
    sub = tmp_path / "db"
    sub.mkdir()
    (sub / "entries.tsv").write_text(
        "# comment\n"
        "\n"
        "alpha\tsignals/a.pks\n"
        f"beta\t{tmp_path / 'b.pks'}\n")
    rows = load_manifest(sub / "entries.tsv")
    assert rows[0][0] == "alpha"
    assert rows[0][1] == sub / "signals" / "a.pks"
    assert rows[1] == ("beta", tmp_path / "b.pks")


def test_manifest_rejects_malformed_line(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("only-one-field\n")
    with pytest.raises(ParseError, match="line 1"):
        load_manifest(path)
