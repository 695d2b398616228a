import json
import subprocess
import sys

import numpy as np
import pytest

from reliefkit import cli
from reliefkit.luminance import GrayImage, RgbImage, encode_pnm
from reliefkit.mesh import expected_facet_count, validate
from reliefkit.stl import read_stl


@pytest.fixture
def gradient(tmp_path):
    path = tmp_path / "gradient.pgm"
    g = np.tile(np.arange(64) / 63.0, (64, 1))
    path.write_bytes(encode_pnm(GrayImage(g)))
    return path


def quiet(msg):
    pass


def run(argv):
    cfg = cli.parse_args([str(a) for a in argv])
    return cli.run(cfg, log=quiet)


def test_parse_defaults():
    cfg = cli.parse_args(["--input", "a.pgm", "--output", "a.stl"])
    assert (cfg.kernel, cfg.rounds, cfg.zmin, cfg.zmax, cfg.base) == ("haar", 2, 2.0, 10.0, 0.5)
    assert (cfg.format, cfg.sx, cfg.sy, cfg.threshold, cfg.slice_dz) == ("binary", 1, 1, None, None)


def test_parse_d4():
    cfg = cli.parse_args(["--input", "a", "--output", "b", "--kernel", "d4", "--rounds", "1"])
    assert (cfg.kernel, cfg.rounds) == ("d4", 1)


def test_parse_errors():
    with pytest.raises(cli.ConfigError):
        cli.parse_args(["--input", "a", "--output", "b", "--rounds", "-1"])
    with pytest.raises(cli.UsageError, match="usage"):
        cli.parse_args(["--rounds", "-1"])
    with pytest.raises(cli.UsageError, match="unrecognized"):
        cli.parse_args(["--input", "a", "--output", "b", "--bogus"])
    with pytest.raises(cli.UsageError, match="invalid float"):
        cli.parse_args(["--input", "a", "--output", "b", "--zmin", "low"])
    with pytest.raises(cli.UsageError, match="cannot be combined"):
        cli.parse_args(["--input", "a", "--output", "b", "--threshold", "0.5", "5", "10",
                        "--zmax", "12"])


def test_gradient_pipeline(gradient, tmp_path):
    out = tmp_path / "g.stl"
    assert run(["--input", gradient, "--output", out, "--rounds", "2", "--zmin", "2",
                "--zmax", "10"]) == 0
    data = out.read_bytes()
    assert expected_facet_count(16, 16) == 1020
    assert len(data) == 84 + 50 * 1020
    m = read_stl(data)
    assert validate(m).defects == []
    z = m.vertices[:, 2]
    assert z.max() <= 10.5 + 1e-6 and z[z > 0].min() >= 2.5 - 1e-6


def test_flat_image_gives_box(tmp_path):
    src = tmp_path / "flat.pgm"
    src.write_bytes(encode_pnm(GrayImage(np.full((2, 2), 0.5)), binary=False, maxval=2))
    out = tmp_path / "flat.stl"
    assert run(["--input", src, "--output", out, "--rounds", "0", "--base", "1"]) == 0
    m = read_stl(out.read_bytes())
    assert len(m.facets) == 12 and len(m.vertices) == 8
    assert sorted(set(m.vertices[:, 2].tolist())) == [0.0, 7.0]


def test_config_violation_writes_nothing(gradient, tmp_path):
    out = tmp_path / "never.stl"
    assert cli.main(["--input", str(gradient), "--output", str(out), "--zmin", "5",
                     "--zmax", "5"]) == cli.EXIT_CONFIG
    assert not out.exists()


def test_exit_codes(gradient, tmp_path):
    assert cli.main(["--input", str(gradient)]) == cli.EXIT_USAGE
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P7 1 1 255\n\x00")
    assert run(["--input", bad, "--output", tmp_path / "o.stl"]) == cli.EXIT_PARSE
    assert run(["--input", tmp_path / "missing.pgm", "--output", tmp_path / "o.stl"]) == cli.EXIT_IO
    assert run(["--input", gradient, "--output", tmp_path / "o.stl", "--rounds", "7"]) == cli.EXIT_CONFIG
    assert run(["--input", gradient, "--output", tmp_path / "o.stl", "--rounds", "0",
                "--zmin", "0", "--zmax", "1", "--base", "0"]) == cli.EXIT_GEOMETRY
    assert run(["--input", gradient, "--output", tmp_path / "nodir" / "o.stl"]) == cli.EXIT_IO


def test_threshold_mode_and_ascii(tmp_path):
    src = tmp_path / "two.ppm"
    px = np.zeros((8, 8, 3), dtype=int)
    px[:, 4:] = 255
    src.write_bytes(encode_pnm(RgbImage(px)))
    out = tmp_path / "two.stl"
    assert run(["--input", src, "--output", out, "--rounds", "1", "--threshold", "0.5", "5", "10",
                "--format", "ascii", "--base", "0"]) == 0
    text = out.read_bytes()
    assert text.startswith(b"solid relief")
    z = read_stl(text).vertices[:, 2]
    assert set(np.unique(z)) == {0.0, 5.0, 10.0}


def test_d4_pipeline_and_axis_scale(gradient, tmp_path):
    out = tmp_path / "d4.stl"
    assert run(["--input", gradient, "--output", out, "--kernel", "d4", "--rounds", "2",
                "--sx", "2", "--sy", "0.5"]) == 0
    m = read_stl(out.read_bytes())
    assert validate(m).defects == []
    lo, hi = m.bounds()
    assert (hi - lo)[:2] == pytest.approx([30.0, 7.5])


def test_image_top_row_lands_at_max_y(tmp_path):
    img = np.zeros((4, 4))
    img[0] = 1.0  # bright top row
    src = tmp_path / "top.pgm"
    src.write_bytes(encode_pnm(GrayImage(img)))
    out = tmp_path / "top.stl"
    assert run(["--input", src, "--output", out, "--rounds", "0"]) == 0
    v = read_stl(out.read_bytes()).vertices
    tallest = v[v[:, 2] == v[:, 2].max()]
    assert np.all(tallest[:, 1] == 3.0)


def test_slice_report(gradient, tmp_path):
    out = tmp_path / "g.stl"
    layers = tmp_path / "layers"
    assert run(["--input", gradient, "--output", out, "--slice-dz", "2",
                "--slice-dir", layers]) == 0
    summary = json.loads((layers / "summary.json").read_text())
    # solid spans 0 .. 10.5 mm
    assert summary["layer_count"] == 6
    assert len(list(layers.glob("layer_*.svg"))) == 6
    assert summary["total_loop_length"] == pytest.approx(
        sum(l["perimeter"] for l in summary["layers"]))


def test_dimension_report(gradient, tmp_path):
    lines = []
    cfg = cli.parse_args(["--input", str(gradient), "--output", str(tmp_path / "x.stl"),
                          "--rounds", "3"])
    assert cli.run(cfg, log=lines.append) == 0
    rounds = [l for l in lines if l.startswith("round")]
    assert rounds == ["round 1: 32x32", "round 2: 16x16", "round 3: 8x8"]


def test_module_entry_point(gradient, tmp_path):
    out = tmp_path / "m.stl"
    proc = subprocess.run([sys.executable, "-m", "reliefkit", "--input", str(gradient),
                           "--output", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == ""
    assert "round 2: 16x16" in proc.stderr
    assert out.stat().st_size == 51084
