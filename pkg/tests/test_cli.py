"""Command-line front end: configs, exit codes, artifacts and sidecars."""

import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from magbilliards.cli import main
from magbilliards.errors import EmptyPlot
from magbilliards.svg import export_svg

CIRCLE_CFG = {"curve": {"type": "circle", "radius": 1.0}, "beta": 4.0}
ELLIPSE_CFG = {"curve": {"type": "ellipse", "a": 2.0, "b": 1.0}, "beta": 5.0}


def write_cfg(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(args):
    return main([str(a) for a in args])


# ---------------------------------------------------------------------------
# validation and exit codes


def test_invalid_json_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["simulate", "--config", bad, "--out", tmp_path]) == 2


def test_missing_keys_exit_2(tmp_path):
    cfg = write_cfg(tmp_path, {"curve": {"type": "circle", "radius": 1.0}})
    assert run(["simulate", "--config", cfg, "--out", tmp_path]) == 2
    cfg2 = write_cfg(tmp_path, {"curve": {"type": "hexagon"}, "beta": 4.0}, "c2.json")
    assert run(["simulate", "--config", cfg2, "--out", tmp_path]) == 2


def test_weak_field_ellipse_exits_2_naming_condition(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"curve": {"type": "ellipse", "a": 2.0, "b": 1.0}, "beta": 3.0})
    assert run(["simulate", "--config", cfg, "--out", tmp_path]) == 2
    err = capsys.readouterr().err
    assert "strong-field" in err and "r*max|k|" in err


def test_numeric_failure_exits_3(tmp_path):
    # a constant polynomial has a vanishing gradient everywhere
    cfg = dict(CIRCLE_CFG)
    cfg["polynomial"] = {"degree": 0, "terms": [{"i": 0, "j": 0, "c": 1.0}]}
    path = write_cfg(tmp_path, cfg)
    assert run(["integrability", "--config", path, "--out", tmp_path]) == 3


# ---------------------------------------------------------------------------
# simulate


def test_simulate_boundary_csv_and_meta(tmp_path):
    cfg = write_cfg(tmp_path, CIRCLE_CFG)
    assert run(["simulate", "--config", cfg, "--out", tmp_path, "--steps", 20]) == 0
    lines = (tmp_path / "simulate.csv").read_text().splitlines()
    assert lines[0] == "step,u,theta,x,y"
    assert len(lines) == 22
    meta = json.loads((tmp_path / "simulate.meta.json").read_text())
    assert set(meta) >= {"config_hash", "tolerances", "version", "format"}


def test_simulate_center_mode(tmp_path):
    cfg = dict(CIRCLE_CFG)
    cfg["initial"] = {"center": [1.1, 0.0]}
    path = write_cfg(tmp_path, cfg)
    assert run(["simulate", "--config", path, "--out", tmp_path, "--steps", 10]) == 0
    lines = (tmp_path / "simulate.csv").read_text().splitlines()
    assert lines[0] == "step,cx,cy"
    radii = [math.hypot(float(r.split(",")[1]), float(r.split(",")[2])) for r in lines[1:]]
    assert max(radii) - min(radii) < 1e-9


def test_simulate_reruns_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, ELLIPSE_CFG)
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    assert run(["simulate", "--config", cfg, "--out", tmp_path / "a", "--steps", 30]) == 0
    assert run(["simulate", "--config", cfg, "--out", tmp_path / "b", "--steps", 30]) == 0
    assert (tmp_path / "a/simulate.csv").read_bytes() == (tmp_path / "b/simulate.csv").read_bytes()
    ma = json.loads((tmp_path / "a/simulate.meta.json").read_text())
    mb = json.loads((tmp_path / "b/simulate.meta.json").read_text())
    assert ma["config_hash"] == mb["config_hash"]


# ---------------------------------------------------------------------------
# portrait


def test_portrait_circle_orbits_on_circles(tmp_path):
    cfg = write_cfg(tmp_path, CIRCLE_CFG)
    assert run(
        ["portrait", "--config", cfg, "--out", tmp_path, "--steps", 50, "--grid", 9]
    ) == 0
    rows = (tmp_path / "portrait.csv").read_text().splitlines()
    assert rows[0] == "orbit,step,cx,cy"
    orbits = {}
    for row in rows[1:]:
        k, _, cx, cy = row.split(",")
        orbits.setdefault(int(k), []).append(math.hypot(float(cx), float(cy)))
    assert len(orbits) == 9
    for radii in orbits.values():
        assert max(radii) - min(radii) < 1e-8


def test_portrait_svg_marker_groups(tmp_path):
    cfg = write_cfg(tmp_path, CIRCLE_CFG)
    assert run(
        [
            "portrait", "--config", cfg, "--out", tmp_path,
            "--steps", 5, "--grid", 10, "--format", "svg",
        ]
    ) == 0
    root = ET.parse(tmp_path / "portrait.svg").getroot()
    groups = [el for el in root if el.tag.endswith("g")]
    assert len(groups) == 10
    assert (tmp_path / "portrait.meta.json").exists()


def test_portrait_seed_jitters_deterministically(tmp_path):
    cfg = write_cfg(tmp_path, CIRCLE_CFG)
    for sub in ("s1", "s2", "s3"):
        (tmp_path / sub).mkdir()
    base = ["portrait", "--config", cfg, "--steps", 5, "--grid", 4]
    assert run(base + ["--out", tmp_path / "s1", "--seed", 7]) == 0
    assert run(base + ["--out", tmp_path / "s2", "--seed", 7]) == 0
    assert run(base + ["--out", tmp_path / "s3", "--seed", 8]) == 0
    b1 = (tmp_path / "s1/portrait.csv").read_bytes()
    assert b1 == (tmp_path / "s2/portrait.csv").read_bytes()
    assert b1 != (tmp_path / "s3/portrait.csv").read_bytes()


# ---------------------------------------------------------------------------
# offset


def test_offset_csv_columns_and_focal_guard(tmp_path):
    cfg = write_cfg(tmp_path, ELLIPSE_CFG)
    assert run(["offset", "--config", cfg, "--out", tmp_path, "--grid", 32]) == 0
    rows = (tmp_path / "offset.csv").read_text().splitlines()
    assert rows[0] == "t,u,x,y,curvature"
    assert len(rows) == 1 + 2 * 32  # both default offsets
    bad = dict(ELLIPSE_CFG)
    bad["offsets"] = [0.9]  # beyond the focal distance 1/2
    path = write_cfg(tmp_path, bad, "bad.json")
    assert run(["offset", "--config", path, "--out", tmp_path]) == 2


# ---------------------------------------------------------------------------
# integrability


def test_integrability_report(tmp_path):
    cfg = write_cfg(tmp_path, ELLIPSE_CFG)
    assert run(["integrability", "--config", cfg, "--out", tmp_path, "--grid", 64]) == 0
    rep = json.loads((tmp_path / "integrability.json").read_text())
    assert rep["ellipse_singularities"]["max_relative_grad"] < 1e-8
    assert rep["boundary_values"]["dev_plus"] < 1e-6
    assert all(c["relative_error"] < 1e-4 for c in rep["cubic_defect"])
    kinds = sorted(p["kind"] for p in rep["infinity"])
    assert kinds == ["isotropic", "isotropic", "singular", "singular"]


# ---------------------------------------------------------------------------
# gutkin subcommands


def test_gutkin_check_circle(tmp_path):
    cfg = write_cfg(tmp_path, CIRCLE_CFG)
    assert run(
        [
            "gutkin-check", "--config", cfg, "--out", tmp_path,
            "--delta", math.pi / 3, "--grid", 32,
        ]
    ) == 0
    rows = (tmp_path / "gutkin_check.csv").read_text().splitlines()
    assert rows[0] == "phi_bar,d,exit_angle,pmx,pmy,ppx,ppy,mx,my,chord_len,mid_dist"
    assert len(rows) == 33
    rep = json.loads((tmp_path / "gutkin_check.json").read_text())
    assert rep["max_exit_angle_deviation"] < 1e-9
    assert rep["is_gutkin_at_tol"]


def test_gutkin_construct_then_check_roundtrip(tmp_path):
    cfg = write_cfg(tmp_path, {"n": 4, "epsilon": 0.01, "delta": math.pi / 2})
    assert run(["gutkin-construct", "--config", cfg, "--out", tmp_path]) == 0
    built = json.loads((tmp_path / "gutkin_construct.json").read_text())
    assert built["curve"]["type"] == "fourier_rho"
    assert built["n"] == 4 and built["epsilon"] == 0.01
    assert built["max_exit_angle_deviation"] < 1e-4
    assert not built["admissibility"]["curvature_ok"]  # flagged, not enforced

    # the construction artifact doubles as a gutkin-check config
    check_cfg = write_cfg(tmp_path, built, "built.json")
    assert run(
        ["gutkin-check", "--config", check_cfg, "--out", tmp_path, "--grid", 32]
    ) == 0
    rep = json.loads((tmp_path / "gutkin_check.json").read_text())
    assert rep["max_exit_angle_deviation"] < 1e-4
    assert "chord_identity_max_residual" in rep


def test_gutkin_check_needs_delta(tmp_path):
    cfg = write_cfg(tmp_path, CIRCLE_CFG)
    assert run(["gutkin-check", "--config", cfg, "--out", tmp_path]) == 2


# ---------------------------------------------------------------------------
# circles-test


def test_circles_test_default_synthetic(tmp_path):
    cfg = write_cfg(tmp_path, CIRCLE_CFG)
    assert run(["circles-test", "--config", cfg, "--out", tmp_path, "--grid", 32]) == 0
    rep = json.loads((tmp_path / "circles_test.json").read_text())
    assert rep["n_circles"] == 32
    assert rep["all_circles_pass"]
    assert rep["global_fit_ok"]
    assert rep["global_fit_degree"] == 2 * rep["degree_bound"]


# ---------------------------------------------------------------------------
# svg writer


def test_export_svg_single_closed_path(tmp_path):
    t = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    ring = np.stack((np.cos(t), np.sin(t)), axis=-1)
    path = tmp_path / "plot.svg"
    export_svg(str(path), polylines=[("table", ring, True)])
    root = ET.parse(path).getroot()
    paths = [el for el in root if el.tag.endswith("path")]
    assert len(paths) == 1
    assert paths[0].get("d").endswith("Z")
    assert root.get("viewBox") is not None


def test_export_svg_empty_raises(tmp_path):
    with pytest.raises(EmptyPlot):
        export_svg(str(tmp_path / "empty.svg"))
