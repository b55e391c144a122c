import json

import numpy as np
import pytest

from neploc.cli import main

TWO_BY_TWO = {
    "n": 2,
    "domain": {"kind": "whole_plane"},
    "terms": [
        {
            "scalar": {"kind": "polynomial", "coeffs": [0.0, 1.0]},
            "matrix": [[1.0, 0.0], [0.0, 1.0]],
        },
        {
            "scalar": {"kind": "polynomial", "coeffs": [1.0]},
            "matrix": [[-1.0, -0.1], [-0.1, 1.0]],
        },
    ],
}

SHIFTED_SCALAR = {
    "n": 1,
    "domain": {"kind": "whole_plane"},
    "terms": [
        {"scalar": {"kind": "polynomial", "coeffs": [-1.0, 1.0]},
         "matrix": [[1.0]]},
    ],
}


@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(TWO_BY_TWO))
    return str(path)


def test_gershgorin_command(problem_file, tmp_path):
    out = tmp_path / "out"
    rc = main([
        "gershgorin", "--problem", problem_file,
        "--grid=-2,2,-1.4,1.4,81,57", "--count", "--out", str(out),
    ])
    assert rc == 0
    for name in ("gershgorin_union.csv", "gershgorin_field.json",
                 "components.json", "contours.json", "manifest.json"):
        assert (out / name).exists()
    comps = json.loads((out / "components.json").read_text())
    assert len(comps) == 2  # disks of radius 0.1 about -1 and +1
    for c in comps:
        assert not c["touches_grid_border"]
        assert not c["touches_domain_exclusion"]
        assert c["count_T"] == 1
        assert c["count_reference"] == 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "gershgorin"
    assert manifest["parameters"]["alpha"] == 1.0
    assert "neploc" in manifest["versions"]
    assert manifest["outputs"] == sorted(manifest["outputs"])


def test_gershgorin_reruns_are_byte_identical(problem_file, tmp_path):
    args = ["gershgorin", "--problem", problem_file,
            "--grid=-2,2,-1.4,1.4,41,29", "--count"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    for name in ("gershgorin_union.csv", "gershgorin_field.json",
                 "components.json", "contours.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_gershgorin_usage_errors(problem_file, tmp_path):
    out = str(tmp_path / "out")
    rc = main(["gershgorin", "--problem", problem_file,
               "--grid=-2,2,-2,2,41,41", "--alpha", "1.5", "--out", out])
    assert rc == 2
    rc = main(["gershgorin", "--problem", problem_file,
               "--grid=-2,2,-2,2,41", "--out", out])
    assert rc == 2
    rc = main(["gershgorin", "--problem", str(tmp_path / "missing.json"),
               "--grid=-2,2,-2,2,41,41", "--out", out])
    assert rc == 2


def test_pseudospectrum_command(problem_file, tmp_path):
    out = tmp_path / "out"
    rc = main([
        "pseudospectrum", "--problem", problem_file,
        "--grid=-2,2,-1.4,1.4,41,29", "--eps", "0.5,0.05", "--out", str(out),
    ])
    assert rc == 0
    assert (out / "sigma_min.csv").exists()
    assert (out / "contours_eps_5.000e-01.json").exists()
    assert (out / "contours_eps_5.000e-02.json").exists()
    header = (out / "sigma_min.csv").read_text().splitlines()[0]
    assert header.startswith("re,im,")
    assert main(["pseudospectrum", "--problem", problem_file,
                 "--grid=-2,2,-2,2,21,21", "--eps", "-0.5",
                 "--out", str(out)]) == 2
    assert main(["pseudospectrum", "--problem", problem_file,
                 "--grid=-2,2,-2,2,21,21", "--eps", "a,b",
                 "--out", str(out)]) == 2


def test_count_command(problem_file, tmp_path):
    out = tmp_path / "out"
    rc = main(["count", "--problem", problem_file,
               "--contour", "circle:0,0,1.5", "--both", "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "count.json").read_text())
    assert payload["arg_det"]["count"] == 2
    assert payload["trace"]["count"] == 2
    rc = main(["count", "--problem", problem_file,
               "--contour", "circle:0.5,0,1.0", "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "count.json").read_text())
    assert payload["count"] == 1  # only the eigenvalue near +1


def test_count_contour_parse_errors(problem_file, tmp_path):
    out = str(tmp_path / "out")
    assert main(["count", "--problem", problem_file,
                 "--contour", "blob:1,2,3", "--out", out]) == 2
    assert main(["count", "--problem", problem_file,
                 "--contour", "circle:1,2", "--out", out]) == 2
    assert main(["count", "--problem", problem_file,
                 "--contour", f"poly:{out}/nope.json", "--out", out]) == 2


def test_count_numerical_failure_exit_code(tmp_path):
    # the first quadrature node of circle:0,0,1 sits at z=1, where z-1
    # vanishes, so the singular-contour guard has to fire
    path = tmp_path / "shift.json"
    path.write_text(json.dumps(SHIFTED_SCALAR))
    rc = main(["count", "--problem", str(path),
               "--contour", "circle:0,0,1", "--out", str(tmp_path / "o")])
    assert rc == 3


def test_ellipse_contour_spec(problem_file, tmp_path):
    out = tmp_path / "out"
    rc = main(["count", "--problem", problem_file,
               "--contour", "ellipse:0,0,1.5,0.5", "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "count.json").read_text())
    assert payload["count"] == 2


def test_demo_timedelay_synthetic(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["demo", "timedelay", "--out", str(out),
               "--grid=-8,12,-16,16,101,161"])
    assert rc == 0
    err = capsys.readouterr().err
    assert "synthetic fallback" in err
    rep = json.loads((out / "timedelay_report.json").read_text())
    assert rep["mu1"] == pytest.approx(-13.0, abs=1e-10)
    assert len(rep["components"]) == 5
    counts = sorted(c["count_T"] for c in rep["components"])
    assert counts == [1, 1, 1, 1, 4]
    for c in rep["components"]:
        assert c["count_T"] == c["count_reference"]
    assert (out / "timedelay_union.csv").exists()


def test_demo_hadeler_synthetic(tmp_path):
    out = tmp_path / "out"
    rc = main(["demo", "hadeler", "--out", str(out)])
    assert rc == 0
    rep = json.loads((out / "hadeler_report.json").read_text())
    assert rep["provenance"] == "synthetic(seed=1)"
    lo, hi = rep["interval"]
    assert lo < -8.0 and hi > 4.2
    assert len(rep["betas"]) == 8
    assert len(rep["certified_disks"]) == 3
    assert len(rep["cluster_counts"]) == 3
    for c in rep["cluster_counts"]:
        assert c["count_T"] == 1
        assert c["count_reference"] == 1
    assert (out / "hadeler_remainder.csv").exists()


def test_demo_resonance(tmp_path):
    out = tmp_path / "out"
    rc = main(["demo", "resonance", "--out", str(out)])
    assert rc == 0
    rep = json.loads((out / "resonance_report.json").read_text())
    assert rep["count_T"] == 21
    assert rep["count_hat"] == 21
    assert rep["count_match"] is True
    assert len(rep["rows"]) == 21
    assert rep["guard_sigma_min"] > 1e-8


def test_argparse_exits(problem_file):
    with pytest.raises(SystemExit) as ei:
        main(["demo", "nosuch", "--out", "x"])
    assert ei.value.code == 2
    with pytest.raises(SystemExit) as ei:
        main([])
    assert ei.value.code == 2
    with pytest.raises(SystemExit) as ei:
        main(["--version"])
    assert ei.value.code == 0
