"""Command-line front end.

Subcommands: gershgorin, pseudospectrum, count, demo.  Every run writes its
artifacts plus a manifest.json into --out; re-running a manifest's command
line with the same seeds reproduces the outputs byte for byte.

Exit codes: 0 ok, 2 usage or parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .counting import Contour, count_arg_det, count_trace, certify_component
from .errors import NumericalError, ParseError, UsageError
from .matfun import parse_problem
from .region_grid import (
    Grid,
    components,
    export_contours_json,
    export_field_csv,
    export_field_json,
    gershgorin_field,
    sigma_min_field,
)

__all__ = ["main"]


def _parse_grid(spec):
    parts = spec.split(",")
    if len(parts) != 6:
        raise ParseError("--grid expects re0,re1,im0,im1,nx,ny")
    try:
        re0, re1, im0, im1 = map(float, parts[:4])
        nx, ny = int(parts[4]), int(parts[5])
    except ValueError as e:
        raise ParseError(f"--grid: {e}") from None
    return Grid(re_min=re0, re_max=re1, im_min=im0, im_max=im1, nx=nx, ny=ny)


def _parse_contour(spec):
    kind, _, rest = spec.partition(":")
    try:
        if kind == "circle":
            cx, cy, r = map(float, rest.split(","))
            return Contour.circle(complex(cx, cy), r)
        if kind == "ellipse":
            vals = list(map(float, rest.split(",")))
            if len(vals) == 4:
                cx, cy, rx, ry = vals
                ang = 0.0
            elif len(vals) == 5:
                cx, cy, rx, ry, ang = vals
            else:
                raise ValueError("expected cx,cy,rx,ry[,angle]")
            return Contour.ellipse(complex(cx, cy), rx, ry, angle=ang)
        if kind == "poly":
            with open(rest) as fh:
                pts = json.load(fh)
            return Contour.from_vertices([complex(p[0], p[1]) for p in pts])
    except (ValueError, OSError) as e:
        raise ParseError(f"--contour: {e}") from None
    raise ParseError(f"--contour: unknown kind {kind!r}")


def _load_problem(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ParseError(f"--problem: {e}") from None
    return parse_problem(text)


def _ensure_out(ns):
    import os

    os.makedirs(ns.out, exist_ok=True)
    return ns.out


def _write_manifest(out_dir, command, params, outputs, t0):
    manifest = {
        "command": command,
        "parameters": params,
        "outputs": sorted(outputs),
        "versions": {"neploc": __version__, "numpy": np.__version__},
        "timings": {"total_s": round(time.perf_counter() - t0, 6)},
    }
    path = f"{out_dir}/manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path


def _cmd_gershgorin(ns):
    t0 = time.perf_counter()
    T = _load_problem(ns.problem)
    grid = _parse_grid(ns.grid)
    if not 0.0 <= ns.alpha <= 1.0:
        raise UsageError(f"--alpha must lie in [0, 1], got {ns.alpha}")
    out = _ensure_out(ns)
    fld = gershgorin_field(T, grid, alpha=ns.alpha)
    outputs = []

    export_field_csv(fld, f"{out}/gershgorin_union.csv")
    outputs.append("gershgorin_union.csv")
    export_field_json(fld, f"{out}/gershgorin_field.json")
    outputs.append("gershgorin_field.json")

    comps = components(fld)
    report = []
    loops = []
    for i, comp in enumerate(comps):
        entry = {
            "id": i,
            "cells": comp.n_cells,
            "touches_grid_border": comp.touches_grid_border,
            "touches_domain_exclusion": comp.touches_domain_exclusion,
        }
        if not comp.flagged:
            loops.extend(comp.boundary)
            if ns.count:
                from .matfun import diagonal_of

                n_T, n_ref, certs = certify_component(T, diagonal_of(T), comp)
                entry["count_T"] = n_T
                entry["count_reference"] = n_ref
                entry["count_certificates"] = {
                    "T": certs["T"].as_dict(),
                    "reference": certs["reference"].as_dict(),
                }
        report.append(entry)
    with open(f"{out}/components.json", "w") as fh:
        json.dump(report, fh, indent=2)
    outputs.append("components.json")
    export_contours_json(loops, f"{out}/contours.json")
    outputs.append("contours.json")

    _write_manifest(
        out,
        "gershgorin",
        {"problem": ns.problem, "grid": ns.grid, "alpha": ns.alpha,
         "count": bool(ns.count)},
        outputs + ["manifest.json"],
        t0,
    )
    total = sum(e.get("count_T", 0) for e in report)
    print(f"{len(comps)} component(s); "
          + (f"total certified count {total}" if ns.count else "counts skipped"))
    return 0


def _cmd_pseudospectrum(ns):
    t0 = time.perf_counter()
    T = _load_problem(ns.problem)
    grid = _parse_grid(ns.grid)
    eps_list = []
    if ns.eps:
        try:
            eps_list = [float(s) for s in ns.eps.split(",") if s]
        except ValueError as e:
            raise ParseError(f"--eps: {e}") from None
        if any(e <= 0 for e in eps_list):
            raise UsageError("--eps values must be positive")
    out = _ensure_out(ns)
    fld = sigma_min_field(T, grid)
    outputs = []
    export_field_csv(fld, f"{out}/sigma_min.csv")
    outputs.append("sigma_min.csv")
    for eps in eps_list:
        loops = []
        for comp in components(fld, eps=eps):
            if not comp.flagged:
                loops.extend(comp.boundary)
        fname = f"contours_eps_{eps:.3e}.json"
        export_contours_json(loops, f"{out}/{fname}")
        outputs.append(fname)
    _write_manifest(
        out,
        "pseudospectrum",
        {"problem": ns.problem, "grid": ns.grid, "eps": eps_list},
        outputs + ["manifest.json"],
        t0,
    )
    print(f"sigma_min field on {grid.nx}x{grid.ny}; "
          f"{len(eps_list)} level set(s) exported")
    return 0


def _cmd_count(ns):
    t0 = time.perf_counter()
    T = _load_problem(ns.problem)
    contour = _parse_contour(ns.contour)
    out = _ensure_out(ns)
    cert = count_arg_det(T, contour, contour_id=ns.contour)
    payload = cert.as_dict()
    if ns.both:
        cert2 = count_trace(T, contour, contour_id=ns.contour)
        payload = {"arg_det": cert.as_dict(), "trace": cert2.as_dict()}
        if cert.count != cert2.count:
            raise NumericalError(
                f"methods disagree: arg_det={cert.count}, trace={cert2.count}"
            )
    with open(f"{out}/count.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    _write_manifest(
        out,
        "count",
        {"problem": ns.problem, "contour": ns.contour, "both": bool(ns.both)},
        ["count.json", "manifest.json"],
        t0,
    )
    print(f"count = {cert.count} (min sigma on contour {cert.min_margin:.3e})")
    return 0


def _cmd_demo(ns):
    t0 = time.perf_counter()
    out = _ensure_out(ns)
    if ns.name == "resonance":
        outputs = _demo_resonance(ns, out)
    elif ns.name == "hadeler":
        outputs = _demo_hadeler(ns, out)
    elif ns.name == "timedelay":
        outputs = _demo_timedelay(ns, out)
    else:
        raise UsageError(f"unknown demo {ns.name!r}")
    _write_manifest(
        out,
        f"demo {ns.name}",
        {"seed": ns.seed, "data": ns.data},
        outputs + ["manifest.json"],
        t0,
    )
    return 0


def _demo_resonance(ns, out):
    from .problems import ResonanceConfig, resonance_certify

    cfg = ResonanceConfig()
    report = resonance_certify(cfg)
    with open(f"{out}/resonance_report.json", "w") as fh:
        json.dump(report.as_dict(), fh, indent=2)
    print(f"counts: T={report.count_T}, pencil={report.count_hat}"
          + ("" if report.count_match else "  [MISMATCH]"))
    print(f"{'eigenvalue':>24s}  {'|delta|':>10s}")
    for row in report.rows():
        lam = complex(row["lambda"][0], row["lambda"][1])
        print(f"{lam.real:12.2f} {lam.imag:+10.2f}i  {row['error']:10.2e}")
    return ["resonance_report.json"]


def _demo_hadeler(ns, out):
    from .cheb_linearize import (
        cheb_interp,
        colleague,
        eps_disks,
        interval_from_gershgorin,
    )
    from .matfun import ScalarTerm
    from .problems import hadeler_build, hadeler_matfun, hadeler_simplify

    inst = hadeler_build(source=ns.data, seed=ns.seed)
    T = hadeler_matfun(inst)
    simp = hadeler_simplify(inst)
    # the transformed problem has a bounded union on the real axis; raw T
    # does not, so the interval scan runs on the simplified form
    lo, hi = interval_from_gershgorin(simp.matfun(), -30.0, 30.0)
    ch_T = cheb_interp(T, (lo, hi), 20)
    ch_scalar = cheb_interp(ScalarTerm.exp_minus_one(1.0), (lo, hi), 20)
    cs = colleague(ch_T, B_coeff=inst.B)
    grid = Grid(re_min=lo - 1, re_max=hi + 1, im_min=-2.0, im_max=2.0,
                nx=201, ny=81)
    eps = ns.eps_float if ns.eps_float else 1e-10
    fld, disks, certified, counts = eps_disks(
        cs, ch_scalar, ScalarTerm.exp_minus_one(1.0), eps, grid, T=T
    )
    payload = {
        "provenance": inst.provenance,
        "interval": [lo, hi],
        "betas": list(map(float, simp.betas)),
        "rho": list(map(float, simp.rho)),
        "disks": [d.as_dict() for d in disks],
        "certified_disks": [d.as_dict() for d in certified],
        "cluster_counts": [
            {"count_T": c["count_T"], "count_reference": c["count_reference"],
             "disks": [d.as_dict() for d in c["disks"]]}
            for c in counts
        ],
    }
    with open(f"{out}/hadeler_report.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    export_field_csv(fld, f"{out}/hadeler_remainder.csv")
    total = sum(c["count_T"] for c in counts)
    print(f"interval [{lo:.4f}, {hi:.4f}]; {len(certified)} certified disk(s); "
          f"total count {total}")
    return ["hadeler_report.json", "hadeler_remainder.csv"]


def _demo_timedelay(ns, out):
    from .matfun import diagonal_of
    from .problems import delay_basis, delay_build, delay_matfun

    if ns.data is None:
        print("no data file given; using the synthetic fallback", file=sys.stderr)
    inst = delay_build(source=ns.data, seed=ns.seed)
    basis = delay_basis(inst)
    Tt = basis.matfun()
    grid = _parse_grid(ns.grid) if ns.grid else Grid(
        re_min=-8.0, re_max=4.0, im_min=-12.0, im_max=12.0, nx=241, ny=241
    )
    fld = gershgorin_field(Tt, grid, alpha=0.0)
    export_field_csv(fld, f"{out}/timedelay_union.csv")
    comps = components(fld)
    report = []
    for i, comp in enumerate(comps):
        entry = {
            "id": i,
            "cells": comp.n_cells,
            "flagged": comp.flagged,
        }
        if not comp.flagged:
            n_T, n_ref, _ = certify_component(Tt, basis.diagonal_fun(), comp)
            entry["count_T"] = n_T
            entry["count_reference"] = n_ref
        report.append(entry)
    payload = {
        "provenance": inst.provenance,
        "mu1": basis.mu1,
        "column_rho": list(map(float, basis.column_rho)),
        "components": report,
    }
    with open(f"{out}/timedelay_report.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    certified = [e for e in report if "count_T" in e]
    print(f"mu1 = {basis.mu1:.6g}; {len(comps)} component(s), "
          f"{len(certified)} certified")
    return ["timedelay_report.json", "timedelay_union.csv"]


def _build_parser():
    p = argparse.ArgumentParser(
        prog="neploc",
        description="Localize, count, and certify eigenvalues of analytic "
        "matrix-valued functions.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gershgorin", help="Gershgorin union field and components")
    g.add_argument("--problem", required=True)
    g.add_argument("--grid", required=True, help="re0,re1,im0,im1,nx,ny")
    g.add_argument("--alpha", type=float, default=1.0)
    g.add_argument("--count", action="store_true",
                   help="certify counts per unflagged component")
    g.add_argument("--out", default=".")
    g.set_defaults(fn=_cmd_gershgorin)

    ps = sub.add_parser("pseudospectrum", help="sigma_min field and level sets")
    ps.add_argument("--problem", required=True)
    ps.add_argument("--grid", required=True)
    ps.add_argument("--eps", default="", help="comma-separated levels")
    ps.add_argument("--out", default=".")
    ps.set_defaults(fn=_cmd_pseudospectrum)

    c = sub.add_parser("count", help="eigenvalue count inside a contour")
    c.add_argument("--problem", required=True)
    c.add_argument("--contour", required=True,
                   help="circle:cx,cy,r | ellipse:cx,cy,rx,ry[,angle] | poly:PATH")
    c.add_argument("--both", action="store_true",
                   help="also run the trace quadrature and cross-check")
    c.add_argument("--out", default=".")
    c.set_defaults(fn=_cmd_count)

    d = sub.add_parser("demo", help="full pipeline for a worked application")
    d.add_argument("name", choices=["hadeler", "timedelay", "resonance"])
    d.add_argument("--seed", type=int, default=1)
    d.add_argument("--data", default=None, help=".npz with instance matrices")
    d.add_argument("--grid", default=None)
    d.add_argument("--eps-float", type=float, default=None, dest="eps_float")
    d.add_argument("--out", default=".")
    d.set_defaults(fn=_cmd_demo)
    return p


def main(argv=None):
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors already; normalize others
        raise SystemExit(2 if e.code not in (0,) else e.code)
    try:
        return ns.fn(ns)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
