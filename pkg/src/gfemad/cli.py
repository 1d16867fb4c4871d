"""Command line driver: ``gfemad run --preset ad1d`` or ``python -m gfemad run --config file.cfg``."""

import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from gfemad.config import PRESETS, load_config, preset, with_overrides
from gfemad.continuation import run_continuation
from gfemad.diagnostics import compute_tau, enriched_elements, error_report, exact_1d
from gfemad.errors import ConfigError, DegenerateEnrichmentError, GfemError
from gfemad.io import csv_text, line_csv, solution_csv, vtk_text
from gfemad.solve import solve_gfem

log = logging.getLogger("gfemad")

METRICS = ("l2_rel", "linf_nodal", "overshoot", "sign_changes")


class OutputError(GfemError):
    pass


def _line_points(cfg, mesh):
    n = cfg.samples
    if mesh.dim == 1:
        x = np.linspace(0.0, cfg.problem.lengths[0], n)
        return x[:, None], None
    lx, ly = cfg.problem.lengths
    x = np.linspace(0.0, lx, n)
    pts, cut = [], []
    for c in cfg.cut_lines:
        pts.append(np.column_stack([x, np.full(n, c * ly)]))
        cut += [c] * n
    if not pts:
        return None, None
    return np.vstack(pts), cut


def _exact_for(cfg, kappa):
    if cfg.exact() is None:
        return None
    a, f = cfg.problem.alpha[0], cfg.problem.source
    return lambda pts: f * exact_1d(a, kappa, np.asarray(pts, dtype=float).reshape(-1))


def _nodal_line(mesh):
    return list(np.argsort(mesh.nodes[:, 0], kind="stable"))


def solve_config(cfg):
    """Run the solve (or continuation) described by cfg; returns (mesh, field, history)."""
    mesh = cfg.build_mesh()
    if cfg.continuation is not None:
        field, history = run_continuation(
            cfg.problem, mesh, cfg.plan(), cfg.bc(), cfg.enriched_nodes(mesh), speed=cfg.speed(), h=cfg.h()
        )
        return mesh, field, list(history)
    spec = cfg.enrichment_spec(mesh)
    return mesh, solve_gfem(cfg.problem, mesh, spec, cfg.bc(), flat_tol=cfg.flat_tol), None


def render_run(cfg):
    """Solve and render every output file in memory: {relative path: text}."""
    if cfg.kappa_sweep:
        files = {}
        for k in cfg.kappa_sweep:
            sub = replace(cfg, problem=cfg.problem.with_kappa(k), kappa_sweep=(), gamma=cfg.gamma)
            for name, text in render_run(sub).items():
                files[f"kappa_{k!r}/{name}"] = text
        return files

    mesh, field, history = solve_config(cfg)
    files = {"solution.csv": solution_csv(field)}
    pts, cut = _line_points(cfg, mesh)
    if pts is not None:
        files["line.csv"] = line_csv(pts, field(pts), cut)
    if mesh.dim == 2:
        files["field.vtk"] = vtk_text(mesh, {"u": field.nodal_values(), "ubar": field.ubar}, cfg.name)
    kappa = history[-1].kappa if history else cfg.problem.kappa
    exact = _exact_for(cfg, kappa)
    if exact is not None:
        rep = error_report(field, exact, _nodal_line(mesh)).as_row()
        files["errors.csv"] = csv_text(list(rep), [list(rep.values())])
    if history:
        rows = []
        for rec in history:
            row = [rec.step, rec.pe, rec.kappa]
            ex = _exact_for(cfg, rec.kappa)
            if ex is not None:
                row += list(error_report(rec.field, ex, _nodal_line(mesh)).as_row().values())
            rows.append(row)
        header = ["step", "pe", "kappa"] + (list(METRICS) if exact is not None else [])
        files["history.csv"] = csv_text(header, rows)
    if cfg.emit_tau:
        prob = cfg.problem.with_kappa(kappa)
        rows = []
        for e in enriched_elements(mesh, field.enrichment):
            try:
                t = compute_tau(prob, mesh, field.enrichment, e)
                rows.append([e, t.n_enriched, t.mean])
            except DegenerateEnrichmentError as exc:
                log.warning("%s", exc)
                rows.append([e, "", "nan"])
        files["tau.csv"] = csv_text(["element", "n_enriched", "tau_mean"], rows)
    return files


def write_outputs(out_dir, files):
    """Write all files or none: on any OSError, remove what was written and raise OutputError."""
    written, made = [], []
    try:
        for name in sorted(files):
            path = os.path.join(out_dir, name)
            d = os.path.dirname(path)
            if not os.path.isdir(d):
                _makedirs(d, made)
            tmp = path + ".part"
            written.append(tmp)
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(files[name])
            os.replace(tmp, path)
            written[-1] = path
    except OSError as exc:
        for p in written:
            if os.path.exists(p):
                os.remove(p)
        for d in reversed(made):
            try:
                os.rmdir(d)
            except OSError:
                pass
        raise OutputError(f"cannot write output under {out_dir!r}: {exc}") from None
    return [os.path.join(out_dir, n) for n in sorted(files)]


def _makedirs(d, made):
    parts = []
    while d and not os.path.isdir(d):
        parts.append(d)
        d = os.path.dirname(d)
    for p in reversed(parts):
        os.mkdir(p)
        made.append(p)


def run(cfg):
    """Solve, render and write; returns a process exit status."""
    try:
        files = render_run(cfg)
        paths = write_outputs(cfg.out_dir, files)
    except GfemError as exc:
        log.error("%s", exc)
        return 1
    for p in paths:
        print(p)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="gfemad", description="GFEM solver for steady advection-diffusion")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a preset or config file")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help=f"one of: {', '.join(PRESETS)}")
    src.add_argument("--config", help="path to a flat key-value config file")
    r.add_argument("--kappa", type=float)
    r.add_argument("--pe-target", type=float, help="set kappa (or the continuation end point) from Pe^h")
    r.add_argument("--lambda", dest="lam", type=float, help="penalty weight for weak enforcement")
    r.add_argument("--bc", choices=("strong", "weak"))
    r.add_argument("--enrichment", choices=("ha", "hb", "hc", "hb2", "global-local", "none"))
    r.add_argument("--out", help="output directory")
    r.add_argument("--emit-tau", action="store_true", default=None)
    sub.add_parser("presets", help="list preset names")
    return ap


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="gfemad: %(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        print("\n".join(PRESETS))
        return 0
    try:
        cfg = preset(args.preset) if args.preset else load_config(args.config)
        cfg = with_overrides(
            cfg,
            kappa=args.kappa,
            pe_target=args.pe_target,
            lam=args.lam,
            bc=args.bc,
            enrichment=args.enrichment,
            out=args.out,
            emit_tau=args.emit_tau,
        )
    except OSError as exc:
        log.error("cannot read config %s: %s", args.config, exc)
        return 2
    except (ConfigError, GfemError) as exc:
        log.error("%s", exc)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
