"""Command-line driver for the smocking pipeline.

Exit codes: 0 success, 2 invalid input, 3 solver did not converge.
Set SMOCKLAB_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import io as sio
from .analysis import classify_pattern, shrinkage
from .arap import ArapConfig, full_pipeline
from .embedding import (EmbedParams, embed_pleats, embed_two_stage,
                        embed_underlay)
from .errors import SmockLabError
from .gridfree import GridFreeInput, build_gridfree
from .pattern import GridSpec, build_grid, edit_pattern, tile_unit
from .smocked_graph import extract

log = logging.getLogger("smocklab")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3


def _setup_logging():
    level = os.environ.get("SMOCKLAB_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_solid_pattern(path):
    """Load a pattern file, materializing grid-free inputs into patterns."""
    pattern = sio.load_pattern(path)
    if isinstance(pattern, GridFreeInput):
        pattern = build_gridfree(pattern)
    return pattern


def _embed_overrides(args):
    kwargs = {}
    if args.w_embed is not None:
        kwargs["w_embed"] = args.w_embed
    if args.w_height is not None:
        kwargs["w_height"] = args.w_height
    return EmbedParams(**kwargs)


def _trace_writer(path):
    if path is None:
        return None, lambda name: None
    fh = open(path, "w", encoding="utf-8")

    def for_solve(name):
        def cb(iteration, energy, grad_norm):
            fh.write(json.dumps({"solve": name, "iteration": iteration,
                                 "energy": energy, "grad_norm": grad_norm},
                                sort_keys=True) + "\n")
        return cb

    return fh, for_solve


def _stage_doc(stage, result):
    return {
        "stage": stage,
        "coords": np.asarray(result.coords).tolist(),
        "energy": float(result.energy),
        "iterations": int(result.iterations),
        "converged": bool(result.converged),
    }


def cmd_simulate(args):
    pattern = _load_solid_pattern(args.pattern)
    params = _embed_overrides(args)
    trace_fh, for_solve = _trace_writer(args.trace)
    try:
        if args.stage == "underlay":
            graph = extract(pattern)
            res = embed_underlay(graph, params, for_solve("underlay"))
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(sio.canonical_json(_stage_doc("underlay", res)))
            return EXIT_OK if res.converged else EXIT_NO_CONVERGENCE
        if args.stage == "pleat":
            graph = extract(pattern)
            if args.resume:
                with open(args.resume, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
                if doc.get("stage") != "underlay":
                    raise SmockLabError(
                        f"--resume expects an underlay stage file, got {doc.get('stage')!r}")
                underlay_xy = np.asarray(doc["coords"], dtype=float)[:, :2]
                under_converged = bool(doc["converged"])
            else:
                under = embed_underlay(graph, params, for_solve("underlay"))
                underlay_xy, under_converged = under.coords, under.converged
            res = embed_pleats(graph, underlay_xy, params, for_solve("pleat"))
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(sio.canonical_json(_stage_doc("pleat", res)))
            return EXIT_OK if (res.converged and under_converged) else EXIT_NO_CONVERGENCE
        design = full_pipeline(pattern, params, ArapConfig(),
                               subdivision=args.subdivision,
                               trace_cb=None if args.trace is None else for_solve("embed"))
        sio.export_obj(design, args.out, variant=args.variant,
                       color_field=args.color)
        ok = all(design.embedding.converged.values())
        return EXIT_OK if ok else EXIT_NO_CONVERGENCE
    finally:
        if trace_fh is not None:
            trace_fh.close()


def cmd_analyze(args):
    pattern = _load_solid_pattern(args.pattern)
    report = classify_pattern(pattern)
    doc = report.to_dict()
    if args.shrinkage:
        design = full_pipeline(pattern)
        doc["shrinkage"] = shrinkage(pattern, design)
    print(sio.canonical_json(doc), end="")
    return EXIT_OK


def cmd_grid(args):
    spec = GridSpec(kind=args.kind, cols=args.cols, rows=args.rows,
                    spacing=args.spacing)
    sio.save_pattern(build_grid(spec), args.out)
    return EXIT_OK


def cmd_tile(args):
    pattern = sio.load_pattern(args.pattern)
    if isinstance(pattern, GridFreeInput):
        raise SmockLabError("grid-free patterns cannot be tiled")
    tiled = tile_unit(pattern, args.reps_x, args.reps_y, shift=args.shift)
    sio.save_pattern(tiled, args.out)
    return EXIT_OK


def cmd_edit(args):
    pattern = sio.load_pattern(args.pattern)
    if isinstance(pattern, GridFreeInput):
        raise SmockLabError("grid-free patterns cannot be edited in place")
    kwargs = {}
    if args.op == "add_line":
        if not args.vertices:
            raise SmockLabError("add_line requires --vertices")
        kwargs["vertex_ids"] = args.vertices
    elif args.op == "delete_line":
        if args.line_id is None:
            raise SmockLabError("delete_line requires --line-id")
        kwargs["line_id"] = args.line_id
    elif args.op == "add_margin":
        if args.cells is None:
            raise SmockLabError("add_margin requires --cells")
        kwargs["cells"] = args.cells
    sio.save_pattern(edit_pattern(pattern, args.op, **kwargs), args.out)
    return EXIT_OK


def cmd_export(args):
    pattern = _load_solid_pattern(args.pattern)
    design = full_pipeline(pattern, subdivision=args.subdivision)
    sio.export_obj(design, args.out, variant=args.variant, color_field=args.color)
    return EXIT_OK if all(design.embedding.converged.values()) else EXIT_NO_CONVERGENCE


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    app = create_app(store_dir=args.store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="smocklab",
                                description="Smocking pattern design pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("grid", help="write a line-free grid pattern file")
    sp.add_argument("--kind", choices=["square", "hexagonal"], default="square")
    sp.add_argument("--cols", type=int, default=4)
    sp.add_argument("--rows", type=int, default=4)
    sp.add_argument("--spacing", type=float, default=1.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_grid)

    sp = sub.add_parser("tile", help="tile a unit pattern file")
    sp.add_argument("pattern")
    sp.add_argument("--reps-x", type=int, required=True)
    sp.add_argument("--reps-y", type=int, required=True)
    sp.add_argument("--shift", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_tile)

    sp = sub.add_parser("edit", help="apply a single edit to a pattern file")
    sp.add_argument("pattern")
    sp.add_argument("--op", choices=["add_line", "delete_line", "add_margin"],
                    required=True)
    sp.add_argument("--vertices", type=int, nargs="+")
    sp.add_argument("--line-id", type=int)
    sp.add_argument("--cells", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_edit)

    sp = sub.add_parser("simulate", help="run the pipeline (or a stage of it)")
    sp.add_argument("pattern")
    sp.add_argument("--out", required=True)
    sp.add_argument("--stage", choices=["underlay", "pleat", "arap"],
                    default="arap")
    sp.add_argument("--resume", help="underlay stage file to continue from")
    sp.add_argument("--subdivision", type=int, default=2)
    sp.add_argument("--w-embed", type=float, default=None)
    sp.add_argument("--w-height", type=float, default=None)
    sp.add_argument("--variant", choices=["fine", "merged"], default="merged")
    sp.add_argument("--color", choices=["height"], default=None)
    sp.add_argument("--trace", help="write per-iteration records (NDJSON)")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("analyze", help="constraint classification as JSON")
    sp.add_argument("pattern")
    sp.add_argument("--shrinkage", action="store_true",
                    help="also simulate and report shrink ratios")
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("export", help="simulate and export an OBJ")
    sp.add_argument("pattern")
    sp.add_argument("--out", required=True)
    sp.add_argument("--variant", choices=["fine", "merged"], default="merged")
    sp.add_argument("--color", choices=["height"], default=None)
    sp.add_argument("--subdivision", type=int, default=2)
    sp.set_defaults(fn=cmd_export)

    sp = sub.add_parser("serve", help="start the HTTP design service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8080)
    sp.add_argument("--store", default=None,
                    help="session store directory (default: in tmp)")
    sp.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SmockLabError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
