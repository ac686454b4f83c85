"""Command-line entry point.

Subcommands: ``interchange``, ``corner``, ``loopon``, ``zoo`` (generate and
save), ``analyze``, ``render`` and ``verify``.  Exit codes: 0 ok,
1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, clusters, corner, interchange, loopmodel, render, zoo
from .io import ConfigError, RunConfig, atomic_write, load_configuration, save_configuration
from .lattice import build_lattice
from .randomness import Streams
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- helpers -----------------------------------------------------------------

def _dims(text: str) -> list:
    try:
        dims = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be comma-separated integers, got {text!r}")
    if not dims or any(d <= 0 for d in dims):
        raise argparse.ArgumentTypeError("dims must be positive")
    return dims


def _replica_path(path, i, replicas):
    if path is None or replicas == 1:
        return path
    root, ext = os.path.splitext(path)
    return f"{root}.r{i}{ext}"


def _table(rows: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1, sort_keys=True) + "\n"
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit(rows, fmt, path):
    text = _table(rows, fmt)
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def _header(cfg: RunConfig) -> dict:
    return {"config": json.loads(cfg.to_json()), "version": __version__}


def _fmt(x):
    return float(x) if isinstance(x, (float, np.floating)) and math.isfinite(x) else (
        "nan" if isinstance(x, (float, np.floating)) else x)


# -- model runners -------------------------------------------------------------

def run_interchange_model(cfg: RunConfig) -> tuple[dict, dict]:
    g = cfg.graph()
    st = Streams(cfg.seed)
    tl = interchange.generate_timeline(g, cfg.params["beta"], st)
    perm, idx = interchange.run_interchange(g, tl, st)
    hist = idx.cycle_length_histogram()
    lengths = sorted((idx.size[r] for r in idx.roots()), reverse=True) + [0, 0]
    row = {"seed": cfg.seed, "vertices": g.vertex_count, "beta": cfg.params["beta"],
           "rings": tl.total_rings, "cycles": sum(hist.values()),
           "longest": lengths[0], "second": lengths[1],
           "sign": interchange.permutation_sign(perm)}
    return row, {"forward": perm.forward}


def _corner_window(cfg: RunConfig) -> corner.Window:
    w, h = cfg.lattice["dims"]
    return corner.Window.centered(w, h)


def _corner_summary(c: corner.CornerConfig, seed) -> dict:
    k, labels = corner.label_clusters(c)
    span, _, _ = corner.spanning_clusters(c, labels, k, axis="horizontal")
    contacts = corner._contacts(labels, k)
    finite = ~(contacts["left"] | contacts["right"] | contacts["bottom"] | contacts["top"])
    slopes = []
    for lab in span.tolist():
        row = int(np.flatnonzero(labels[:, 0] == lab)[0])
        path = corner.trace_path(c, (c.window.x0, c.window.y0 + row))
        try:
            slopes.append(corner.slope_statistic(path, min_length=min(1000, c.window.width)))
        except (corner.InsufficientLength, corner.VerticalPath):
            pass
    return {"seed": seed, "width": c.window.width, "height": c.window.height,
            "p": c.p, "q": c.q, "finite_loops": int(finite.sum()),
            "horizontal_spanning": int(len(span)),
            "slope_mean": _fmt(float(np.mean(slopes)) if slopes else float("nan")),
            "slope_target": _fmt(corner.asymptotic_slope(c.p, c.q)) if c.q != 0.5 else "nan",
            "degree_violations": corner.degree_violations(c)}


def run_corner_model(cfg: RunConfig):
    win = _corner_window(cfg)
    c = corner.generate_corner(win, cfg.params["p"], cfg.params["q"], Streams(cfg.seed))
    sections = {"xi": c.xi > 0, "eta": c.eta > 0}
    extra = {"window": [win.x0, win.y0, win.width, win.height], "X0": c.X0, "Y0": c.Y0}
    return _corner_summary(c, cfg.seed), sections, extra


def run_zoo_model(cfg: RunConfig):
    g = cfg.graph()
    dist = zoo.parse_animal(cfg.params["animal"])
    z = zoo.generate_zoo(g, cfg.params["lambda"], dist, Streams(cfg.seed))
    k, lab = zoo.site_clusters(g, z.occupancy)
    sizes = np.bincount(lab[lab >= 0]) if k else np.zeros(1, dtype=np.int64)
    row = {"seed": cfg.seed, "lambda": cfg.params["lambda"], "animal": str(dist),
           "occupied_fraction": z.occupied_fraction(), "clipped": z.clipped,
           "clusters": k, "largest_cluster": int(sizes.max()),
           "tail_mass": dist.tail_mass}
    return row, {"occupancy": z.occupancy}


def run_loopon_model(cfg: RunConfig, epoch: int = 1):
    g = cfg.graph()
    params = loopmodel.GibbsParams(cfg.params["x"], cfg.params["n"])
    s = loopmodel.LoopSampler(g, params, Streams(cfg.seed))
    per_sweep = len(s.faces)
    rows = []
    for e in range(cfg.params["sweeps"] // epoch):
        s.run(epoch * per_sweep)
        rows.append({"seed": cfg.seed, "epoch": e + 1, "edges": s.edge_count,
                     "loops": s.loop_count, "longest_loop": s.longest_loop()})
    return rows, {"omega": s.state.copy()}, s


# -- subcommands -------------------------------------------------------------------

def _config_from_args(args, model, lattice, params) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = RunConfig.from_json(fh.read())
        if cfg.model != model:
            raise ConfigError("model", f"config file is for {cfg.model!r}, not {model!r}")
    else:
        cfg = RunConfig(model, lattice, {}, 0)
    # command-line flags override file fields
    if args.dims is not None:
        cfg.lattice = dict(cfg.lattice, dims=args.dims)
    for k, v in lattice.items():
        cfg.lattice.setdefault(k, v)
    cfg.params.update({k: v for k, v in params.items() if v is not None})
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if args.format is not None:
        cfg.format = args.format
    return cfg.validate()


def _fan_out(cfg: RunConfig, args, fn):
    seeds = [cfg.seed + i for i in range(args.replicas)]

    def one(i_seed):
        i, s = i_seed
        c = RunConfig(cfg.model, dict(cfg.lattice), dict(cfg.params), s, list(cfg.analyses),
                      _replica_path(cfg.out, i, args.replicas), cfg.format)
        return c, fn(c)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(one, enumerate(seeds)))
    return sorted(results, key=lambda r: r[0].seed)


def _save_or_render(c: RunConfig, sections, extra, scene):
    if c.out is None:
        return
    if c.out.endswith(".svg"):
        atomic_write(c.out, scene())
    elif c.out.endswith(".png"):
        _write_png(c.out, sections)
    else:
        save_configuration(c.out, {**_header(c), **extra}, sections)


def _write_png(path, sections):
    from PIL import Image

    occ = sections.get("occupancy")
    if occ is None:
        raise UsageError("PNG export is available for zoo occupancy only")
    w, h = sections["_dims"]
    img = np.where(occ.reshape(h, w)[::-1], 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(img, mode="L").save(buf, format="PNG")
    atomic_write(path, buf.getvalue())


def cmd_interchange(args):
    kind = "z2_torus" if args.lattice == "torus" else "z2_window"
    cfg = _config_from_args(args, "interchange",
                            {"kind": kind, "dims": [25, 25],
                             "boundary": "periodic" if kind == "z2_torus" else "free"},
                            {"beta": args.beta})
    rows = []
    for c, (row, sections) in _fan_out(cfg, args, run_interchange_model):
        g = c.graph()
        _save_or_render(c, sections, {}, lambda: render.render_interchange(
            g, interchange.orbits(sections["forward"])))
        rows.append(row)
    _emit(rows, cfg.format, args.table)
    return EXIT_OK


def cmd_corner(args):
    cfg = _config_from_args(args, "corner", {"kind": "z2_window", "dims": [256, 256]},
                            {"p": args.p, "q": args.q})
    rows = []
    for c, (row, sections, extra) in _fan_out(cfg, args, run_corner_model):
        def scene(c=c, sections=sections, extra=extra):
            cc = _corner_from_sections(c.params, extra, sections)
            return _corner_scene(cc)
        _save_or_render(c, sections, extra, scene)
        rows.append(row)
    _emit(rows, cfg.format, args.table)
    return EXIT_OK


def cmd_loopon(args):
    kind = "hex_patch" if args.lattice == "hex" else "z2_window"
    cfg = _config_from_args(args, "loopon", {"kind": kind, "dims": [16, 16]},
                            {"x": args.x, "n": args.n, "sweeps": args.sweeps})
    rows = []
    for c, (rr, sections, sampler) in _fan_out(cfg, args, lambda c: run_loopon_model(c, args.epoch)):
        rows.extend(rr)
        if args.save_config:
            path = _replica_path(args.save_config, c.seed - cfg.seed, args.replicas)
            if path.endswith(".svg"):
                atomic_write(path, render.render_edges(c.graph(), sections["omega"]))
            else:
                save_configuration(path, _header(c), sections)
    # --out is the statistics table for this model
    _emit(rows, cfg.format, cfg.out or args.table)
    return EXIT_OK


def cmd_zoo(args):
    kind = "z2_torus" if args.torus else "z2_window"
    cfg = _config_from_args(args, "zoo", {"kind": kind, "dims": [256, 256],
                                          "boundary": "periodic" if args.torus else "free"},
                            {"lambda": args.lam, "animal": args.animal})
    rows = []
    for c, (row, sections) in _fan_out(cfg, args, run_zoo_model):
        g = c.graph()
        sections["_dims"] = g.dims
        occ = sections["occupancy"]
        if c.out and not c.out.endswith((".svg", ".png")):
            sections = {"occupancy": occ}
        _save_or_render(c, sections, {}, lambda: render.render_sites(g, occ))
        rows.append(row)
    _emit(rows, cfg.format, args.table)
    return EXIT_OK


def _corner_from_sections(params, header, sections) -> corner.CornerConfig:
    x0, y0, _, _ = header["window"]
    xi = np.where(sections["xi"], 1, -1)
    eta = np.where(sections["eta"], 1, -1)
    return corner.CornerConfig.from_arrays(xi, eta, x0, y0, header["X0"], header["Y0"],
                                           params["p"], params["q"])


def _corner_scene(c: corner.CornerConfig, max_primitives=render.MAX_PRIMITIVES):
    right, up = corner.open_edges(c)
    heights = corner.compute_height(c).vertex_heights()
    return render.render_corner(right, up, heights, max_primitives=max_primitives)


def _load(path):
    header, sections = load_configuration(path)
    cfg = RunConfig(**header["config"])
    return cfg, header, sections


def cmd_analyze(args):
    cfg, header, sections = _load(args.file)
    g = cfg.graph()
    rows = []
    a = args.analysis
    if cfg.model == "corner":
        c = _corner_from_sections(cfg.params, header, sections)
        if a in ("summary", "slope"):
            rows.append(_corner_summary(c, cfg.seed))
        elif a == "heights":
            inj = corner.height_bijection_check(c)
            step = corner.height_step_violations(c)
            const = corner.height_constancy(c)
            rows.append({"seed": cfg.seed, "spanning": inj["spanning"],
                         "collisions": len(inj["collisions"]),
                         "step_violations": step["vertical_edge_violations"]
                         + step["horizontal_edge_violations"],
                         "constancy_violations": const["violations"],
                         "clusters_checked": const["clusters_checked"]})
        else:
            raise UsageError(f"analysis {a!r} is not available for corner configurations")
    elif cfg.model == "interchange":
        fwd = sections["forward"]
        if a == "summary":
            hist = interchange.histogram_from_orbits(interchange.orbits(fwd))
            rows = [{"length": k, "count": v} for k, v in hist.items()]
        elif a == "mass-transport":
            for phi in (clusters.PHI_IDENTITY, clusters.PHI_PERMUTATION):
                r = clusters.mass_transport_check(g, phi, {"graph": g, "forward": fwd})
                rows.append({k: r[k] for k in ("phi", "received", "sent", "difference", "ok")})
        else:
            raise UsageError(f"analysis {a!r} is not available for interchange configurations")
    elif cfg.model in ("loopon", "zoo"):
        if cfg.model == "loopon":
            omega = sections["omega"]
        else:
            occ = sections["occupancy"]
            omega = occ[g.edges[:, 0]] & occ[g.edges[:, 1]]
        part = clusters.components(g, omega)
        if a == "summary":
            sizes = part.sizes()
            rows.append({"seed": cfg.seed, "components": part.count,
                         "largest": int(sizes.max()), "open_edges": int(omega.sum()),
                         "trifurcations": loopmodel.count_trifurcations(g, omega)})
        elif a == "mass-transport" and g.kind.value == "z2_torus":
            for phi in (clusters.PHI_IDENTITY, clusters.PHI_ADJACENCY):
                r = clusters.mass_transport_check(g, phi, {"graph": g, "omega": omega})
                rows.append({k: r[k] for k in ("phi", "received", "sent", "difference", "ok")})
        else:
            raise UsageError(f"analysis {a!r} is not available for this configuration")
    _emit(rows, args.format or "csv", args.out)
    return EXIT_OK


def cmd_render(args):
    cfg, header, sections = _load(args.file)
    g = cfg.graph()
    lim = args.max_primitives
    if cfg.model == "corner":
        svg = _corner_scene(_corner_from_sections(cfg.params, header, sections), lim)
    elif cfg.model == "interchange":
        svg = render.render_interchange(g, interchange.orbits(sections["forward"]),
                                        max_primitives=lim)
    elif cfg.model == "loopon":
        svg = render.render_edges(g, sections["omega"], max_primitives=lim)
    else:
        svg = render.render_sites(g, sections["occupancy"], max_primitives=lim)
    atomic_write(args.out, svg)
    return EXIT_OK


def cmd_verify(args):
    report = run_suite(args.suite, seed=args.seed or 0)
    text = json.dumps(report, indent=1, sort_keys=True, default=str) + "\n"
    if args.report:
        atomic_write(args.report, text)
    sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--dims", type=_dims, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--replicas", type=int, default=1)
    common.add_argument("--jobs", type=int, default=1)

    model = argparse.ArgumentParser(add_help=False, parents=[common])
    model.add_argument("--config", help="RunConfig JSON; flags override its fields")
    model.add_argument("--table", help="write the summary table here instead of stdout")

    p = argparse.ArgumentParser(prog="percgraft", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("interchange", parents=[model], help="interchange process permutation")
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--lattice", choices=("torus", "window"), default="torus")
    s.set_defaults(func=cmd_interchange, _defaults={"beta": 1.0})

    s = sub.add_parser("corner", parents=[model], help="corner percolation window")
    s.add_argument("--p", type=float, default=None)
    s.add_argument("--q", type=float, default=None)
    s.set_defaults(func=cmd_corner, _defaults={"p": 0.2, "q": 0.8})

    s = sub.add_parser("loopon", parents=[model], help="loop O(n) face-flip chain")
    s.add_argument("--lattice", choices=("hex", "z2"), default="hex")
    s.add_argument("--x", type=float, default=None)
    s.add_argument("--n", type=float, default=None)
    s.add_argument("--sweeps", type=int, default=None)
    s.add_argument("--epoch", type=int, default=1, help="sweeps per recorded sample")
    s.add_argument("--save-config", default=None)
    s.set_defaults(func=cmd_loopon, _defaults={"x": 1.0, "n": 1.0, "sweeps": 100})

    s = sub.add_parser("zoo", parents=[model], help="Poisson zoo site percolation")
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--animal", default=None)
    s.add_argument("--torus", action="store_true")
    s.set_defaults(func=cmd_zoo, _defaults={"lam": 0.1, "animal": "singleton"})

    s = sub.add_parser("analyze", parents=[common], help="analyse a saved configuration")
    s.add_argument("file")
    s.add_argument("--analysis", default="summary",
                   choices=("summary", "slope", "heights", "mass-transport"))
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("render", parents=[common], help="SVG scene of a saved configuration")
    s.add_argument("file")
    s.add_argument("--max-primitives", type=int, default=render.MAX_PRIMITIVES)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("suite", choices=sorted(SUITES))
    s.add_argument("--report", default=None)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)   # argparse exits with 2 on usage errors
    for k, v in getattr(args, "_defaults", {}).items():
        if getattr(args, k) is None and not getattr(args, "config", None):
            setattr(args, k, v)
    if args.command == "render" and not args.out:
        parser.error("render needs --out")
    if args.replicas < 1 or args.jobs < 1:
        parser.error("--replicas and --jobs must be at least 1")
    try:
        return args.func(args)
    except (ConfigError, UsageError, render.SceneTooLarge) as err:
        print(f"percgraft: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
