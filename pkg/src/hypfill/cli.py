"""Command-line surface.

Subcommands: corpus gen, fill build, uniformize, delta, gh sweep,
gh critical, gh scale-check, model sweep, boundary probe, replay.

Exit codes: 0 success, 2 validation failure, 3 numeric guard trip,
64 usage error.  Whenever a command writes an output file it also writes
``<out>.record.json`` with input/output hashes and seeds; ``hypfill replay
--record R`` re-runs the recorded command and verifies the outputs byte for
byte.  Worker count comes from HYPFILL_THREADS and never affects results.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import __version__
from .boundary import (default_gromov_threshold, default_metric_threshold,
                       probe_boundary, sample_rays)
from .corpus import SpaceCorpusEntry, corpus_generate, segment_space
from .errors import FormatError, HypfillError, NumericGuardError, ValidationError
from .filling import FillingParams, build_filling, normalize_space
from .gehring_hayman import (FillingFamily, ModelFamily, ScalingCheckParams,
                             estimate_critical_exponent, gh_sweep,
                             scaling_check)
from .hyperbolicity import delta_exact, delta_sampled
from .metric import validate_metric
from .model_spaces import (ModelSpaceParams, d_eps_ray_upper,
                           ray_separation_bound, ray_upper_log_slope)
from .records import replay as replay_record
from .records import write_record
from .serialize import (conformal_to_dict, dump_file, load_graph, load_space,
                        save_filling, save_space, write_csv)
from .uniformize import boundary_distances, uniformize_graph

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(USAGE_EXIT)


def _build_parser() -> _Parser:
    top = _Parser(prog="hypfill", description=__doc__)
    top.add_argument("--version", action="version", version=f"hypfill {__version__}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    corpus = sub.add_parser("corpus", help="space-corpus generators")
    corpus_sub = corpus.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    gen = corpus_sub.add_parser("gen", help="generate a corpus space")
    gen.add_argument("--generator", required=True,
                     choices=["segment", "circle", "cantor", "tree", "point-cloud-file"])
    gen.add_argument("--points", type=int, default=64)
    gen.add_argument("--length", type=float, default=0.9)
    gen.add_argument("--circumference", type=float, default=1.8)
    gen.add_argument("--ratio", type=float, default=1.0 / 3.0)
    gen.add_argument("--depth", type=int, default=5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--path", help="input for point-cloud-file")
    gen.add_argument("--name", default=None)
    gen.add_argument("--out", default="space.json")
    gen.set_defaults(handler=_cmd_corpus_gen)

    fill = sub.add_parser("fill", help="hyperbolic fillings")
    fill_sub = fill.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    fb = fill_sub.add_parser("build", help="build a filling from a space file")
    fb.add_argument("--alpha", type=float, default=2.0)
    fb.add_argument("--tau", type=float, default=2.0)
    fb.add_argument("--depth", type=int, default=6)
    fb.add_argument("--seed", type=int, default=0)
    fb.add_argument("--in", dest="infile", required=True)
    fb.add_argument("--out", default="filling.json")
    fb.set_defaults(handler=_cmd_fill_build)

    uni = sub.add_parser("uniformize", help="conformal reweighting d_eps")
    uni.add_argument("--epsilon", type=float, required=True)
    uni.add_argument("--in", dest="infile", required=True)
    uni.add_argument("--basepoint", default=None)
    uni.add_argument("--out", default="conformal.json")
    uni.set_defaults(handler=_cmd_uniformize)

    delta = sub.add_parser("delta", help="four-point hyperbolicity estimate")
    delta.add_argument("--in", dest="infile", required=True)
    group = delta.add_mutually_exclusive_group(required=True)
    group.add_argument("--exact", action="store_true")
    group.add_argument("--samples", type=int)
    delta.add_argument("--cap", type=int, default=300)
    delta.add_argument("--seed", type=int, default=0)
    delta.add_argument("--out", default=None)
    delta.set_defaults(handler=_cmd_delta)

    gh = sub.add_parser("gh", help="Gehring-Hayman diagnostics")
    gh_sub = gh.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    sw = gh_sub.add_parser("sweep", help="GH ratio sweep on a graph")
    sw.add_argument("--epsilon", type=float, required=True)
    sw.add_argument("--pairs", type=int, default=2000)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--in", dest="infile", required=True)
    sw.add_argument("--basepoint", default=None)
    sw.add_argument("--out", default=None)
    sw.add_argument("--csv", default=None)
    sw.set_defaults(handler=_cmd_gh_sweep)

    cr = gh_sub.add_parser("critical", help="critical exponent bisection")
    cr.add_argument("--family", required=True, choices=["filling", "h2", "model"])
    cr.add_argument("--alpha", type=float, default=2.0)
    cr.add_argument("--tau", type=float, default=2.0)
    cr.add_argument("--kappa", type=float, default=-1.0)
    cr.add_argument("--range", dest="eps_range", required=True, help="LO:HI")
    cr.add_argument("--tol", type=float, default=0.1)
    cr.add_argument("--depth", type=int, default=8)
    cr.add_argument("--points", type=int, default=64)
    cr.add_argument("--k-max", type=float, default=30.0)
    cr.add_argument("--seed", type=int, default=0)
    cr.add_argument("--in", dest="infile", default=None)
    cr.add_argument("--no-gh", action="store_true", help="skip per-point GH ratios")
    cr.add_argument("--out", default=None)
    cr.add_argument("--csv", default=None)
    cr.set_defaults(handler=_cmd_gh_critical)

    sc = gh_sub.add_parser("scale-check", help="metric scaling identity")
    sc.add_argument("--k", type=float, required=True)
    sc.add_argument("--epsilon", type=float, required=True)
    sc.add_argument("--curves", type=int, default=100)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--in", dest="infile", default=None,
                    help="graph file (default: segment filling, alpha 2, depth 6)")
    sc.add_argument("--out", default=None)
    sc.set_defaults(handler=_cmd_gh_scale_check)

    model = sub.add_parser("model", help="constant-curvature closed forms")
    model_sub = model.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    ms = model_sub.add_parser("sweep", help="sweep the ray bounds over epsilon and k")
    ms.add_argument("--kappa", type=float, default=-1.0)
    ms.add_argument("--eps-range", required=True, help="LO:HI")
    ms.add_argument("--eps-steps", type=int, default=9)
    ms.add_argument("--k-max", type=float, default=30.0)
    ms.add_argument("--k-steps", type=int, default=16)
    ms.add_argument("--dtheta", type=float, default=math.pi)
    ms.add_argument("--csv", default="model_sweep.csv")
    ms.add_argument("--out", default=None)
    ms.set_defaults(handler=_cmd_model_sweep)

    bd = sub.add_parser("boundary", help="Gromov vs metric boundary probes")
    bd_sub = bd.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    bp = bd_sub.add_parser("probe", help="compare ray partitions on a filling")
    bp.add_argument("--epsilon", type=float, required=True)
    bp.add_argument("--rays", type=int, default=8)
    bp.add_argument("--depth", type=int, default=8)
    bp.add_argument("--alpha", type=float, default=2.0)
    bp.add_argument("--tau", type=float, default=2.0)
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--tg", type=float, default=None, help="Gromov product threshold")
    bp.add_argument("--tm", type=float, default=None, help="d_eps proximity threshold")
    bp.add_argument("--points", type=int, default=64)
    bp.add_argument("--in", dest="infile", default=None)
    bp.add_argument("--out", default=None)
    bp.set_defaults(handler=_cmd_boundary_probe)

    rp = sub.add_parser("replay", help="re-run a recorded experiment and verify outputs")
    rp.add_argument("--record", required=True)
    rp.set_defaults(handler=_cmd_replay)
    return top


def _parse_range(text: str):
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError as exc:
        raise FormatError(f"range must be LO:HI, got {text!r}") from exc


def _finish(argv, args, inputs, outputs, seeds, t0):
    """Write the experiment record next to the first output."""
    if not outputs:
        return
    flags = {k: v for k, v in vars(args).items() if k not in ("handler",)}
    write_record(f"{outputs[0]}.record.json", argv, flags, inputs, seeds,
                 outputs, time.perf_counter() - t0)


def _load_space_arg(infile, points):
    """Space from --in, or the default segment corpus."""
    if infile:
        space, _ = load_space(infile)
        return space, [infile]
    return segment_space(points), []


# -- handlers ----------------------------------------------------------------

def _cmd_corpus_gen(args, argv, t0):
    params = {
        "points": args.points, "length": args.length,
        "circumference": args.circumference, "ratio": args.ratio,
        "depth": args.depth, "seed": args.seed,
    }
    if args.generator == "point-cloud-file":
        if not args.path:
            raise FormatError("point-cloud-file needs --path")
        params = {"path": args.path}
    name = args.name or f"{args.generator}-{args.points}"
    entry = SpaceCorpusEntry(name, args.generator, params)
    space, meta = corpus_generate(entry)
    violations = validate_metric(space)
    if violations:
        raise ValidationError(f"generated space fails validate_metric: {violations[0]}")
    save_space(space, args.out, meta)
    inputs = [args.path] if args.generator == "point-cloud-file" else []
    _finish(argv, args, inputs, [args.out], {"seed": args.seed}, t0)
    print(f"wrote {args.out}: {len(space.points)} points ({args.generator})")
    return 0


def _cmd_fill_build(args, argv, t0):
    space, _ = load_space(args.infile)
    space, scale = normalize_space(space)
    params = FillingParams(args.alpha, args.tau, args.depth, args.seed)
    filling = build_filling(space, params, scale_factor=scale)
    save_filling(filling, args.out)
    _finish(argv, args, [args.infile], [args.out], {"seed": args.seed}, t0)
    sizes = [len(lev) for lev in filling.levels]
    print(f"wrote {args.out}: {len(filling.graph.vertices)} vertices, levels {sizes}")
    return 0


def _cmd_uniformize(args, argv, t0):
    g = load_graph(args.infile)
    cg = uniformize_graph(g, args.epsilon, args.basepoint)
    obj = conformal_to_dict(cg)
    boundary = boundary_distances(cg)
    obj["boundaryDistance"] = [boundary[v] for v in cg.graph.vertex_order()]
    dump_file(obj, args.out, schema="conformal")
    _finish(argv, args, [args.infile], [args.out], {}, t0)
    print(f"wrote {args.out}: epsilon={args.epsilon}, depth={cg.truncation_depth}")
    return 0


def _cmd_delta(args, argv, t0):
    g = load_graph(args.infile)
    if args.exact:
        est = delta_exact(g, cap=args.cap)
    else:
        est = delta_sampled(g, args.samples, args.seed)
    outputs = []
    if args.out:
        dump_file(est.to_dict(), args.out, schema="delta_report")
        outputs = [args.out]
    _finish(argv, args, [args.infile], outputs, {"seed": args.seed}, t0)
    print(f"delta={est.delta} method={est.method} witness={est.witness}")
    return 0


def _cmd_gh_sweep(args, argv, t0):
    g = load_graph(args.infile)
    cg = uniformize_graph(g, args.epsilon, args.basepoint)
    report = gh_sweep(cg, args.pairs, args.seed)
    outputs = []
    if args.out:
        dump_file(report.to_dict(), args.out, schema="gh_report")
        outputs.append(args.out)
    if args.csv:
        write_csv(args.csv, ["epsilon", "slope", "maxRatio", "depth"],
                  [[args.epsilon, None, report.max_ratio, cg.truncation_depth]])
        outputs.append(args.csv)
    _finish(argv, args, [args.infile], outputs, {"seed": args.seed}, t0)
    print(f"maxRatio={report.max_ratio} over {report.pairs_examined} pairs "
          f"(deep {report.deep_pairs_examined})")
    return 0


def _cmd_gh_critical(args, argv, t0):
    lo, hi = _parse_range(args.eps_range)
    inputs = []
    if args.family == "filling":
        space, inputs = _load_space_arg(args.infile, args.points)
        space, _ = normalize_space(space)
        depths = tuple(d for d in (args.depth - 2, args.depth - 1, args.depth) if d >= 2)
        family = FillingFamily(space, args.alpha, args.tau, args.seed, depths)
    elif args.family == "h2":
        family = ModelFamily(-1.0, k_max=args.k_max)
    else:
        family = ModelFamily(args.kappa, k_max=args.k_max)
    est = estimate_critical_exponent(family, (lo, hi), args.tol, with_gh=not args.no_gh)
    outputs = []
    if args.out:
        dump_file(est.to_dict(), args.out, schema="critical_report")
        outputs.append(args.out)
    if args.csv:
        rows = [[e, s, r, d] for e, s, r, d in est.sweep]
        write_csv(args.csv, ["epsilon", "slope", "maxRatio", "depth"], rows)
        outputs.append(args.csv)
    _finish(argv, args, inputs, outputs, {"seed": args.seed}, t0)
    print(f"critical exponent bracket [{est.lo:.6g}, {est.hi:.6g}] "
          f"(mid {est.midpoint:.6g}, width {est.width:.3g})")
    return 0


def _default_scale_graph(seed: int):
    space = segment_space(64)
    return build_filling(space, FillingParams(2.0, 2.0, 6, seed)).graph


def _cmd_gh_scale_check(args, argv, t0):
    if args.infile:
        g = load_graph(args.infile)
        inputs = [args.infile]
    else:
        g = _default_scale_graph(args.seed)
        inputs = []
    params = ScalingCheckParams(args.k, args.epsilon)
    defect = scaling_check(g, params, count=args.curves, seed=args.seed)
    outputs = []
    if args.out:
        dump_file({
            "K": params.k, "epsilon": params.epsilon,
            "epsilonTilde": params.epsilon_tilde,
            "curves": args.curves, "maxRelativeDefect": defect, "seed": args.seed,
        }, args.out, schema="scale_check_report")
        outputs.append(args.out)
    _finish(argv, args, inputs, outputs, {"seed": args.seed}, t0)
    print(f"max relative defect {defect:.3e} (K={args.k}, epsilon={args.epsilon})")
    return 0


def _cmd_model_sweep(args, argv, t0):
    lo, hi = _parse_range(args.eps_range)
    if args.kappa >= 0:
        raise FormatError("kappa must be negative")
    rows = []
    for eps in np.linspace(lo, hi, args.eps_steps):
        params = ModelSpaceParams(args.kappa, float(eps))
        slope = ray_upper_log_slope(params, args.dtheta, args.k_max)
        for k in np.linspace(args.k_max / args.k_steps, args.k_max, args.k_steps):
            bound = ray_separation_bound(params, float(k))
            upper, _ = d_eps_ray_upper(params, args.dtheta, float(k))
            rows.append([float(eps), float(k), bound, upper, slope])
    outputs = []
    if args.csv:
        write_csv(args.csv, ["epsilon", "k", "bound", "rayUpper", "slope"], rows)
        outputs.append(args.csv)
    if args.out:
        dump_file({"kappa": args.kappa, "dtheta": args.dtheta, "kMax": args.k_max,
                   "rows": len(rows), "csv": args.csv},
                  args.out, schema="model_sweep_report")
        outputs.append(args.out)
    _finish(argv, args, [], outputs, {}, t0)
    print(f"swept {len(rows)} (epsilon, k) points, kappa={args.kappa}")
    return 0


def _cmd_boundary_probe(args, argv, t0):
    space, inputs = _load_space_arg(args.infile, args.points)
    space, _ = normalize_space(space)
    filling = build_filling(space, FillingParams(args.alpha, args.tau, args.depth, args.seed))
    g = filling.graph
    cg = uniformize_graph(g, args.epsilon)
    family = sample_rays(g, filling.root, args.rays, args.seed)
    if len(g.vertices) <= 300:
        delta_hat = delta_exact(g).delta
    else:
        delta_hat = delta_sampled(g, 2000, 0).delta
    t_g = args.tg if args.tg is not None else default_gromov_threshold(family.depth, delta_hat)
    t_m = args.tm if args.tm is not None else default_metric_threshold(args.epsilon, family.depth)
    result = probe_boundary(g, cg, family, t_g, t_m)
    sensitivity = []
    for scale in (0.5, 1.0, 2.0):
        if scale == 1.0:
            r = result
        else:
            # scale the Gromov slack below full depth and the metric radius
            t_g_s = family.depth - scale * (family.depth - t_g)
            r = probe_boundary(g, cg, family, t_g_s, t_m * scale)
        sensitivity.append({
            "scale": scale,
            "gromovClasses": len(r.gromov_partition),
            "metricClasses": len(r.metric_partition),
            "agree": r.agree,
        })
    report = {
        "epsilon": args.epsilon,
        "depth": family.depth,
        "rayEndpoints": family.endpoints(),
        "raySeed": args.seed,
        "deltaHat": delta_hat,
        "partition": result.to_dict(),
        "sensitivity": sensitivity,
        "thresholdDefaults": {"tgIsDefault": args.tg is None, "tmIsDefault": args.tm is None,
                              "note": "finite-depth thresholds are heuristics; see sensitivity"},
    }
    outputs = []
    if args.out:
        dump_file(report, args.out, schema="boundary_report")
        outputs.append(args.out)
    _finish(argv, args, inputs, outputs, {"seed": args.seed}, t0)
    print(f"agree={result.agree} gromovClasses={len(result.gromov_partition)} "
          f"metricClasses={len(result.metric_partition)} (tg={t_g:.4g}, tm={t_m:.4g})")
    return 0


def _cmd_replay(args, argv, t0):
    return replay_record(args.record, run)


def run(argv) -> int:
    """Parse and execute; returns the exit code (also the CLI entry path)."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        return args.handler(args, list(argv), t0)
    except (FormatError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericGuardError as exc:
        print(f"numeric guard: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HypfillError as exc:  # pragma: no cover - catch-all for subclasses
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():  # console entry point
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
