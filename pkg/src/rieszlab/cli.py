"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 numerical failure (the failing
stage is named on stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path


from . import __version__
from . import diagnostics as dia
from . import models as mdl
from . import reports as rep
from .config import ConfigError, load, parse_potential, validate_config
from .errors import NumericalError, ValidationError
from .pipeline import Pipeline, StageFailure, asym_outputs

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

STAGE_DEPENDENCIES = {
    "spectrum": ["spectrum"],
    "formmatrix": ["formmatrix"],
    "enclose": ["formmatrix", "enclose"],
    "correct": ["formmatrix", "correct"],
    "diagnose": ["formmatrix", "correct", "diagnose"],
}
PLOT_KINDS = ("enclosure", "residuals", "projection", "lambda1", "ratio")


def _scenario(args, extra_stage: str | None = None):
    cfg = load(args.config)
    if getattr(args, "M", None) is not None:
        cfg.setdefault("stages", {})
        if isinstance(cfg["stages"], list):
            cfg["stages"] = {s: {} for s in cfg["stages"]}
        for st in ("spectrum", "formmatrix"):
            cfg["stages"].setdefault(st, {})["M"] = args.M
    if extra_stage is not None:
        stages = cfg.setdefault("stages", {})
        if isinstance(stages, list):
            cfg["stages"] = stages = {s: {} for s in stages}
        for st in STAGE_DEPENDENCIES[extra_stage]:
            stages.setdefault(st, {})
    rpt = validate_config(cfg=cfg, strict=getattr(args, "strict", False))
    for w in rpt.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not rpt.ok:
        raise ConfigError("; ".join(rpt.errors))
    return rpt.scenario


def cmd_run(args) -> int:
    sc = _scenario(args)
    pipe = Pipeline(sc, args.out)
    for p in pipe.run():
        print(p)
    return EXIT_OK


def cmd_stage(args) -> int:
    sc = _scenario(args, args.command)
    pipe = Pipeline(sc, args.out)
    for p in pipe.run(STAGE_DEPENDENCIES[args.command]):
        print(p)
    return EXIT_OK


def cmd_validate(args) -> int:
    rpt = validate_config(args.config, strict=args.strict)
    for line in rpt.lines():
        print(line)
    return EXIT_OK if rpt.ok else EXIT_VALIDATION


def _model_from_flags(args) -> mdl.ModelSpec:
    if args.neumann is not None:
        return mdl.neumann_model(args.neumann)
    if args.beta == 2 and not args.wkb:
        return mdl.harmonic_model()
    return mdl.single_well_model(args.beta)


def cmd_asym(args) -> int:
    model = _model_from_flags(args)
    V = parse_potential(args.potential) if args.potential else None
    opts = {"k_min": args.k_min, "k_max": args.k_max, "q": args.q, "tau": args.tau}
    flags = {"command": "asym", "beta": args.beta, "neumann": args.neumann, "wkb": args.wkb, "check": args.check, "potential": args.potential, **opts}
    header = rep.header_line(rep.config_hash(flags))
    out = Path(args.out)
    for name, text in asym_outputs(model, args.check, V, opts, header):
        print(rep.write_atomic(out / name, text))
    return EXIT_OK


def cmd_counterexample(args) -> int:
    t = dia.parse_t_expression(args.t)
    res = dia.counterexample_blocks(args.gamma, t, args.blocks)
    flags = {"command": "counterexample", "gamma": args.gamma, "t": args.t, "blocks": args.blocks}
    header = rep.header_line(rep.config_hash(flags))
    cols = ("k", "t", "closed_minus", "closed_plus", "oracle_minus", "oracle_plus", "closed_norm", "exact_norm", "oracle_norm_minus", "oracle_norm_plus")
    rows = [
        (k + 1, res.t[k], res.closed_values[k, 0].real, res.closed_values[k, 1].real,
         res.oracle_values[k, 0].real, res.oracle_values[k, 1].real,
         res.closed_norms[k], res.exact_norms[k], res.oracle_norms[k, 0], res.oracle_norms[k, 1])
        for k in range(args.blocks)
    ]
    out = Path(args.out)
    print(rep.write_csv(out / "counterexample.csv", cols, rows, header))
    summary = {
        "value_error": res.value_error,
        "closed_norm_error": res.norm_error,
        "exact_norm_error": res.exact_norm_error,
        "growth_slope": res.growth_slope() if args.blocks >= 4 else math.nan,
    }
    print(rep.write_json(out / "counterexample.json", summary, header))
    return EXIT_OK


def _plot_enclosure(path: Path):
    body = json.loads(path.read_text())
    lines = []
    for b in body["boxes"]:
        lo, hi, h = b["re_lo"], b["re_hi"], b["im_half"]
        lines.append([(lo, -h), (hi, -h), (hi, h), (lo, h), (lo, -h)])
    return rep.polyline_text(lines, [body.get("_header") or "", f"N={body['N']} h={body['h']}"])


def _plot_corrections(path: Path, kind: str):
    cols, rows = rep.read_csv(path)
    idx = {c: i for i, c in enumerate(cols)}
    xs, ys = [], []
    for r in rows:
        n = float(r[idx["n"]])
        if kind == "residuals":
            res2 = float(r[idx["residual2"]])
            l1 = math.hypot(float(r[idx["re_lambda1"]]), float(r[idx["im_lambda1"]]))
            if res2 > 0 and l1 > 0:
                xs.append(math.log(n))
                ys.append(math.log(res2))
        else:
            xs.append(n)
            ys.append(float(r[idx["proj_norm"]]))
    label = "log n vs log residual2" if kind == "residuals" else "n vs projection norm"
    return rep.plot_text(xs, ys, [label])


def _plot_fit(path: Path, kind: str):
    cols, rows = rep.read_csv(path)
    xs = [float(r[0]) for r in rows]
    if kind == "lambda1":
        ys = [float(r[1]) for r in rows]
        target = float(rows[0][2]) if rows else math.nan
        return rep.plot_text(xs, ys, ["n vs scaled Re lambda1", f"target {rep.fmt(target)}"])
    ys = [float(r[3]) for r in rows]
    return rep.plot_text(xs, ys, ["k vs observed/target"])


def cmd_plotdata(args) -> int:
    src = Path(args.input)
    if not src.exists():
        raise ConfigError(f"no such report {src}")
    if args.kind == "enclosure":
        text = _plot_enclosure(src)
    elif args.kind in ("residuals", "projection"):
        text = _plot_corrections(src, args.kind)
    else:
        text = _plot_fit(src, args.kind)
    print(rep.write_atomic(args.out, text))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rieszlab", description="Enclosures, perturbation series and basis diagnostics for perturbed self-adjoint operators.")
    ap.add_argument("--version", action="version", version=f"rieszlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every stage listed in a scenario config")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    p.add_argument("--M", type=int, default=None, help="truncation size override")
    p.add_argument("--strict", action="store_true", help="treat admissibility warnings as errors")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="validate a scenario config")
    p.add_argument("config")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_validate)

    for name in STAGE_DEPENDENCIES:
        p = sub.add_parser(name, help=f"run the {name} stage (and what it needs)")
        p.add_argument("config")
        p.add_argument("--out", default=None)
        p.add_argument("--M", type=int, default=None)
        p.add_argument("--strict", action="store_true")
        p.set_defaults(func=cmd_stage)

    p = sub.add_parser("asym", help="asymptotic law checks")
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--neumann", type=float, default=None, metavar="L", help="Neumann interval of half-length L instead of a well")
    p.add_argument("--wkb", action="store_true", help="use WKB eigenfunctions even for beta = 2")
    p.add_argument("--check", choices=("mu", "lambda1", "lq", "two_term"), required=True)
    p.add_argument("--potential", default=None, help="catalog:amplitude[:params], e.g. gaussian:1.0")
    p.add_argument("--k-min", dest="k_min", type=int, default=20)
    p.add_argument("--k-max", dest="k_max", type=int, default=100)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_asym)

    p = sub.add_parser("counterexample", help="block counterexample at 2 alpha + gamma = 1")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--t", required=True, help="constant in [0, 1) or 1-c/k")
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("plotdata", help="two-column plot data from a report")
    p.add_argument("--kind", choices=PLOT_KINDS, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plotdata)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rep.worker_count()
        return args.func(args)
    except StageFailure as exc:
        print(f"rieszlab: numerical failure in stage {exc.stage!r}: {exc.cause}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        print(f"rieszlab: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"rieszlab: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"rieszlab: numerical failure in stage {exc.stage!r}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
