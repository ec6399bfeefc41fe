"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a
configuration error (bad JSON, unknown ids, impossible grids).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import corpus_document, make_corpus_weight
from .grid import Grid, GridError
from .harness import RUNNERS, ConfigError, SweepConfig
from .maximal import (check_domination, hl_maximal, nontangential_fractional, smooth_majorant,
                      sup_ball_average)
from .reports import ReportSet, canonical_json, svg_histogram, svg_loglog_fit
from .symbols import SymbolError, estimate_class_constants, make_builtin_symbol, redeclare

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
FORMATS = ("json", "csv", "svg")
_CONFIG_ERRORS = (ConfigError, GridError, SymbolError, KeyError, TypeError)


class CliConfigError(Exception):
    pass


def _fail_config(msg: str) -> int:
    print(f"config error: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def _load_json(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliConfigError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _json_arg(text: str | None, what: str) -> dict:
    if text is None:
        return {}
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliConfigError(f"{what}:1:{exc.colno}: {exc.msg}") from exc


def _formats(text: str) -> list[str]:
    fmts = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in fmts if f not in FORMATS]
    if bad:
        raise CliConfigError(f"unknown format(s) {bad}; expected {FORMATS}")
    return fmts


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliConfigError(f"output directory {out}: {exc.strerror}") from exc
    probe = out / ".write-test"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliConfigError(f"output directory {out} is not writable") from exc
    return out


# --- scenarios ---------------------------------------------------------------

def scenario_config(scn: dict, args) -> tuple[str, SweepConfig]:
    """Resolve a scenario document plus global flag overrides into a runner id and a config."""
    if not isinstance(scn, dict):
        raise ConfigError("scenario must be a JSON object")
    ident = scn.get("inequality_id")
    if ident not in RUNNERS:
        raise ConfigError(f"unknown inequality_id {ident!r}; expected one of {sorted(RUNNERS)}")
    grid = dict(scn.get("grid", {}))
    corpus = dict(scn.get("corpus", {}))
    if args.grid is not None:
        grid["sizes"] = [args.grid, 2 * args.grid]
    if args.dim is not None:
        grid["dim"] = args.dim
    if args.length is not None:
        grid["length"] = args.length
    seed = args.seed if args.seed is not None else int(corpus.get("seed", scn.get("seed", 0)))
    symbols = scn.get("symbols") or ([scn["symbol"]] if "symbol" in scn else [{"kind": "constant", "params": {}}])
    params = dict(scn.get("params", {}))
    if "chain" in scn:
        params["chain"] = scn["chain"]

    def family(key):
        val = corpus.get(key, "standard")
        if val == "standard":
            return None
        if val == "lognormal":
            from .corpus import lognormal_descriptors
            return lognormal_descriptors(seed, int(corpus.get("size", 10)))
        if isinstance(val, list):
            return val
        raise ConfigError(f"corpus.{key} must be 'standard', 'lognormal' or a list of descriptors")

    cfg = SweepConfig(symbols=symbols, functions=family("functions"), weights=family("weights"),
                      sizes=tuple(grid.get("sizes", (256, 512))), dim=int(grid.get("dim", 1)),
                      length=float(grid.get("length", 1.0)), seed=seed,
                      corpus_size=int(corpus.get("size", 10)), params=params)
    return ident, cfg


def _write_reports(rs: ReportSet, name: str, out: Path, fmts: list[str], header: dict) -> list[Path]:
    rs.provenance = {**header, **rs.provenance}
    written = []
    if "json" in fmts:
        p = out / f"{name}.json"
        p.write_text(rs.to_json())
        written.append(p)
    if "csv" in fmts:
        p = out / f"{name}.csv"
        p.write_text(rs.to_csv())
        written.append(p)
    if "svg" in fmts:
        written.extend(_svgs(rs.to_dict(), name, out))
    return written


def _svgs(doc: dict, name: str, out: Path) -> list[Path]:
    written = []
    ratios = [r["ratio"] for r in doc.get("reports", []) if isinstance(r.get("ratio"), (int, float))]
    if ratios:
        p = out / f"{name}-ratios.svg"
        p.write_text(svg_histogram(ratios, title=f"{name}: ratios ({len(ratios)})"))
        written.append(p)
    for label, d in sorted(doc.get("summary", {}).get("decay", {}).items()):
        ys = [y for y in d.get("y", []) if isinstance(y, (int, float))]
        if len(ys) != len(d.get("x", [])) or not any(y > 0 for y in ys):
            continue
        safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in label)
        p = out / f"{name}-decay-{safe}.svg"
        p.write_text(svg_loglog_fit(d["x"], ys, title=f"{name}: {label}", xlabel=d.get("xlabel", "x"),
                                    ylabel=d.get("ylabel", "y")))
        written.append(p)
    return written


def _finish(rs: ReportSet, name: str, args, header: dict) -> int:
    out = _out_dir(args)
    for p in _write_reports(rs, name, out, _formats(args.format), header):
        print(p)
    for c in rs.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {rs.name}:{c.name} value={c.value} bound={c.bound} {c.detail}".rstrip())
    if not rs.passed:
        for c in rs.failures():
            print(f"failure: {rs.name}:{c.name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    path = Path(args.scenario)
    scn = _load_json(path)
    ident, cfg = scenario_config(scn, args)
    _formats(args.format)
    _out_dir(args)
    name = scn.get("name", path.stem)
    rs = RUNNERS[ident](cfg)
    header = {"scenario": scn, "scenario_file": path.name, "resolved_config": cfg.to_dict()}
    return _finish(rs, name, args, header)


# --- single-object commands ----------------------------------------------------

def _grid_from(args, n_default=256, length_default=1.0) -> Grid:
    return Grid(args.dim or 1, args.grid or n_default, args.length if args.length is not None else length_default)


def cmd_symbol(args) -> int:
    params = _json_arg(args.params, "--params")
    sym = make_builtin_symbol(args.kind, params, dim=args.dim or 1, length=args.length or 1.0)
    overrides = {k: v for k, v in (("m", args.declare_m), ("rho", args.declare_rho), ("delta", args.declare_delta))
                 if v is not None}
    if overrides:
        sym = redeclare(sym, **overrides)
    rep = estimate_class_constants(sym, max_order=args.order)
    print(rep.table())
    if args.out_json:
        Path(args.out_json).write_text(canonical_json(rep.to_dict()))
    if args.check_class and not (rep.all_finite and rep.uniform):
        print(f"failure: symbol {sym.label} is not uniform in its declared class", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_maximal(args) -> int:
    g = _grid_from(args)
    desc = _json_arg(args.weight, "--weight") or {"kind": "random-lognormal", "params": {}}
    w = make_corpus_weight(g, desc, args.seed or 0)
    rs = ReportSet("maximal", provenance={"weight": desc, "grid": g.to_dict(), "op": args.op})
    if args.op == "M":
        v = hl_maximal(w).values.real
    elif args.op == "frac":
        v = nontangential_fractional(w, args.rho, args.m).values.real
    elif args.op == "smooth":
        v = smooth_majorant(w, g.dim + 1).values.real
    elif args.op == "a1star":
        v = sup_ball_average(w).values.real
    else:
        rep = check_domination(w, args.rho, args.m)
        rs.check("domination", rep.passed, rep.constant, rep.geometric_constant)
        rs.summary["domination"] = rep.to_dict()
        v = None
    if v is not None:
        rs.summary["values"] = {"min": float(v.min()), "max": float(v.max()), "mean": float(v.mean())}
        rs.check("finite-positive", bool((v > 0).all()), float(v.min()))
    return _finish(rs, f"maximal-{args.op}", args, {"command": "maximal"})


def _sweep_command(args, ident: str, symbols: list, **kw) -> int:
    sizes = kw.pop("sizes", None) or ([args.grid] if args.grid else [256])
    cfg = SweepConfig(symbols=symbols, sizes=tuple(sizes), dim=args.dim or 1,
                      length=args.length if args.length is not None else kw.pop("length", 1.0),
                      seed=args.seed or 0, **kw)
    rs = RUNNERS[ident](cfg)
    return _finish(rs, ident, args, {"command": ident, "resolved_config": cfg.to_dict()})


def cmd_kernel(args) -> int:
    sym = _json_arg(args.symbol, "--symbol") or {"kind": "bessel", "params": {"m": -2}}
    sizes = [int(s) for s in args.sizes.split(",")]
    return _sweep_command(args, "kernel-decay", [sym], sizes=sizes,
                          params={"L": args.L, "expect": args.expect})


def cmd_compose(args) -> int:
    sym = _json_arg(args.symbol, "--symbol") or {"kind": "x_modulated", "params": {}}
    R_list = [float(r) for r in args.R.split(",")]
    return _sweep_command(args, "compose", [sym], length=8.0, sizes=[args.grid or 512],
                          params={"R_list": R_list, "N": args.N, "epsilon": args.epsilon})


def cmd_cotlar(args) -> int:
    from .corpus import lognormal_descriptors
    sym = _json_arg(args.symbol, "--symbol") or {"kind": "s000", "params": {"xi_cutoff": 4.0}}
    weights = lognormal_descriptors(args.seed or 0, args.weights)
    return _sweep_command(args, "cotlar", [sym], length=8.0, sizes=[args.grid or 512], weights=weights)


def cmd_plot(args) -> int:
    doc = _load_json(Path(args.report))
    has_ratios = bool(doc.get("reports"))
    has_decay = bool(doc.get("summary", {}).get("decay"))
    if not (has_ratios or has_decay):
        raise CliConfigError(f"{args.report}: report has no ratios and no decay data to plot")
    out = _out_dir(args)
    written = _svgs(doc, Path(args.report).stem, out)
    if not written:
        raise CliConfigError(f"{args.report}: nothing plottable")
    for p in written:
        print(p)
    return EXIT_OK


def cmd_corpus_gen(args) -> int:
    out = _out_dir(args)
    doc = corpus_document(args.seed or 0, args.size, args.length if args.length is not None else 1.0)
    p = out / "corpus.json"
    p.write_text(canonical_json(doc))
    # touch every member once so bad descriptors fail here, not mid-sweep
    g = _grid_from(args, length_default=doc["length"])
    for j, d in enumerate(doc["weights"]):
        make_corpus_weight(g, d, doc["seed"], j)
    print(p)
    return EXIT_OK


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=None, help="grid points per axis (base size)")
    common.add_argument("--dim", type=int, choices=(1, 2), default=None)
    common.add_argument("--length", type=float, default=None, help="torus side length")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default="reports", help="output directory")
    common.add_argument("--format", default="json,csv", help="comma list of json, csv, svg")

    parser = argparse.ArgumentParser(prog="pdoweights", description="Weighted inequality verification on the torus")
    parser.add_argument("--version", action="version", version=f"pdoweights {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run a JSON scenario")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("symbol", parents=[common], help="class-constant table for a builtin symbol")
    p.add_argument("kind")
    p.add_argument("--params", default=None, help="JSON parameter map")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--check-class", action="store_true", help="exit 1 unless the declared class is uniform")
    p.add_argument("--declare-m", type=float, default=None)
    p.add_argument("--declare-rho", type=float, default=None)
    p.add_argument("--declare-delta", type=float, default=None)
    p.add_argument("--out-json", default=None)
    p.set_defaults(func=cmd_symbol)

    p = sub.add_parser("maximal", parents=[common], help="maximal functions of one weight")
    p.add_argument("--weight", default=None, help="JSON weight descriptor")
    p.add_argument("--op", choices=("M", "frac", "smooth", "a1star", "domination"), default="M")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--m", type=float, default=-0.25)
    p.set_defaults(func=cmd_maximal)

    p = sub.add_parser("kernel", parents=[common], help="kernel decay constant across grid sizes")
    p.add_argument("--symbol", default=None, help="JSON symbol descriptor")
    p.add_argument("--L", type=float, default=2.0)
    p.add_argument("--sizes", default="256,512,1024")
    p.add_argument("--expect", choices=("stable", "unstable"), default="stable")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("compose", parents=[common], help="composition with the frequency cutoff")
    p.add_argument("--symbol", default=None)
    p.add_argument("--R", default="8,16,32,64")
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("cotlar", parents=[common], help="block norms of the conjugated operator")
    p.add_argument("--symbol", default=None)
    p.add_argument("--weights", type=int, default=10)
    p.set_defaults(func=cmd_cotlar)

    p = sub.add_parser("plot", parents=[common], help="SVG plots from a report JSON")
    p.add_argument("report")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("corpus-gen", parents=[common], help="write the frozen corpus descriptors")
    p.add_argument("--size", type=int, default=10)
    p.set_defaults(func=cmd_corpus_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliConfigError as exc:
        return _fail_config(str(exc))
    except _CONFIG_ERRORS as exc:
        return _fail_config(f"{type(exc).__name__}: {exc}")
    except MemoryError as exc:
        return _fail_config(f"size guard: {exc}")


if __name__ == "__main__":
    sys.exit(main())
