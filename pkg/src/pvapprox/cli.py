"""Command line driver: ``pvapprox {estimate,scan,verify,oracle,jeulin,dump}``.

Flags override a JSON ``--config`` file, which overrides the defaults.
Every CSV starts with a ``#`` provenance line listing the resolved config, so
the same command line and seed always produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .geometry import format_body, parse_body
from .process import default_window, sample_poisson, write_points_csv
from .stats import (
    Estimator,
    jeulin_compare,
    scaling_fit,
    simulate,
    symdiff_mean_exact,
    theory_symdiff_mean,
)
from .voronoi import coverage_frequency, coverage_probability, exact_cells_2d, write_cells_csv

STATS_COLUMNS = ["functional", "d", "body", "lambda", "R", "mean", "variance", "std_error", "invalid_count", "seed"]
EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    dimension: int = 2
    body: str = "box:0,1;0,1"
    lambdas: tuple = (200.0,)
    replicates: int = 1000
    mc_samples: int = 100_000
    seed: int = 1
    k: int = 3
    method: str = "auto"
    out: str = "."
    points: tuple = ((1.2, 0.0),)
    groups: int = 4

    def validate(self):
        if not self.lambdas:
            raise UsageError("the intensity list is empty; pass --lambda with at least one value")
        if any(not (lam > 0) for lam in self.lambdas):
            raise UsageError("intensities must be positive")
        if self.replicates < 2:
            raise UsageError("need at least two replicates")
        if self.mc_samples < 1:
            raise UsageError("need at least one Monte Carlo sample")
        if self.dimension not in (1, 2, 3):
            raise UsageError("dimension must be 1, 2 or 3")
        if self.method not in ("auto", "mc", "exact"):
            raise UsageError(f"unknown method {self.method!r}")
        if self.method == "exact" and self.dimension > 2:
            raise UsageError("exact volumes exist only for d <= 2")
        if self.k < 2:
            raise UsageError("k must be at least 2")
        if self.groups < 1:
            raise UsageError("groups must be at least 1")

    def body_obj(self):
        try:
            return parse_body(self.body, self.dimension)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def provenance(self, command):
        fields = dataclasses.asdict(self)
        fields.pop("out")
        items = " ".join(f"{k}={json.dumps(v, separators=(',', ':'))}" for k, v in fields.items())
        return f"# pvapprox {__version__} command={command} {items}"


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _point(text):
    try:
        return _floats(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {text!r}") from None


def _lambda_list(text):
    try:
        return _floats(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad intensity list {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="pvapprox", description="Poisson-Voronoi approximation experiments")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields")
    common.add_argument("--dim", dest="dimension", type=int)
    common.add_argument("--body", help="ball:r[@c..], box:a,b;c,d or poly:x,y;...")
    common.add_argument("--lambda", dest="lambdas", type=_lambda_list, help="comma separated intensities")
    common.add_argument("--replicates", type=int)
    common.add_argument("--mc", dest="mc_samples", type=int, help="Monte Carlo samples per replicate")
    common.add_argument("--seed", type=int)
    common.add_argument("--k", type=int, help="window buffer exponent")
    common.add_argument("--method", choices=["auto", "mc", "exact"])
    common.add_argument("--out", help="output directory")
    helps = {
        "estimate": "replicate both volume functionals at each intensity",
        "scan": "variance scan over intensities with a log-log fit",
        "verify": "run the acceptance checks",
        "oracle": "coverage quadrature against Monte Carlo",
        "jeulin": "one dense realization against averaged sparse ones",
        "dump": "write one realization (and planar cells) as CSV",
    }
    cmds = {name: sub.add_parser(name, parents=[common], help=h) for name, h in helps.items()}
    cmds["verify"].add_argument("--quick", action="store_true", help="tenth of the replicates")
    cmds["verify"].add_argument("--only", type=lambda s: [int(v) for v in s.split(",")], help="criterion numbers")
    cmds["oracle"].add_argument("--point", dest="points", type=_point, action="append")
    cmds["jeulin"].add_argument("--groups", type=int, help="realizations averaged per group")
    return p


def resolve_config(args) -> ExperimentConfig:
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        names = {f.name for f in dataclasses.fields(ExperimentConfig)}
        unknown = set(base) - names
        if unknown:
            raise UsageError(f"unknown config fields: {', '.join(sorted(unknown))}")
    for name in ("dimension", "body", "lambdas", "replicates", "mc_samples", "seed", "k", "method", "out", "points", "groups"):
        v = getattr(args, name, None)
        if v is not None:
            base[name] = v
    if "lambdas" in base:
        base["lambdas"] = tuple(float(v) for v in base["lambdas"])
    if "points" in base:
        base["points"] = tuple(tuple(float(c) for c in p) for p in base["points"])
    if "dimension" in base and "body" not in base and base["dimension"] != 2:
        base["body"] = "box:" + ";".join(["0,1"] * int(base["dimension"]))
    try:
        cfg = ExperimentConfig(**base)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    cfg.validate()
    return cfg


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header_line, columns, rows):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(header_line + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None
    return path


def stats_row(name, cfg, K, lam, s):
    return [name, cfg.dimension, format_body(K), float(lam), s.n + s.invalid_count, s.mean, s.variance, s.std_error, s.invalid_count, cfg.seed]


def _estimators(cfg):
    return [Estimator(n, method=cfg.method, n_samples=cfg.mc_samples) for n in ("vol_approx", "vol_symdiff")]


def _run_grid(cfg, K):
    """Stats for both volume functionals at every intensity (seed offset by index)."""
    out = {}
    for j, lam in enumerate(cfg.lambdas):
        try:
            out[lam] = simulate(_estimators(cfg), K, lam, cfg.replicates, cfg.seed + j, k=cfg.k)
        except RuntimeError as exc:
            raise UsageError(str(exc)) from None
    return out


def cmd_estimate(cfg, K, out):
    grid = _run_grid(cfg, K)
    rows = []
    theory = []
    for lam, res in grid.items():
        for name, s in res.items():
            rows.append(stats_row(name, cfg, K, lam, s))
        b = theory_symdiff_mean(K, lam)
        ref = symdiff_mean_exact(K, lam) if cfg.dimension <= 2 else math.nan
        theory.append([float(lam), b.lower, b.upper, ref])
        s = res["vol_symdiff"]
        print(f"lambda={lam:g}  vol_approx {res['vol_approx'].mean:.6f} (SE {res['vol_approx'].std_error:.2e})  "
              f"vol_symdiff {s.mean:.6f} (SE {s.std_error:.2e})  closed-form bracket [{b.lower:.6f}, {b.upper:.6f}]  "
              f"quadrature {ref:.6f}")
    head = cfg.provenance("estimate")
    write_csv(out / "estimate.csv", head, STATS_COLUMNS, rows)
    write_csv(out / "theory.csv", head, ["lambda", "bracket_lower", "bracket_upper", "quadrature"], theory)
    return EXIT_OK


def scan_svg(fits, series, dim, title):
    """Log-log polyline chart of variance against intensity."""
    W, H, m = 640, 420, 60
    lam = [p for s in series.values() for p, _ in s]
    val = [v for s in series.values() for _, v in s]
    x0, x1 = math.log10(min(lam)), math.log10(max(lam))
    y0, y1 = math.log10(min(val)), math.log10(max(val))
    x1 = x1 if x1 > x0 else x0 + 1
    y0, y1 = (y0 - 0.2, y1 + 0.2) if y1 > y0 else (y0 - 1, y0 + 1)

    def px(l):
        return m + (math.log10(l) - x0) / (x1 - x0) * (W - 2 * m)

    def py(v):
        return H - m - (math.log10(v) - y0) / (y1 - y0) * (H - 2 * m)

    colors = {"vol_approx": "#1f77b4", "vol_symdiff": "#d62728"}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{m}" y1="{H - m}" x2="{W - m}" y2="{H - m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{H - m}" stroke="black"/>',
        f'<text x="{W / 2:.0f}" y="{H - 15}" text-anchor="middle" font-family="sans-serif" font-size="12">intensity (log)</text>',
        f'<text x="18" y="{H / 2:.0f}" transform="rotate(-90 18 {H / 2:.0f})" text-anchor="middle" font-family="sans-serif" font-size="12">variance (log)</text>',
    ]
    for l in sorted(set(lam)):
        parts.append(f'<text x="{px(l):.1f}" y="{H - m + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">{l:g}</text>')
    ref_slope = -(1 + 1 / dim)
    legend_y = m
    for name, pts in series.items():
        c = colors.get(name, "black")
        poly = " ".join(f"{px(l):.2f},{py(v):.2f}" for l, v in pts)
        parts.append(f'<polyline points="{poly}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        for l, v in pts:
            parts.append(f'<circle cx="{px(l):.2f}" cy="{py(v):.2f}" r="3" fill="{c}"/>')
        f = fits[name]
        la, lb = min(lam), max(lam)
        parts.append(
            f'<line x1="{px(la):.2f}" y1="{py(f.predict(la)):.2f}" x2="{px(lb):.2f}" y2="{py(f.predict(lb)):.2f}" '
            f'stroke="{c}" stroke-dasharray="6,3"/>'
        )
        # reference slope through the first point
        l0, v0 = pts[0]
        parts.append(
            f'<line x1="{px(l0):.2f}" y1="{py(v0):.2f}" x2="{px(lb):.2f}" y2="{py(v0 * (lb / l0) ** ref_slope):.2f}" '
            f'stroke="gray" stroke-dasharray="2,3"/>'
        )
        parts.append(
            f'<text x="{W - m - 4}" y="{legend_y + 12}" text-anchor="end" font-family="sans-serif" font-size="11" fill="{c}">'
            f"{name}: slope {f.slope:.3f}, R2 {f.r_squared:.3f}</text>"
        )
        legend_y += 16
    parts.append(
        f'<text x="{W - m - 4}" y="{legend_y + 12}" text-anchor="end" font-family="sans-serif" font-size="11" fill="gray">'
        f"reference slope {ref_slope:.3f}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_scan(cfg, K, out):
    if len(set(cfg.lambdas)) < 2:
        raise UsageError("scan needs at least two distinct intensities")
    grid = _run_grid(cfg, K)
    rows = []
    series = {"vol_approx": [], "vol_symdiff": []}
    for lam, res in grid.items():
        for name, s in res.items():
            rows.append(stats_row(name, cfg, K, lam, s))
            series[name].append((float(lam), s.variance))
    fits = {}
    fit_rows = []
    ok = True
    for name, pts in series.items():
        if any(v <= 0 for _, v in pts):
            print(f"{name}: zero variance at some intensity; no log-log fit")
            ok = False
            continue
        f = scaling_fit(pts)
        fits[name] = f
        passed = f.slope <= -1.3 and f.r_squared >= 0.9
        ok &= passed
        fit_rows.append([name, f.slope, f.intercept, f.r_squared, -(1 + 1 / cfg.dimension), passed])
        print(f"{name}: slope {f.slope:.4f}  R2 {f.r_squared:.4f}  {'ok' if passed else 'FAIL'} (need slope <= -1.3, R2 >= 0.9)")
    head = cfg.provenance("scan")
    write_csv(out / "scan.csv", head, STATS_COLUMNS, rows)
    write_csv(out / "fit.csv", head, ["functional", "slope", "intercept", "r_squared", "reference_slope", "passed"], fit_rows)
    if len(fits) == len(series):
        svg = scan_svg(fits, series, cfg.dimension, f"variance scaling, {format_body(K)}")
        try:
            (out / "scan.svg").write_text(svg)
        except OSError as exc:
            raise UsageError(f"cannot write SVG: {exc}") from None
    return EXIT_OK if ok else EXIT_FAILED


def cmd_verify(cfg, out, quick, only):
    from .acceptance import CHECKS, run_all

    numbers = only or sorted(CHECKS)
    bad = [n for n in numbers if n not in CHECKS]
    if bad:
        raise UsageError(f"unknown criteria {bad}")
    results = run_all(numbers, quick=quick, echo=lambda line: print(line, flush=True))
    rows = [[r.number, r.name, r.passed, r.detail] for r in results]
    write_csv(out / "verify.csv", cfg.provenance("verify") + f" quick={json.dumps(quick)}", ["criterion", "name", "passed", "detail"], rows)
    n_ok = sum(r.passed for r in results)
    print(f"{n_ok}/{len(results)} criteria passed")
    return EXIT_OK if n_ok == len(results) else EXIT_FAILED


def cmd_oracle(cfg, K, out):
    rows = []
    ok = True
    for j, lam in enumerate(cfg.lambdas):
        for i, x in enumerate(cfg.points):
            if len(x) != cfg.dimension:
                raise UsageError(f"point {x} does not have dimension {cfg.dimension}")
            try:
                p, tail, _ = coverage_probability(K, x, lam, tol=1e-6, full_output=True)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            freq, n = coverage_frequency(K, x, lam, cfg.replicates, cfg.seed + 1000 * j + i)
            se = math.sqrt(max(p * (1 - p), 1e-300) / max(n, 1))
            z = (freq - p) / se
            passed = abs(z) <= 4
            ok &= passed
            rows.append([";".join(repr(float(c)) for c in x), float(lam), p, tail, freq, n, z, passed])
            print(f"x={x} lambda={lam:g}: quadrature {p:.6g}  frequency {freq:.6g} ({n} valid)  z={z:+.2f}")
    write_csv(out / "oracle.csv", cfg.provenance("oracle"),
              ["point", "lambda", "quadrature", "tail_bound", "frequency", "n_valid", "z", "passed"], rows)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_jeulin(cfg, K, out):
    rows = []
    for j, lam in enumerate(cfg.lambdas):
        try:
            r = jeulin_compare(lam, cfg.groups, K, cfg.replicates, cfg.seed + j,
                               functional=Estimator("vol_approx", method=cfg.method, n_samples=cfg.mc_samples))
        except RuntimeError as exc:
            raise UsageError(str(exc)) from None
        theory = cfg.groups ** (-1 / cfg.dimension)
        rows.append([float(lam), cfg.groups, r.var_single, r.var_averaged, r.ratio, r.ratio_se, theory])
        print(f"lambda0={lam:g} groups={cfg.groups}: var single {r.var_single:.4e}  var averaged {r.var_averaged:.4e}  "
              f"ratio {r.ratio:.4f} (SE {r.ratio_se:.4f}, expected order {theory:.4f})")
    write_csv(out / "jeulin.csv", cfg.provenance("jeulin"),
              ["lambda0", "groups", "var_single", "var_averaged", "ratio", "ratio_se", "expected_ratio"], rows)
    return EXIT_OK


def cmd_dump(cfg, K, out):
    lam = cfg.lambdas[0]
    try:
        W = default_window(K, lam, cfg.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    config = sample_poisson(lam, W, cfg.seed)
    head = cfg.provenance("dump")
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "points.csv", "w", newline="") as fh:
            fh.write(head + "\n")
            write_points_csv(config, fh)
        if cfg.dimension == 2 and len(config):
            with open(out / "cells.csv", "w", newline="") as fh:
                fh.write(head + "\n")
                write_cells_csv(exact_cells_2d(config, K).cells, fh)
    except OSError as exc:
        raise UsageError(f"cannot write dump: {exc}") from None
    print(f"{len(config)} points in window {W.lo} .. {W.hi}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.quick, args.only)
        K = cfg.body_obj()
        handler = {"estimate": cmd_estimate, "scan": cmd_scan, "oracle": cmd_oracle, "jeulin": cmd_jeulin, "dump": cmd_dump}
        return handler[args.command](cfg, K, out)
    except UsageError as exc:
        print(f"pvapprox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
