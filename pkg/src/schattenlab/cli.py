"""Batch command-line front end.

Every subcommand writes ``<out>/<subcommand>.json`` and/or ``.csv`` and prints
the JSON report to stdout.  Configuration is flat ``key = value`` text (see
``reporting.parse_config``); ``--set key=value`` overrides single keys.
Errors print a JSON object to stderr and exit with status 2.
"""

import argparse
import itertools
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .eigenfunctions import HIGHEST_WEIGHT, ZONAL, sogge_norm_table, sogge_saturation_fit
from .errors import ConfigurationError, LabError
from .geometry import ManifoldModel, counting_table, spectral_levels, weyl_fit
from .nuclearity import lidskii_compare, nuclear_trace
from .operators import DEFAULT_GUARD, assemble, kernel_diagonal_integral, matrix_trace
from .order_calculus import OrderParameters, all_thresholds, sogge_exponent
from .reporting import csv_text, dumps, load_config, parse_operator, spec_to_text, write_matrix, write_text
from .spectral_analysis import (
    default_cutoffs, eigenvalues, membership_crosscheck, schatten_report, singular_values,
)

SUBCOMMANDS = ("spectrum", "weyl", "sogge", "thresholds", "operator", "schatten", "trace", "lidskii")
FORMATS = ("csv", "json", "both")


def parse_manifold(text):
    t = text.strip().lower().replace(" ", "")
    if t in ("sphere", "sphere2", "s2"):
        return ManifoldModel.sphere()
    for prefix in ("torus:", "torus(", "t"):
        if t.startswith(prefix):
            digits = t[len(prefix):].rstrip(")")
            try:
                return ManifoldModel.torus(int(digits))
            except ValueError:
                break
    raise ConfigurationError(f"manifold must be torus:<n> or sphere (got {text!r})")


def _floats(text):
    out = []
    for tok in str(text).replace(";", ",").split(","):
        tok = tok.strip()
        if tok:
            try:
                out.append(math.inf if tok.lower() in ("inf", "infinity") else float(tok))
            except ValueError as exc:
                raise ConfigurationError(f"not a number: {tok!r}") from exc
    if not out:
        raise ConfigurationError(f"empty value list {text!r}")
    return out


@dataclass
class RunConfig:
    """Validated settings for one run."""

    manifold: ManifoldModel
    values: dict = field(default_factory=dict)
    out: Path = Path(".")
    fmt: str = "both"

    @classmethod
    def from_mapping(cls, mapping, out=".", fmt="both"):
        values = dict(mapping)
        manifold = parse_manifold(values.pop("manifold", "torus:1"))
        if fmt not in FORMATS:
            raise ConfigurationError(f"format must be one of {FORMATS}")
        return cls(manifold, values, Path(out), fmt)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def number(self, key, default):
        v = self.values.get(key)
        if v is None:
            if default is None:
                raise ConfigurationError(f"missing required key {key!r}")
            return float(default)
        vals = _floats(v)
        if len(vals) != 1:
            raise ConfigurationError(f"{key} must be a single number")
        return vals[0]

    def grid(self, key, default):
        v = self.values.get(key)
        return list(default) if v is None else _floats(v)

    def operator(self):
        text = self.values.get("operator.factors")
        if text is None:
            raise ConfigurationError("missing required key 'operator.factors'")
        if not self.manifold.is_torus:
            raise ConfigurationError("operators are only assembled on tori")
        return parse_operator(text, self.manifold.dimension)

    def cutoff(self):
        return self.number("cutoff.lambda", 64)

    def guard(self):
        return self.number("cutoff.guard", DEFAULT_GUARD)


# -- subcommands -----------------------------------------------------------------
# Each returns (report, header, rows).


def cmd_spectrum(cfg):
    lam = cfg.number("spectrum.lambda_max", 3)
    levels = spectral_levels(cfg.manifold, lam, with_modes=cfg.manifold.dimension < 3 or lam <= 30)
    recs = [{"index": lv.index, "eigenvalue": lv.eigenvalue, "multiplicity": lv.multiplicity,
             "modes": [list(m) for m in lv.modes]}
            for lv in levels]
    report = {"manifold": cfg.manifold.to_dict(), "lambda_max": lam, "levels": recs}
    rows = [(lv.index, lv.eigenvalue, lv.multiplicity) for lv in levels]
    return report, ("index", "eigenvalue", "multiplicity"), rows


def cmd_weyl(cfg):
    lo = cfg.number("weyl.lambda_min", 20)
    hi = cfg.number("weyl.lambda_max", 200)
    pts = int(cfg.number("weyl.points", 40))
    grid = np.geomspace(lo, hi, pts)
    fit = weyl_fit(cfg.manifold, grid)
    counts = counting_table(cfg.manifold, grid)
    pred = fit.predict(grid)
    report = {"manifold": cfg.manifold.to_dict(), "fit": fit.to_dict(),
              "points": [{"lambda": float(l), "count": int(c)} for l, c in zip(grid, counts)]}
    rows = [(float(l), int(c), float(p)) for l, c, p in zip(grid, counts, pred)]
    return report, ("lambda", "count", "fit"), rows


def cmd_sogge(cfg):
    if cfg.manifold.is_torus:
        from .errors import UnsupportedError

        raise UnsupportedError("torus eigenfunctions are flat; Sogge saturation is undefined there")
    fam = cfg.get("sogge.family", "both")
    families = [ZONAL, HIGHEST_WEIGHT] if fam == "both" else [fam]
    ps = cfg.grid("sogge.p", [4.0, math.inf])
    lo = int(cfg.number("sogge.ell_min", 8))
    hi = int(cfg.number("sogge.ell_max", 200))
    fits, rows = [], []
    for family, p in itertools.product(families, ps):
        fit = sogge_saturation_fit(family, p, (lo, hi), cfg.manifold)
        fits.append({"family": family, "p": p, "phi": sogge_exponent(2, p), "fit": fit.to_dict()})
        for ell, lam, pp, norm in sogge_norm_table(family, p, range(lo, hi + 1)):
            rows.append((family, pp, ell, lam, norm))
    report = {"manifold": cfg.manifold.to_dict(), "ell_range": [lo, hi], "fits": fits}
    return report, ("family", "p", "ell", "lambda", "norm"), rows


def cmd_thresholds(cfg):
    n = int(cfg.number("params.n", cfg.manifold.dimension))
    axes = {
        "k": cfg.grid("params.k", [0]),
        "rho": cfg.grid("params.rho", [1.0]),
        "p": cfg.grid("params.p", [2.0]),
        "kappa": cfg.grid("params.kappa", [0.0]),
        "r": cfg.grid("params.r", [1.0]),
    }
    p1s = cfg.grid("params.p1", [math.nan])
    qs = cfg.grid("params.q", [math.nan])
    entries, rows = [], []
    for k, rho, p, kappa, r, p1, q in itertools.product(*axes.values(), p1s, qs):
        params = OrderParameters(n=n, k=int(k), rho=rho, p=p, kappa=kappa, r=r)
        th = all_thresholds(params, None if math.isnan(p1) else p1, None if math.isnan(q) else q)
        entries.append({"params": params.to_dict(), "p1": None if math.isnan(p1) else p1,
                        "q": None if math.isnan(q) else q, "thresholds": th})
        rows.append((n, int(k), rho, p, kappa, r, th["composite_order"],
                     th["schatten"]["value"], th["schatten"]["sharp"], th["dist1"]["value"]))
    header = ("n", "k", "rho", "p", "kappa", "r", "composite_order", "schatten",
              "schatten_sharp", "dist1")
    return {"entries": entries}, header, rows


def cmd_operator(cfg):
    spec = cfg.operator()
    op = assemble(spec, cfg.cutoff(), cfg.guard())
    svs = singular_values(op)
    eigs = eigenvalues(op)
    cfg.out.mkdir(parents=True, exist_ok=True)
    bin_path, _ = write_matrix(cfg.out / "operator_matrix", op, spec)
    report = {"operator": spec_to_text(spec), "nominal_order": spec.nominal_order,
              "cutoff": op.cutoff, "side": op.side, "trace": matrix_trace(op),
              "matrix_file": bin_path.name}
    rows = [(j, float(s), float(e.real), float(e.imag))
            for j, (s, e) in enumerate(zip(svs.values, eigs.values))]
    return report, ("index", "singular_value", "eig_re", "eig_im"), rows


def cmd_schatten(cfg):
    spec = cfg.operator()
    lam1, lam2 = default_cutoffs(spec.dimension)
    lam1 = cfg.number("cutoff.lambda", lam1)
    lam2 = cfg.number("cutoff.lambda2", max(lam2, 1.5 * lam1))
    recs, rows = [], []
    for r in cfg.grid("schatten.r", [1.0]):
        rep = schatten_report(spec, r, lam1, lam2, cfg.guard())
        cc = membership_crosscheck(spec, r, (lam1, lam2), cfg.guard())
        recs.append({"report": rep.to_dict(), "crosscheck": cc.to_dict()})
        rows.append((r, rep.partial_sum, rep.tail_estimate, rep.total, rep.verdict,
                     rep.fit.exponent, cc.consistent))
    report = {"operator": spec_to_text(spec), "nominal_order": spec.nominal_order, "runs": recs}
    return report, ("r", "partial_sum", "tail_estimate", "total", "verdict",
                    "fit_exponent", "consistent"), rows


def cmd_trace(cfg):
    spec = cfg.operator()
    budget = int(cfg.number("trace.budget", 2000))
    kd = kernel_diagonal_integral(spec, budget)
    nt = nuclear_trace(spec, budget)
    mt = matrix_trace(assemble(spec, cfg.cutoff(), cfg.guard()))
    report = {"operator": spec_to_text(spec), "kernel_diagonal": kd.to_dict(),
              "nuclear_trace": nt.to_dict(), "matrix_trace": mt, "cutoff": cfg.cutoff()}
    rows = [("kernel_diagonal", kd.value.real, kd.value.imag, kd.tail_bound),
            ("nuclear_trace", nt.value.real, nt.value.imag, nt.tail_bound),
            ("matrix_trace", mt.real, mt.imag, math.inf)]
    return report, ("route", "re", "im", "tail_bound"), rows


def cmd_lidskii(cfg):
    spec = cfg.operator()
    lam2 = cfg.get("cutoff.lambda2")
    rep = lidskii_compare(
        spec, cfg.number("lidskii.p", 2.0), cfg.cutoff(),
        lam2=None if lam2 is None else float(lam2),
        k=int(cfg.number("lidskii.k", 0)), rho=cfg.number("lidskii.rho", 1.0),
        budget=int(cfg.number("trace.budget", 2000)), guard=cfg.guard(),
    )
    d = rep.to_dict()
    d["operator"] = spec_to_text(spec)
    rows = [(rep.cutoff, rep.nuclear_trace.real, rep.nuclear_trace.imag, rep.eigen_sum.real,
             rep.eigen_sum.imag, rep.diff, rep.tolerance, rep.passed)]
    return d, ("cutoff", "nuclear_re", "nuclear_im", "eigsum_re", "eigsum_im", "diff",
               "tolerance", "passed"), rows


COMMANDS = {
    "spectrum": cmd_spectrum, "weyl": cmd_weyl, "sogge": cmd_sogge,
    "thresholds": cmd_thresholds, "operator": cmd_operator, "schatten": cmd_schatten,
    "trace": cmd_trace, "lidskii": cmd_lidskii,
}


def run(subcommand, cfg):
    """Execute one subcommand and write its report files; returns the JSON text."""
    if subcommand not in COMMANDS:
        raise ConfigurationError(f"unknown subcommand {subcommand!r}")
    report, header, rows = COMMANDS[subcommand](cfg)
    text = dumps(report)
    cfg.out.mkdir(parents=True, exist_ok=True)
    if cfg.fmt in ("json", "both"):
        write_text(cfg.out / f"{subcommand}.json", text)
    if cfg.fmt in ("csv", "both"):
        write_text(cfg.out / f"{subcommand}.csv", csv_text(header, rows))
    return text


def build_parser():
    parser = argparse.ArgumentParser(prog="schattenlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", default="both", choices=FORMATS)
    parser.add_argument("--threads", type=int, default=None, help="BLAS/LAPACK thread limit")
    parser.add_argument("--seed", type=int, default=None,
                        help="accepted for interface stability; runs are deterministic")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        mapping = load_config(args.config) if args.config else {}
        for item in args.set:
            if "=" not in item:
                raise ConfigurationError(f"--set expects KEY=VALUE (got {item!r})")
            k, v = item.split("=", 1)
            mapping[k.strip()] = v.strip()
        cfg = RunConfig.from_mapping(mapping, args.out, args.format)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigurationError("--threads must be >= 1")
            with threadpool_limits(limits=args.threads):
                text = run(args.subcommand, cfg)
        else:
            text = run(args.subcommand, cfg)
    except LabError as exc:
        sys.stderr.write(dumps({"error": exc.to_dict(), "subcommand": args.subcommand}))
        return 2
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
