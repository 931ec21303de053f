"""Command line front end.

Every artifact carries the run configuration that produced it; passing a
previous JSON output to ``--replay`` runs the same command again.

Exit codes: 1 invalid configuration, 2 computation failure, 3 a self-check
on the results failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .arith import WorkingRangeError
from .bounds import sandwich, upper_bound_collapsed
from .density import CSV_COLUMNS, one_level_density
from .family import (
    CacheCorruptError,
    CacheFingerprintError,
    FamilyConfigError,
    FamilySpec,
    build_trace_cache,
    load_conductor_overrides,
    load_trace_cache,
    save_trace_cache,
    sieve_family,
)
from .optimize import OptimizeOptions, maximize_c, objective, scan_candidates
from .quadrature import QuadratureError
from .rmtsim import EnsembleConfig, run_ensemble
from .testfunc import TestFunctionH, build_phi, fejer

logger = logging.getLogger("zerowindow")

EXIT_CONFIG, EXIT_COMPUTE, EXIT_SELFCHECK = 1, 2, 3


class SelfCheckError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors, so they exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    params: dict
    out: str = "."
    seed: int = 0
    workers: int = 1
    format: str = "both"
    version: str = __version__

    def to_json_dict(self) -> dict:
        return asdict(self)


def _fmt(x) -> str:
    return f"{x:.12g}" if isinstance(x, float) else str(x)


@dataclass
class Emitter:
    cfg: RunConfig
    written: list[str] = field(default_factory=list)

    @property
    def out(self) -> Path:
        p = Path(self.cfg.out)
        p.mkdir(parents=True, exist_ok=True)
        return p

    def json(self, name: str, result: dict) -> None:
        if self.cfg.format not in ("json", "both"):
            return
        path = self.out / f"{name}.json"
        doc = {"version": __version__, "config": self.cfg.to_json_dict(), "result": result}
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        self.written.append(str(path))

    def csv(self, name: str, header, rows) -> None:
        if self.cfg.format not in ("csv", "both"):
            return
        path = self.out / f"{name}.csv"
        buf = io.StringIO()
        buf.write(f"# zerowindow {__version__} config={json.dumps(self.cfg.to_json_dict(), sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        path.write_text(buf.getvalue())
        self.written.append(str(path))


# -- commands ----------------------------------------------------------------


def _test_function(params: dict):
    if params.get("testfunc"):
        with open(params["testfunc"]) as fh:
            d = json.load(fh)
        if d.get("kind") == "fejer":
            return fejer(float(d["sigma"]))
        return build_phi(TestFunctionH.from_json_dict(d), float(d["sigma"]), float(d["tau"]))
    return fejer(params["sigma"])


def dyadic_ladder(R: int, smallest: int) -> list[int]:
    """R, R/2, R/4, ... down to ``smallest``, ascending; just R when smallest <= 0."""
    if smallest <= 0:
        return [R]
    rungs = []
    while R >= smallest:
        rungs.append(R)
        R //= 2
    return sorted(rungs)


def cmd_density(cfg: RunConfig, emit: Emitter) -> int:
    p = cfg.params
    spec = FamilySpec.load(p["family"])
    overrides = load_conductor_overrides(p["overrides"]) if p.get("overrides") else None
    cache = load_trace_cache(p["cache"], spec) if p.get("cache") else None
    phi = _test_function(p)
    reports = []
    for R in dyadic_ladder(p["R"], p["ladder_min"]):
        rep = one_level_density(spec, R, phi, p["normalization"], model_a=p.get("a"), model_b=p["b"],
                                workers=cfg.workers, cache=cache, overrides=overrides, kappa=p["kappa"])
        if abs(rep.recompose() - rep.value) > 1e-12 * max(1.0, abs(rep.value)):
            raise SelfCheckError("density report does not recompose from its terms")
        reports.append(rep)
    final = reports[-1]
    print(f"R={final.R} {final.normalization}: value={final.value:.12g} "
          f"prediction={final.prediction:.12g} |value-prediction|={abs(final.discrepancy):.12g} "
          f"error_budget={final.terms['error_budget']:.12g}")
    emit.json("density", {"report": final.to_json_dict(), "ladder": [r.to_json_dict() for r in reports]})
    emit.csv("density_convergence", CSV_COLUMNS, [(r.R, r.value, r.prediction, r.discrepancy) for r in reports])
    return 0


def cmd_optimize(cfg: RunConfig, emit: Emitter) -> int:
    p = cfg.params
    opts = OptimizeOptions(starts=p["starts"], tolerance=p["tolerance"], max_iter=p["max_iter"],
                           workers=cfg.workers)
    rep = maximize_c(p["n"], opts)
    if abs(float(objective(rep.n, rep.coefficients)) - rep.objective_value) > 1e-12:
        raise SelfCheckError("optimum does not reproduce its objective value")
    rows = [(name, c) for name, _, c in scan_candidates(rep if p["n"] == 2 else None)]
    width = max(len(n) for n, _ in rows)
    print(f"n={rep.n}  coefficients (a2, a4, ...) = {', '.join(_fmt(c) for c in rep.coefficients) or '-'}")
    print(f"C(h_n) = {rep.c_value:.12g}   C^2 = {rep.objective_value:.12g}   2/pi = {2 / math.pi:.12g}")
    print("candidate profiles:")
    for name, c in rows:
        print(f"  {name:<{width}}  {c:.12g}")
    emit.json("optimize", {"optimum": rep.to_json_dict(), "candidates": [{"h": n, "C": c} for n, c in rows]})
    emit.csv("candidates", ("h", "C"), rows)
    return 0


PROFILES = {
    "optimal": None,
    "quadratic": TestFunctionH.polynomial([1]),
    "quartic": TestFunctionH.polynomial([1, -1]),
    "bump": TestFunctionH.bump(1),
}


def cmd_bounds(cfg: RunConfig, emit: Emitter) -> int:
    p = cfg.params
    h = PROFILES[p["profile"]] or maximize_c(2).profile()
    rep = sandwich(p["r"], p["sigma"], h, model_b=p["b"], model_a=p.get("a"), tau=p.get("tau"))
    psi = fejer(p["sigma"])
    if abs(upper_bound_collapsed(rep.model_a, rep.model_b, psi, rep.tau) - rep.upper) > 1e-12 * rep.upper:
        raise SelfCheckError("upper bound routes disagree")
    print(rep.table())
    emit.json("bounds", rep.to_json_dict())
    emit.csv("bounds", ("r", "sigma", "tau", "tau_bsd", "lower", "rmt", "upper", "sandwich_ok"),
             [(rep.r, rep.sigma, rep.tau, rep.tau_bsd, rep.lower, rep.rmt, rep.upper, rep.sandwich_ok)])
    return 0 if rep.sandwich_ok else EXIT_SELFCHECK


def cmd_simulate(cfg: RunConfig, emit: Emitter) -> int:
    p = cfg.params
    ens = EnsembleConfig(N=p["N"], parity=p["parity"], r=p["r"], samples=p["samples"], seed=cfg.seed, tau=p["tau"])
    stats = run_ensemble(ens, workers=cfg.workers)
    if min(stats.counts) < ens.r:
        raise SelfCheckError("a sample counted fewer eigenangles than the forced rank")
    pred = "n/a" if stats.prediction is None else f"{stats.prediction:.12g}"
    print(f"mean={stats.mean:.12g} stderr={stats.stderr:.12g} prediction={pred} samples={stats.samples}")
    emit.json("simulate", stats.to_json_dict())
    total = stats.samples
    emit.csv("histogram", ("count", "frequency"), [(k, v / total) for k, v in sorted(stats.histogram.items())])
    if p.get("per_sample"):
        emit.csv("counts", ("sample", "count"), list(enumerate(stats.counts)))
    return 0


def cmd_sieve(cfg: RunConfig, emit: Emitter) -> int:
    p = cfg.params
    spec = FamilySpec.load(p["family"])
    fam = sieve_family(spec, p["R"], cfg.workers)
    print(f"R={fam.R} members={len(fam)} density={fam.density:.12g} "
          f"exponents={fam.exponents} singular={len(fam.singular)}")
    emit.json("sieve", {"R": fam.R, "members": list(fam.members), "density": fam.density,
                        "exponents": {str(k): v for k, v in fam.exponents.items()},
                        "singular": list(fam.singular), "conductor_poly": [str(c) for c in spec.conductor_poly]})
    emit.csv("sieve_members", ("t",), [(t,) for t in fam.members])
    return 0


def cmd_cache(cfg: RunConfig, emit: Emitter) -> int:
    p = cfg.params
    spec = FamilySpec.load(p["family"])
    path = Path(p["path"])
    if p["action"] == "build":
        cache = build_trace_cache(spec, p["R"], p["prime_limit"], cfg.workers)
        save_trace_cache(cache, path)
    cache = load_trace_cache(path, spec)
    print(f"{path}: R={cache.R} prime_limit={cache.prime_limit} members={len(cache.members)} "
          f"primes={len(cache.primes)}")
    emit.json("cache", {"path": str(path), "R": cache.R, "prime_limit": cache.prime_limit,
                        "members": len(cache.members), "primes": len(cache.primes),
                        "fingerprint": cache.fingerprint.hex()})
    return 0


COMMANDS = {
    "density": cmd_density,
    "optimize": cmd_optimize,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "sieve": cmd_sieve,
    "cache": cmd_cache,
}

# arguments that are not part of a command's params
_GLOBAL = ("command", "workers", "seed", "out", "format", "replay", "verbose")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("json", "csv", "both"), default="both")
    common.add_argument("--replay", help="rerun the configuration embedded in a previous JSON output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="zerowindow", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter,
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    d = sub.add_parser("density", parents=[common],
                       help="averaged explicit formula over a family",
                       description="CSV density_convergence.csv columns: R, value, prediction, discrepancy "
                                   "(one row per R of the dyadic ladder R, R/2, ... >= --ladder-min).")
    d.add_argument("--family", required=True, help="family JSON {A, B, r, c, t0, B_square}")
    d.add_argument("--R", type=int, required=True)
    d.add_argument("--sigma", type=float, default=0.3, help="support of the Fejer test function")
    d.add_argument("--testfunc", help="JSON test-function descriptor instead of Fejer")
    d.add_argument("--normalization", choices=("local", "global"), default="global")
    d.add_argument("--a", type=float, help="model coefficient of phi(0) (default r + 1/2)")
    d.add_argument("--b", type=float, default=1.0, help="model coefficient of phihat(0)")
    d.add_argument("--kappa", type=float, default=1.0, help="constant of the reported error budget")
    d.add_argument("--ladder-min", type=int, default=0, help="smallest R of the dyadic ladder (default: R only)")
    d.add_argument("--overrides", help="CSV t,conductor of exact conductors")
    d.add_argument("--cache", help="trace cache file to reuse")

    o = sub.add_parser("optimize", parents=[common], help="maximize C(h) over h_n",
                       description="CSV candidates.csv columns: h, C.")
    o.add_argument("--n", type=int, default=2)
    o.add_argument("--starts", type=int, default=25)
    o.add_argument("--tolerance", type=float, default=1e-9)
    o.add_argument("--max-iter", type=int, default=400)

    b = sub.add_parser("bounds", parents=[common], help="lower/upper bounds and the RMT prediction",
                       description="CSV bounds.csv columns: r, sigma, tau, tau_bsd, lower, rmt, upper, sandwich_ok.")
    b.add_argument("--r", type=int, default=0)
    b.add_argument("--sigma", type=float, required=True)
    b.add_argument("--tau", type=float, help="window for the upper bound and prediction (default 1/(2 sigma))")
    b.add_argument("--profile", choices=sorted(PROFILES), default="optimal")
    b.add_argument("--a", type=float)
    b.add_argument("--b", type=float, default=1.0)

    s = sub.add_parser("simulate", parents=[common], help="window counts of random orthogonal matrices",
                       description="CSV histogram.csv columns: count, frequency; counts.csv: sample, count.")
    s.add_argument("--N", type=int, default=60)
    s.add_argument("--parity", choices=("even", "odd", "mixed"), default="mixed")
    s.add_argument("--r", type=int, default=0)
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--samples", type=int, default=20000)
    s.add_argument("--per-sample", action="store_true", help="also write per-sample counts")

    v = sub.add_parser("sieve", parents=[common], help="square-free sieve of a family",
                       description="CSV sieve_members.csv columns: t.")
    v.add_argument("--family", required=True)
    v.add_argument("--R", type=int, required=True)

    c = sub.add_parser("cache", parents=[common], help="build or verify a trace cache")
    c.add_argument("action", choices=("build", "verify"))
    c.add_argument("--family", required=True)
    c.add_argument("--path", required=True)
    c.add_argument("--R", type=int)
    c.add_argument("--prime-limit", type=int, default=500)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.replay:
        with open(args.replay) as fh:
            doc = json.load(fh)
        raw = doc.get("config", doc)
        cfg = RunConfig(raw["command"], raw["params"], raw.get("out", "."), raw.get("seed", 0),
                        raw.get("workers", 1), raw.get("format", "both"))
        # an explicit --out or --workers on the replay command line wins
        if args.out != ".":
            cfg.out = args.out
        if args.workers != 1:
            cfg.workers = args.workers
        return cfg
    params = {k: v for k, v in vars(args).items() if k not in _GLOBAL}
    return RunConfig(args.command, params, args.out, args.seed, args.workers, args.format)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if not args.command and not args.replay:
        parser.print_help()
        return EXIT_CONFIG
    try:
        cfg = config_from_args(args)
        if cfg.command == "cache" and cfg.params.get("action") == "build" and not cfg.params.get("R"):
            raise FamilyConfigError("cache build needs --R")
        if cfg.workers < 1:
            raise FamilyConfigError("--workers must be >= 1")
        emit = Emitter(cfg)
        code = COMMANDS[cfg.command](cfg, emit)
    except SelfCheckError as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return EXIT_SELFCHECK
    except (FamilyConfigError, CacheCorruptError, CacheFingerprintError, FileNotFoundError,
            KeyError, json.JSONDecodeError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, WorkingRangeError, ArithmeticError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in emit.written:
        logger.info("wrote %s", path)
    return code


if __name__ == "__main__":
    sys.exit(main())
