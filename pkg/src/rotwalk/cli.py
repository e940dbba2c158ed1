"""Command-line entry point for rotwalk experiments.

Subcommands: tail, joint, decorrelation, smoothed, bounds, angular,
timegap, tree, dimension, frostman, oracle.  Randomized subcommands
require an explicit --seed (no silent entropy).  A flat key=value config
file can predefine any flag; explicit flags win.  With --out, results are
written there (CSV or JSON per --format) together with a manifest
<out>.manifest.json; without --out, rows go to stdout and no manifest is
emitted.  Exit codes: 0 success, 2 configuration error, 3 numeric or
regime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__, angular, deviations, oracle, tree, walk
from .errors import (
    DegenerateCovarianceError,
    DomainError,
    ParameterError,
    RotwalkError,
)
from .increments import SeedSpec, parse_law
from .plateau import PlateauSpec

RANDOMIZED = {
    "tail", "joint", "decorrelation", "smoothed", "angular",
    "timegap", "tree", "dimension", "frostman",
}


def _dtype(precision: str):
    return np.float32 if precision == "fast" else np.float64


def _add_common(p, law=True, alpha=True, reps=False):
    p.add_argument("--seed", type=int, default=None, help="master seed (required)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--precision", choices=["fast", "strict"], default="strict")
    p.add_argument("--out", default=None, help="result file; manifest written alongside")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--config", default=None, help="flat key=value file; flags win")
    if law:
        p.add_argument("--law", default="gaussian:1.0")
    if alpha:
        p.add_argument("--alpha", type=float, required=True)
    if reps:
        p.add_argument("--reps", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rotwalk", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("tail", help="P(|S_n| > sigma phi(n)) by Monte Carlo")
    _add_common(p, reps=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("joint", help="joint exceedance at angles 0 and theta")
    _add_common(p, reps=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)

    p = sub.add_parser("decorrelation", help="|joint - product of singles| curve")
    _add_common(p, reps=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--thetas", required=True, help="comma-separated angles in (0, 1/2]")

    p = sub.add_parser("smoothed", help="mean plateau value of |S_n|/(sigma phi(n))")
    _add_common(p, reps=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("bounds", help="Bernstein / directional / Taylor calculators")
    _add_common(p, alpha=False)
    p.add_argument("--kind", choices=["bernstein", "directional", "taylor"], required=True)
    p.add_argument("--variance-sum", type=float, default=None)
    p.add_argument("--abs-bound", type=float, default=None, help="a.s. bound M")
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--d-n", type=int, default=None)
    p.add_argument("--k-n", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)

    p = sub.add_parser("angular", help="angular-window sup exceedance frequency")
    _add_common(p, reps=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--resolution", type=int, default=16)

    p = sub.add_parser("timegap", help="combined angle/time gap exceedance")
    _add_common(p, reps=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--resolution", type=int, default=16)

    p = sub.add_parser("tree", help="build one circled tree")
    _add_common(p)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--plateau-m", type=float, default=None)
    p.add_argument("--plateau-eps", type=float, default=None)
    p.add_argument("--dump", default=None, help="write the per-level marks dump here")

    p = sub.add_parser("dimension", help="log2-count slope over a forest")
    _add_common(p)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--trees", type=int, required=True)

    p = sub.add_parser("frostman", help="Frostman measure and gamma-energy")
    _add_common(p)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--levels", required=True, help="comma-separated schedule l0<l1<...")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--energy-depth", type=int, default=None)
    p.add_argument("--dump", default=None, help="write the measure CSV here")

    p = sub.add_parser("oracle", help="exact/quadrature Gaussian reference record")
    _add_common(p, law=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    return ap


def _merge_config(argv: List[str]) -> List[str]:
    """Insert config-file pairs as flags right after the subcommand so that
    explicit flags (later occurrences) win."""
    if "--config" not in argv:
        return argv
    path = argv[argv.index("--config") + 1]
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            pairs += [f"--{key.strip().replace('_', '-')}", value.strip()]
    return argv[:1] + pairs + argv[1:]


def _estimate_row(est: deviations.TailEstimate) -> Dict[str, object]:
    return {
        "estimate": est.p_hat,
        "stderr": est.stderr,
        "ci_lo": est.ci95[0],
        "ci_hi": est.ci95[1],
    }


def _run(args) -> List[Dict[str, object]]:
    sub = args.subcommand
    if sub in RANDOMIZED and args.seed is None:
        raise ParameterError(f"--seed is required for '{sub}' (no silent entropy)")
    dtype = _dtype(args.precision) if hasattr(args, "precision") else np.float64

    if sub == "tail":
        law = parse_law(args.law)
        est = deviations.mc_tail(
            law, args.n, args.alpha, args.reps, args.seed, args.threads, dtype
        )
        return [{
            "law": args.law, "n": args.n, "alpha": args.alpha, "reps": args.reps,
            **_estimate_row(est),
            "oracle": oracle.single_tail(args.n, args.alpha), "oracle_kind": "exact",
            "provenance": "mc",
        }]

    if sub == "joint":
        law = parse_law(args.law)
        est = deviations.mc_joint(
            law, args.n, args.theta, args.alpha, args.reps, args.seed, args.threads, dtype
        )
        if args.theta == 0.0:  # both events coincide; quadrature is degenerate
            ref, kind = oracle.single_tail(args.n, args.alpha), "exact"
        else:
            ref, kind = oracle.joint_tail(args.n, args.theta, args.alpha)[0], "quadrature"
        return [{
            "law": args.law, "n": args.n, "theta": args.theta, "alpha": args.alpha,
            "reps": args.reps, **_estimate_row(est),
            "oracle": ref, "oracle_kind": kind, "provenance": "mc",
        }]

    if sub == "decorrelation":
        law = parse_law(args.law)
        thetas = [float(t) for t in args.thetas.split(",") if t]
        rows = deviations.decorrelation_curve(
            law, args.n, args.alpha, thetas, args.reps, args.seed, args.threads, dtype
        )
        out = []
        for row in rows:
            ref, _ = oracle.joint_tail(args.n, row.theta, args.alpha)
            ref_diff = ref - oracle.single_tail(args.n, args.alpha) ** 2
            out.append({
                "law": args.law, "n": args.n, "theta": row.theta, "alpha": args.alpha,
                "reps": args.reps, "estimate": row.diff, "stderr": row.diff_stderr,
                "ci_lo": row.diff_ci95[0], "ci_hi": row.diff_ci95[1],
                "ratio": row.ratio, "oracle": ref_diff,
                "oracle_kind": "quadrature", "provenance": "mc",
            })
        return out

    if sub == "smoothed":
        law = parse_law(args.law)
        spec = PlateauSpec(m=args.m, eps=args.eps)
        est = deviations.mc_smoothed(
            law, args.n, spec, args.alpha, args.reps, args.seed, args.threads, dtype
        )
        ref, _ = oracle.smoothed_expectation(spec, args.n, args.alpha)
        return [{
            "law": args.law, "n": args.n, "alpha": args.alpha, "m": args.m,
            "eps": args.eps, "reps": args.reps, **_estimate_row(est),
            "oracle": ref, "oracle_kind": "quadrature", "provenance": "mc",
        }]

    if sub == "bounds":
        return [_bounds_row(args)]

    if sub == "angular":
        law = parse_law(args.law)
        window = angular.WindowSpec(
            n=args.n, eps=args.eps, eta=args.eta, beta=args.beta,
            resolution=args.resolution,
        )
        est = angular.mc_angular_exceedance(
            law, window, args.alpha, args.reps, args.seed, args.threads, dtype
        )
        k = math.floor(1.0 / args.beta) + 1
        try:
            bound = angular.taylor_tail_bound(args.n, k, args.eps, args.eta, args.alpha)
        except RotwalkError:
            bound = None
        return [{
            "law": args.law, "n": args.n, "alpha": args.alpha, "reps": args.reps,
            **_estimate_row(est.grid),
            "eps": args.eps, "eta": args.eta, "K": args.resolution,
            "corrected_sup": est.corrected.p_hat,
            "regime_violated": est.regime_violated,
            "oracle": bound, "oracle_kind": "bound", "provenance": "mc",
        }]

    if sub == "timegap":
        law = parse_law(args.law)
        est = angular.mc_time_gap_exceedance(
            law, args.q, args.level, args.eta, args.alpha, args.reps, args.seed,
            args.resolution, args.threads, dtype,
        )
        return [{
            "law": args.law, "q": args.q, "level": args.level, "alpha": args.alpha,
            "reps": args.reps, **_estimate_row(est.estimate),
            "eta": args.eta, "K": args.resolution,
            "times_sampled": est.times_sampled, "subsampled": est.subsampled,
            "oracle": None, "oracle_kind": "none", "provenance": "mc",
        }]

    if sub == "tree":
        law = parse_law(args.law)
        plateau = None
        if (args.plateau_m is None) != (args.plateau_eps is None):
            raise ParameterError("--plateau-m and --plateau-eps go together")
        if args.plateau_m is not None:
            plateau = PlateauSpec(m=args.plateau_m, eps=args.plateau_eps)
        config = tree.TreeConfig(
            q=args.q, max_depth=args.depth, alpha=args.alpha, plateau=plateau
        )
        t = tree.build_tree(law, config, SeedSpec(args.seed))
        if args.dump:
            with open(args.dump, "w") as fh:
                tree.dump_tree(t, fh)
        schedule = config.schedule()
        return [{
            "level": lv, "time": schedule.time_at(lv),
            "count": tree.count_circled(t, lv),
            "mark_sum": float(t.marks[lv].sum()),
            "provenance": "mc",
        } for lv in t.levels()]

    if sub == "dimension":
        law = parse_law(args.law)
        config = tree.TreeConfig(q=args.q, max_depth=args.depth, alpha=args.alpha)
        forest = tree.build_forest(law, config, args.seed, args.trees, args.threads)
        levels = forest[0].levels()
        counts = tree.mean_counts(forest, levels)
        slope, se = tree.dimension_slope(counts, levels)
        schedule = config.schedule()
        rows = [{
            "kind": "level", "level": lv, "time": schedule.time_at(lv),
            "estimate": c,
            "oracle": 2**lv * schedule.time_at(lv) ** (-args.alpha),
            "oracle_kind": "exact", "provenance": "mc",
        } for lv, c in zip(levels, counts)]
        rows.append({
            "kind": "slope", "level": None, "time": None, "estimate": slope,
            "stderr": se, "oracle": 1.0 - args.alpha * math.log2(args.q),
            "oracle_kind": "exact", "provenance": "mc",
        })
        return rows

    if sub == "frostman":
        law = parse_law(args.law)
        config = tree.TreeConfig(q=args.q, max_depth=args.depth, alpha=args.alpha)
        t = tree.build_tree(law, config, SeedSpec(args.seed))
        levels = [int(x) for x in args.levels.split(",") if x]
        measure = tree.build_frostman_measure(t, levels)
        if args.dump:
            with open(args.dump, "w") as fh:
                tree.dump_measure_csv(measure, fh)
        depth = args.energy_depth if args.energy_depth is not None else measure.top_level
        energy = tree.gamma_energy(measure, args.gamma, depth)
        total = float(measure.mass_at(measure.top_level).sum())
        return [{
            "law": args.law, "q": args.q, "alpha": args.alpha,
            "levels": args.levels, "gamma": args.gamma, "energy_depth": depth,
            "estimate": energy, "total_mass": total, "provenance": "mc",
        }]

    if sub == "oracle":
        d = oracle.dirichlet_kernel(args.n, args.theta)
        single = oracle.single_tail(args.n, args.alpha)
        joint, joint_err = oracle.joint_tail(args.n, args.theta, args.alpha)
        lo, hi = oracle.joint_tail_envelope(args.n, args.theta, args.alpha)
        return [{
            "n": args.n, "theta": args.theta, "alpha": args.alpha,
            "D_re": d.real, "D_im": d.imag, "single": single,
            "joint": joint, "joint_err": joint_err, "env_lo": lo, "env_hi": hi,
            "provenance": "quadrature",
        }]

    raise ParameterError(f"unknown subcommand {sub!r}")


def _bounds_row(args) -> Dict[str, object]:
    def need(*names):
        missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
        if missing:
            raise ParameterError(f"--kind {args.kind} requires --" + ", --".join(missing))

    if args.kind == "bernstein":
        need("variance-sum", "abs-bound", "t")
        value = deviations.bernstein_bound(
            deviations.BernsteinParams(args.variance_sum, args.abs_bound, args.t)
        )
        params = {"variance_sum": args.variance_sum, "M": args.abs_bound, "t": args.t}
    elif args.kind == "directional":
        need("n", "alpha", "m")
        law = parse_law(args.law)
        value = deviations.directional_bound(
            law, args.n, args.alpha, args.m, args.d_n, args.k_n
        )
        params = {"law": args.law, "n": args.n, "alpha": args.alpha, "m": args.m}
    else:
        need("n", "k", "eps", "eta", "alpha")
        value = angular.taylor_tail_bound(args.n, args.k, args.eps, args.eta, args.alpha)
        params = {"n": args.n, "k": args.k, "eps": args.eps, "eta": args.eta,
                  "alpha": args.alpha}
    return {"kind": args.kind, **params, "estimate": value,
            "oracle": None, "oracle_kind": "none", "provenance": "exact"}


def _write_rows(rows: List[Dict[str, object]], fmt: str, fh) -> None:
    if fmt == "json":
        json.dump(rows, fh, indent=2, default=str)
        fh.write("\n")
        return
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    w = csv.DictWriter(fh, fieldnames=columns)
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if v is None else repr(float(v)) if isinstance(v, float) else v)
                    for k, v in row.items()})


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _merge_config(argv)
    except OSError as exc:
        print(f"rotwalk: cannot read config: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        rows = _run(args)
    except DegenerateCovarianceError as exc:
        print(f"rotwalk: numeric/regime error: {exc}", file=sys.stderr)
        return 3
    except (ParameterError, DomainError) as exc:
        print(f"rotwalk: configuration error: {exc}", file=sys.stderr)
        return 2
    except RotwalkError as exc:
        print(f"rotwalk: numeric/regime error: {exc}", file=sys.stderr)
        return 3
    runtime = time.perf_counter() - started

    buf = io.StringIO()
    _write_rows(rows, args.format, buf)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
        manifest = {
            "subcommand": args.subcommand,
            "flags": {k: v for k, v in vars(args).items() if k != "subcommand"},
            "seed": getattr(args, "seed", None),
            "version": __version__,
            "runtime_s": runtime,
        }
        with open(args.out + ".manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, default=str)
    else:
        sys.stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
