"""Command-line entry point.

Subcommands:

    constants   evaluate limit constants, variance functions, normalizer data
    verify      run a theory-vs-empirics check plan (gaussian / stable /
                lyapunov / coupling) and write a comparison report
    simulate    export raw paths (zn, limit, tfbm3, tfsm3)

Every output file is self-describing: '# key=value' header lines carry the
experiment-defining configuration (not execution details like --threads or
--out), and feeding the file back through --config reproduces it byte for
byte.  Exit codes: 0 pass, 1 statistical fail, 2 usage error, 3 numerical
error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import DomainError, NumericalError, SizeError, UsageError
from .innovations import InnovationSpec, TailIndex, TaperLevel
from .limit_laws import (
    GaussianLimit,
    TFKernel,
    constant_C,
    hurst_exponent,
    limit_variance,
    limit_variance_prop3,
    simulate_gaussian_limit,
    simulate_tfsm3,
)
from .mc_harness import (
    CheckKind,
    ComparisonReport,
    ExperimentPlan,
    case_defaults,
    make_case_regime,
    run_coupling_check,
    run_gaussian_check,
    run_lyapunov_sweep,
    run_stable_check,
)
from .partial_sums import asymptotic_normalizer, normalizer, simulate_partial_sum_path
from .streams import make_stream

REPORT_COLUMNS = ("case_j", "n", "check", "t", "s", "theta",
                  "estimate", "stderr", "theory", "z", "pass")

# keys that define the experiment and are replayed from file headers
_CONFIG_KEYS = {
    "j", "n", "t_grid", "theta_grid", "replicas", "seed", "beta", "gamma1",
    "c", "a0", "alpha", "gamma", "b", "delta", "r", "checks", "H", "skew",
    "sigma", "step", "grid", "format", "id", "threshold",
}
_INFO_KEYS = {"taplin", "command"}


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return format(x, ".17g")
    return str(x)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip() != "")


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip() != "")


def _parse_grid(text: str) -> tuple[float, ...]:
    """Either a comma list or start:step:stop (t = 0 is dropped: the path is
    identically zero there)."""
    if ":" in text:
        start, step, stop = (float(x) for x in text.split(":"))
        if step <= 0:
            raise UsageError(f"grid step must be > 0, got {step}")
        k = int(math.floor((stop - start) / step + 1e-9))
        vals = [start + i * step for i in range(k + 1)]
        return tuple(v for v in vals if v > 0.0)
    return tuple(v for v in _parse_floats(text) if v > 0.0)


def _load_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                line = line.lstrip("# ").strip()
            if "=" not in line:
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key in _CONFIG_KEYS:
                out[key] = value.strip()
            elif key not in _INFO_KEYS:
                # lines from the data section of a report never match;
                # unknown config keys are a likely typo
                if "," not in key:
                    print(f"warning: ignoring unknown config key {key!r}",
                          file=sys.stderr)
    return out


def _write_table(out_path: str | None, header: dict, columns: tuple[str, ...],
                 rows: list[tuple], fmt: str) -> None:
    fh = open(out_path, "w", encoding="utf-8", newline="\n") if out_path else sys.stdout
    try:
        for key, value in header.items():
            fh.write(f"# {key}={value}\n")
        if fmt == "jsonl":
            for row in rows:
                rec = {col: (None if (isinstance(v, float) and math.isnan(v)) else v)
                       for col, v in zip(columns, row)}
                fh.write(json.dumps(rec) + "\n")
        else:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    finally:
        if out_path:
            fh.close()


def _report_rows(report: ComparisonReport) -> list[tuple]:
    return [
        (r.case_j, r.n, r.check, r.t, r.s, r.theta, r.estimate, r.stderr,
         r.theory, r.z, r.passed)
        for r in report.rows
    ]


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file (or a previous output file)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("TAPLIN_THREADS", "1")))


def _add_case(p: argparse.ArgumentParser) -> None:
    p.add_argument("--j", type=int, help="case index 1..12")
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma1", type=float)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--a0", type=float)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="taplin",
        description="truncated-filter linear processes with tapered "
                    "heavy-tailed innovations: constants, verification, paths",
    )
    ap.add_argument("--version", action="version", version=f"taplin {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("constants", help="limit constants and variance functions")
    _add_common(pc)
    _add_case(pc)
    pc.add_argument("--id", default=None,
                    help="comma list of constant ids (C0..C20) or 'all'")
    pc.add_argument("--t", dest="t_grid", default="1", help="t grid (comma or a:b:c)")

    pv = sub.add_parser("verify", help="theory-vs-empirics checks")
    vs = pv.add_subparsers(dest="mode", required=True)
    for mode in ("gaussian", "stable", "lyapunov", "coupling"):
        pm = vs.add_parser(mode)
        _add_common(pm)
        _add_case(pm)
        pm.add_argument("--n", default="1024,4096,16384", help="n ladder, comma list")
        pm.add_argument("--t-grid", dest="t_grid", default=None)
        pm.add_argument("--replicas", type=int, default=None)
        pm.add_argument("--seed", type=int, default=0)
        pm.add_argument("--alpha", type=float, help="Pareto tail index")
        pm.add_argument("--gamma", type=float, help="innovation taper exponent")
        pm.add_argument("--b", type=float, help="fixed innovation taper level")
        pm.add_argument("--threshold", type=float, default=3.0, help="|z| pass bound")
        if mode == "gaussian":
            pm.add_argument("--checks", default="variance,gaussian_ks")
        if mode == "stable":
            pm.add_argument("--theta-grid", dest="theta_grid",
                            default="-2,-1,-0.5,0.5,1,2")
        if mode == "lyapunov":
            pm.add_argument("--delta", type=float, default=0.5)
        if mode == "coupling":
            pm.add_argument("--r", type=float, default=1.0)

    ps = sub.add_parser("simulate", help="export raw paths")
    ss = ps.add_subparsers(dest="mode", required=True)
    for mode in ("zn", "limit", "tfbm3", "tfsm3"):
        pm = ss.add_parser(mode)
        _add_common(pm)
        pm.add_argument("--grid", default="0:0.1:1", help="t grid (comma or a:b:c)")
        pm.add_argument("--replicas", type=int, default=100)
        pm.add_argument("--seed", type=int, default=0)
        if mode in ("zn", "limit"):
            _add_case(pm)
            pm.add_argument("--alpha", type=float)
            pm.add_argument("--gamma", type=float)
            pm.add_argument("--b", type=float)
        if mode == "zn":
            pm.add_argument("--n", type=int, default=4096)
        if mode in ("tfbm3", "tfsm3"):
            pm.add_argument("--H", type=float, required=True)
            pm.add_argument("--c", type=float, default=1.0)
            pm.add_argument("--sigma", type=float, default=1.0)
            pm.add_argument("--step", type=float, default=None)
            pm.add_argument("--skew", type=float, default=-1.0)
        if mode == "tfsm3":
            pm.add_argument("--alpha", type=float, required=True)
    return ap


def _apply_config(argv: list[str], args: argparse.Namespace,
                  parser: argparse.ArgumentParser) -> argparse.Namespace:
    """Config-file values fill every option the command line left at default."""
    if not getattr(args, "config", None):
        return args
    cfg = _load_config(args.config)
    if not cfg:
        return args
    provided = {a.partition("=")[0] for a in argv if a.startswith("--")}
    overrides = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if flag not in provided:
            overrides.extend([flag, value])
    if overrides:
        args = parser.parse_args(argv + overrides)
    return args


# ---------------------------------------------------------------------------
# innovation construction
# ---------------------------------------------------------------------------


def _innovation_from(args: argparse.Namespace, n0: int) -> InnovationSpec:
    alpha = getattr(args, "alpha", None)
    gamma = getattr(args, "gamma", None)
    b = getattr(args, "b", None)
    if alpha is None:
        if gamma is not None or b is not None:
            raise UsageError("an innovation taper needs --alpha")
        return InnovationSpec.gaussian()
    tail = TailIndex(alpha)
    if gamma is None and b is None:
        return InnovationSpec.pareto(tail)
    if gamma is not None:
        taper = TaperLevel.from_exponent(n0, gamma)
    else:
        taper = TaperLevel(b=b)
    return InnovationSpec.tapered_pareto(tail, taper)


def _experiment_header(command: str, args: argparse.Namespace,
                       extra: dict | None = None) -> dict:
    header = {"taplin": __version__, "command": command}
    for key in ("j", "n", "t_grid", "theta_grid", "replicas", "seed", "beta",
                "gamma1", "c", "a0", "alpha", "gamma", "b", "delta", "r",
                "checks", "H", "skew", "sigma", "step", "grid", "id",
                "threshold", "format"):
        val = getattr(args, key, None)
        if val is not None:
            header[key] = val
    if extra:
        header.update(extra)
    return header


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

_CONSTANT_NEEDS_T = {1, 2, 4, 5, 6, 7, 8, 9, 10, 11, 13, 14, 15, 16, 17, 19, 20}


def cmd_constants(args: argparse.Namespace) -> int:
    t_grid = _parse_grid(args.t_grid)
    rows: list[tuple] = []
    if args.id:
        ids = (range(21) if args.id.strip().lower() == "all"
               else [int(x.lstrip("Cc")) for x in args.id.split(",")])
        for cid in ids:
            if cid in _CONSTANT_NEEDS_T:
                for t in t_grid:
                    rows.append((f"C{cid}", t,
                                 constant_C(cid, t=t, beta=args.beta, c=args.c)))
            else:
                rows.append((f"C{cid}", None,
                             constant_C(cid, beta=args.beta, c=args.c)))
    if args.j is not None:
        j = args.j
        defaults = case_defaults(j)
        beta = args.beta if args.beta is not None else defaults["beta"]
        gamma1 = args.gamma1 if args.gamma1 is not None else defaults["gamma1"]
        for t in t_grid:
            w = (limit_variance_prop3(j, t, args.c) if j >= 10
                 else limit_variance(j, t, beta, args.c))
            rows.append((f"W{j}", t, w))
        h = hurst_exponent(j, beta)
        if h is not None:
            rows.append((f"H{j}", None, h))
        reg = make_case_regime(j, 1024, InnovationSpec.gaussian(),
                               beta=beta, gamma1=gamma1, c=args.c, a0=args.a0)
        const, expo = asymptotic_normalizer(reg)
        rows.append((f"A2_const_{j}", None, const))
        rows.append((f"A2_exponent_{j}", None, expo))
    if not rows:
        raise UsageError("nothing to do: pass --id and/or --j")
    header = _experiment_header("constants", args)
    _write_table(args.out, header, ("id", "t", "value"), rows, args.format)
    return 0


_CHECK_ALIASES = {
    "variance": CheckKind.VARIANCE,
    "covariance": CheckKind.COVARIANCE,
    "ks": CheckKind.GAUSSIAN_KS,
    "gaussian_ks": CheckKind.GAUSSIAN_KS,
}


def cmd_verify(args: argparse.Namespace) -> int:
    if args.j is None:
        raise UsageError("verify needs --j")
    n_ladder = _parse_ints(args.n)
    n0 = n_ladder[0]
    mode = args.mode
    if mode == "stable" and args.alpha is None:
        args.alpha = 1.5
    if mode == "coupling" and (args.alpha is None or args.gamma is None):
        raise UsageError("verify coupling needs --alpha and --gamma (soft tapering)")
    inn = _innovation_from(args, n0)
    regime = make_case_regime(args.j, n0, inn, beta=args.beta,
                              gamma1=args.gamma1, c=args.c, a0=args.a0)
    t_grid = _parse_grid(args.t_grid) if args.t_grid else (
        (0.5, 1.0, 2.0) if mode == "gaussian" else (1.0,))
    replicas = args.replicas
    if replicas is None:
        replicas = {"gaussian": 2000, "stable": 4000, "coupling": 1000,
                    "lyapunov": 100}[mode]
    checks: frozenset[CheckKind]
    if mode == "gaussian":
        checks = frozenset(_CHECK_ALIASES[x.strip()] for x in args.checks.split(","))
    elif mode == "stable":
        checks = frozenset({CheckKind.STABLE_CF})
    elif mode == "lyapunov":
        checks = frozenset({CheckKind.LYAPUNOV})
    else:
        checks = frozenset({CheckKind.COUPLING})
    plan = ExperimentPlan(
        regime=regime,
        n_ladder=n_ladder,
        t_grid=t_grid,
        theta_grid=_parse_floats(args.theta_grid) if getattr(args, "theta_grid", None) else (),
        replicas=replicas,
        master_seed=args.seed,
        checks=checks,
        delta=getattr(args, "delta", 0.5),
        coupling_r=getattr(args, "r", 1.0),
        z_threshold=args.threshold,
        threads=max(1, args.threads),
    )
    if mode == "gaussian":
        report = run_gaussian_check(plan)
    elif mode == "stable":
        report = run_stable_check(plan)
    elif mode == "lyapunov":
        report = run_lyapunov_sweep(plan)
    else:
        report = run_coupling_check(plan)
    args.replicas = replicas
    args.t_grid = ",".join(_fmt(t) for t in t_grid)
    header = _experiment_header(f"verify {mode}", args)
    _write_table(args.out, header, REPORT_COLUMNS, _report_rows(report), args.format)
    return 0 if report.family_pass else 1


def cmd_simulate(args: argparse.Namespace) -> int:
    t_grid = _parse_grid(args.grid)
    if not t_grid:
        raise UsageError("the simulation grid is empty")
    mode = args.mode
    if mode == "zn":
        if args.j is None:
            raise UsageError("simulate zn needs --j")
        inn = _innovation_from(args, args.n)
        regime = make_case_regime(args.j, args.n, inn, beta=args.beta,
                                  gamma1=args.gamma1, c=args.c, a0=args.a0)
        a_n = normalizer(regime, args.n).value
        paths = np.empty((args.replicas, len(t_grid)))
        for rep in range(args.replicas):
            paths[rep] = simulate_partial_sum_path(
                regime, args.n, t_grid, make_stream(args.seed, rep)) / a_n
    elif mode == "limit":
        if args.alpha is not None:
            raise UsageError("simulate limit draws the Gaussian limit; "
                             "use tfsm3 for stable kernels")
        defaults = case_defaults(args.j)
        beta = args.beta if args.beta is not None else defaults["beta"]
        law = GaussianLimit(args.j, beta=beta, c=args.c)
        paths = simulate_gaussian_limit(law, t_grid, args.replicas, args.seed)
    else:
        alpha = 2.0 if mode == "tfbm3" else args.alpha
        kernel = TFKernel(H=args.H, alpha=alpha, c=args.c)
        paths = simulate_tfsm3(kernel, args.skew, t_grid, args.step,
                               args.replicas, args.seed, sigma=args.sigma)
    header = _experiment_header(f"simulate {mode}", args)
    rows = [
        (rep, t, float(paths[rep, k]))
        for rep in range(args.replicas)
        for k, t in enumerate(t_grid)
    ]
    _write_table(args.out, header, ("replica", "t", "value"), rows, args.format)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config(argv, args, parser)
        if args.command == "constants":
            return cmd_constants(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_simulate(args)
    except (UsageError, DomainError, SizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
