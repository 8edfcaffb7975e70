"""Command-line front end.

    intmeans bound --t -1
    intmeans table --ts=-1,-0.5,1 --out report/
    intmeans plot-data --preset --out report/
    intmeans verify
    intmeans kappa --alpha 0.5 --theta 0.5
    intmeans sigma --alpha 0 --beta 0

Exit status: 2 for usage errors, 1 for failed verification, 0 otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .criteria import DEFAULT_GRID, GridSpec
from .optimizer import (CRITERIA, DEFAULT_TS, DescentConfig, build_table, descend,
                        plot_data_text, replay, table_text)
from .specfun import DEFAULT_CONTROL, DomainError, SeriesControl, K_bound, kappa, sigma

_DEFAULTS = DescentConfig()


class UsageError(Exception):
    pass


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of numbers: {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("descent")
    g.add_argument("--theta0", type=float, default=_DEFAULTS.theta0,
                   help="left end of the theta range (default %(default)s)")
    g.add_argument("--grid-n", type=int, default=DEFAULT_GRID.n,
                   help="theta grid points (default %(default)s)")
    g.add_argument("--criteria", default=",".join(_DEFAULTS.criteria_order),
                   help=f"comma list from {', '.join(CRITERIA)} (default %(default)s)")
    g.add_argument("--step", type=float, default=None,
                   help="trial decrement of beta (default: theta0)")
    g.add_argument("--bisect-tol", type=float, default=_DEFAULTS.bisect_tol,
                   help="final bisection width (default %(default)s)")
    g.add_argument("--epsilon", type=float, default=_DEFAULTS.epsilon_start,
                   help="slack on the trivial starting bound (default %(default)s)")
    g.add_argument("--no-j-variant", action="store_true",
                   help="skip the extra J-first descent in tables")
    s = p.add_argument_group("series")
    s.add_argument("--rel-tol", type=float, default=DEFAULT_CONTROL.rel_tol,
                   help="series relative tolerance (default %(default)s)")
    s.add_argument("--max-terms", type=int, default=DEFAULT_CONTROL.max_terms,
                   help="series term cap (default %(default)s)")
    o = p.add_argument_group("output")
    o.add_argument("--out", default=None, help="output file (bound) or directory (table, plot-data)")
    o.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="delimited text or structured text (default %(default)s)")
    o.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    o.add_argument("--timing", action="store_true", help="fill the runtime_ms column")


def _range(p: argparse.ArgumentParser) -> None:
    r = p.add_argument_group("t values (one required)")
    r.add_argument("--ts", type=_float_list, default=None,
                   help="comma list of t; write --ts=-1,2 when it starts with a minus")
    r.add_argument("--t-range", type=_float_list, default=None, metavar="START,STOP,STEP",
                   help="inclusive arithmetic range of t")
    r.add_argument("--preset", action="store_true", help="the standard table of t values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="intmeans",
                                     description="Certified upper bounds for the universal "
                                                 "integral means spectrum.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="certify a bound for one t or complex tau")
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--tau-re", type=float, default=None)
    p.add_argument("--tau-im", type=float, default=None)
    _common(p)

    for name, text in (("table", "bounds and certificates for a range of t"),
                       ("plot-data", "figure series for a range of t")):
        p = sub.add_parser(name, help=text)
        _range(p)
        _common(p)

    p = sub.add_parser("verify", help="run the numerical oracle suite")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("kappa", help="print kappa(alpha, theta), or K(beta, theta)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--rel-tol", type=float, default=DEFAULT_CONTROL.rel_tol)
    p.add_argument("--max-terms", type=int, default=DEFAULT_CONTROL.max_terms)

    p = sub.add_parser("sigma", help="print sigma(alpha, beta)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    return parser


def _control(args) -> SeriesControl:
    return SeriesControl(rel_tol=args.rel_tol, max_terms=args.max_terms)


def _config(args) -> DescentConfig:
    criteria = tuple(c.strip() for c in args.criteria.split(",") if c.strip())
    try:
        return DescentConfig(theta0=args.theta0, grid=GridSpec(n=args.grid_n),
                             criteria_order=criteria, step=args.step,
                             bisect_tol=args.bisect_tol, epsilon_start=args.epsilon,
                             ctl=_control(args))
    except ValueError as exc:
        raise UsageError(str(exc))


def _ts(args) -> list:
    if args.preset:
        return list(DEFAULT_TS)
    if args.ts:
        ts = args.ts
    elif args.t_range:
        if len(args.t_range) != 3 or args.t_range[2] <= 0:
            raise UsageError("--t-range needs START,STOP,STEP with STEP > 0")
        a, b, h = args.t_range
        n = int(round((b - a) / h))
        ts = [round(a + i * h, 10) for i in range(n + 1)]
    else:
        raise UsageError("give --ts, --t-range or --preset")
    if any(t == 0 for t in ts):
        raise UsageError("t = 0 is excluded: the spectrum is trivially 0 there")
    return ts


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _cmd_bound(args) -> int:
    if args.t is not None:
        if args.tau_re is not None or args.tau_im is not None:
            raise UsageError("use either --t or --tau-re/--tau-im")
        tau = complex(args.t)
    elif args.tau_re is not None or args.tau_im is not None:
        tau = complex(args.tau_re or 0.0, args.tau_im or 0.0)
    else:
        raise UsageError("bound requires --t or --tau-re/--tau-im")
    if tau == 0:
        raise UsageError("t = 0 is excluded: the spectrum is trivially 0 there")
    cfg = _config(args)
    cert = descend(tau if tau.imag else tau.real, cfg)
    if args.format == "json":
        print(cert.to_json())
    else:
        print(f"tau,beta,criterion,steps\n{tau.real:g}{tau.imag:+g}j,{cert.beta_final:.6f},"
              f"{cert.tag},{len(cert.steps)}")
    if args.out:
        _write(Path(args.out), cert.to_json() + "\n")
    return 0


def _config_line(cfg: DescentConfig) -> str:
    return "# config " + json.dumps(cfg.to_dict(), sort_keys=True)


def _cmd_table(args, plot: bool) -> int:
    from .plotting import render_figure

    cfg = _config(args)
    table = build_table(_ts(args), cfg, jobs=args.jobs, j_variant=not args.no_j_variant)
    if plot:
        text = _config_line(cfg) + "\n" + plot_data_text(table)
        name = "plot_data.txt"
    elif args.format == "json":
        text = json.dumps({"config": cfg.to_dict(),
                           "rows": [r.__dict__ | ({} if args.timing else {"runtime_ms": None})
                                    for r in table.rows]}, indent=1, sort_keys=True) + "\n"
        name = "table.json"
    else:
        text = _config_line(cfg) + "\n" + table_text(table, timing=args.timing)
        name = "table.csv"
    if args.out:
        out = Path(args.out)
        _write(out / name, text)
        render_figure(table, out / "figure1.png")
        if not plot:
            for t, cert in table.certificates.items():
                _write(out / "certificates" / f"t{t:+.6g}.json", cert.to_json() + "\n")
    else:
        sys.stdout.write(text)
    failed = [r for r in table.rows if r.flag]
    for r in failed:
        print(f"warning: t={r.t:g} {r.flag}", file=sys.stderr)
    bad = [t for t, c in table.certificates.items() if c.steps and not replay(c)]
    if bad:
        print(f"certificate replay failed for t in {bad}", file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    from .oracle import run_verification

    checks = run_verification()
    if args.format == "json":
        print(json.dumps([c.__dict__ for c in checks], indent=1))
    else:
        print("check,value,target,passed")
        for c in checks:
            print(f"{c.name},{c.value:.3e},{c.target:.3e},{'PASS' if c.passed else 'FAIL'}")
    return 0 if all(c.passed for c in checks) else 1


def _cmd_kappa(args) -> int:
    ctl = _control(args)
    if (args.alpha is None) == (args.beta is None):
        raise UsageError("give exactly one of --alpha (kappa) or --beta (K)")
    if args.alpha is not None:
        print(f"{kappa(args.alpha, args.theta, ctl):.15g}")
    else:
        print(f"{K_bound(args.beta, args.theta, ctl):.15g}")
    return 0


def _cmd_sigma(args) -> int:
    print(f"{sigma(args.alpha, args.beta):.15g}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bound":
            return _cmd_bound(args)
        if args.command in ("table", "plot-data"):
            return _cmd_table(args, plot=args.command == "plot-data")
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "kappa":
            return _cmd_kappa(args)
        return _cmd_sigma(args)
    except (UsageError, DomainError) as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
