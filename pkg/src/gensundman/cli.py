"""gensundman command line.

Exit status: 0 linearizable / success, 1 not linearizable / check failed,
2 indeterminate, 3 usage or configuration error, 4 input that does not
parse, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional

from . import __version__
from .config import Config, ConfigError, load_config
from .invariants import Verdict, check_dms, check_lie, check_sundman, derived_invariants
from .numverify import (
    GVanishes,
    InversionFailure,
    NoBracket,
    SingularEncounter,
    StepUnderflow,
    anchor_time,
    integrate_ode,
    residual_linear,
    sundman_map_trajectory,
    transport_solution,
)
from .parser import ExprSyntaxError, OdeFormError, format_expr, parse_expr, parse_ode
from .sundman import (
    NonConstantTarget,
    Provenance,
    SundmanTransform,
    find_transform,
    linear_general_solution,
    verify_candidate,
)

EXIT_OK, EXIT_NO, EXIT_UNDECIDED, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3, 4, 5

_VERDICT_EXIT = {
    Verdict.LINEARIZABLE: EXIT_OK,
    Verdict.NOT_LINEARIZABLE: EXIT_NO,
    Verdict.INDETERMINATE: EXIT_UNDECIDED,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with "indeterminate"
    def error(self, message):
        raise UsageError(message)


def _floats(text: str, n: int, what: str) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {n} comma-separated numbers") from None
    if len(vals) != n:
        raise UsageError(f"{what}: expected {n} comma-separated numbers")
    return vals


def _params(items: Optional[List[str]]) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gensundman", description="Linearization of y'' + l2*y'^2 + l1*y' + l0 = 0 by generalized Sundman transformations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", dest="top_config", help="config file for --print-config")
    p.add_argument("--print-config", dest="top_print", action="store_true", help="print the effective configuration and exit")
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--ode", help="ODE text, e.g. \"y'' + (1/y)*y'^2 + y*y' + 1/2 = 0\"")
    src.add_argument("--file", help="file holding the ODE text")
    common.add_argument("--param", action="append", metavar="NAME=VALUE", help="numeric parameter substituted before parsing")
    common.add_argument("--format", choices=("human", "json"), help="output format (default human)")
    common.add_argument("--config", help=f"key = value config file (default: ${'{'}SUNDMAN_CONFIG{'}'})")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--h", type=float, help="integration step")
    common.add_argument("--print-config", action="store_true", help="print the effective configuration and exit")

    cand = _Parser(add_help=False)
    cand.add_argument("--candidate-F", dest="candidate_F", help="user-supplied F(x, y)")
    cand.add_argument("--candidate-G", dest="candidate_G", help="user-supplied G(x, y)")

    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("parse", parents=[common], help="print the normalized coefficients")
    sub.add_parser("invariants", parents=[common], help="print lambda3..lambda6")
    sub.add_parser("check", parents=[common], help="generalized Sundman test (F_x = 0)")
    sub.add_parser("dms-check", parents=[common], help="Sundman test onto u'' = 0")
    sub.add_parser("lie-check", parents=[common], help="point-transformation test")
    sub.add_parser("transform", parents=[common, cand], help="derive or verify (F, G) and the linear target")
    v = sub.add_parser("verify", parents=[common, cand], help="numeric round trip from initial data")
    v.add_argument("--init", required=True, metavar="X0,Y0,YP0")
    v.add_argument("--to", type=float, help="end of the x interval (default x0 + span)")
    v.add_argument("--tol", type=float, default=1e-6)
    v.add_argument("--csv", help="write the mapped trajectory here")
    s = sub.add_parser("solve", parents=[common, cand], help="general linear solution carried back to y(x)")
    s.add_argument("--c1", type=float, default=0.0)
    s.add_argument("--c2", type=float, default=0.0)
    s.add_argument("--x0", type=float, required=True)
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--y0", type=float, help="value y(x0); the anchor t0 is solved for")
    grp.add_argument("--t0", type=float, help="anchor t at x0")
    s.add_argument("--y-start", type=float, dest="y_start", help="initial guess for inverting F when --t0 is used")
    s.add_argument("--to", type=float, help="end of the x interval (default x0 + span)")
    s.add_argument("--csv", help="write the y(x) table here")
    return p


# ---------------------------------------------------------------- output


class _Out:
    def __init__(self, fmt: str, stdout, stderr):
        self.fmt = fmt
        self.stdout = stdout
        self.stderr = stderr

    def emit(self, payload: dict, human: str):
        if self.fmt == "json":
            self.stdout.write(json.dumps(payload) + "\n")
        else:
            self.stdout.write(human.rstrip("\n") + "\n")

    def error(self, kind: str, message: str, code: int) -> int:
        if self.fmt == "json":
            self.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
        else:
            self.stderr.write(f"error ({kind}): {message}\n")
        return code


def _human_report(r) -> str:
    head = f"{r.criterion}: {r.verdict.value}"
    lines = [head + (f", case {r.case}" if r.case else "")]
    for name, v in r.classification.items():
        lines.append(f"  {name}: {v.tag.value}")
    for c in r.conditions:
        tail = ""
        if c.verdict.witness is not None:
            w = ", ".join(f"{k}={v:.6g}" for k, v in c.verdict.witness.items())
            tail = f" (witness {w}; value {c.verdict.value:.6g})"
        lines.append(f"  [{c.verdict.tag.value}] {c.id}: {c.description}{tail}")
    for n in r.notes:
        lines.append(f"  note: {n}")
    lines.append(f"  seed: {r.seed}")
    return "\n".join(lines)


def _human_candidate(rep) -> str:
    T = rep.transform
    lines = [
        f"F = {format_expr(T.F)}",
        f"G = {format_expr(T.G)}  ({T.provenance.value})",
        f"target: {rep.target}" + ("" if rep.target_constant else "  [not constant]"),
    ]
    for k, v in rep.verdicts.items():
        lines.append(f"  residual {k}: {v.tag.value}")
    lines.append(f"  F_y*G nonzero: {rep.nonvanishing.tag.value}")
    for n in rep.notes:
        lines.append(f"  note: {n}")
    return "\n".join(lines)


# ---------------------------------------------------------------- commands


def _load_ode(args, cfg: Config):
    if args.ode is not None:
        text = args.ode
    elif args.file is not None:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read().strip()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    else:
        raise UsageError("an ODE is required (--ode or --file)")
    return parse_ode(text, _params(args.param), cfg.zero_test())


def _transform(args, ode, cfg: Config):
    """(report-or-None, candidate report-or-None, transform result-or-None)."""
    zc = cfg.zero_test()
    if args.candidate_F or args.candidate_G:
        if not (args.candidate_F and args.candidate_G):
            raise UsageError("--candidate-F and --candidate-G go together")
        T = SundmanTransform(parse_expr(args.candidate_F), parse_expr(args.candidate_G), Provenance.USER)
        return None, verify_candidate(ode, T, zc), None
    report = check_sundman(ode, zc)
    if not report.linearizable:
        return report, None, None
    x0 = None if cfg.x0 is None else Fraction(repr(cfg.x0))
    res = find_transform(ode, report.case, zc, x0=x0)
    return report, res.report, res


def cmd_parse(args, ode, cfg, out):
    payload = {
        "lambda0": format_expr(ode.lambda0),
        "lambda1": format_expr(ode.lambda1),
        "lambda2": format_expr(ode.lambda2),
        "ode": ode.to_text(),
    }
    out.emit(payload, "\n".join(f"{k} = {v}" for k, v in payload.items()))
    return EXIT_OK


def cmd_invariants(args, ode, cfg, out):
    inv = derived_invariants(ode)
    payload = {f"lambda{i}": format_expr(getattr(inv, f"lambda{i}")) for i in (3, 4, 5, 6)}
    out.emit(payload, "\n".join(f"{k} = {v}" for k, v in payload.items()))
    return EXIT_OK


def _cmd_check(fn):
    def run(args, ode, cfg, out):
        r = fn(ode, cfg.zero_test())
        out.emit(r.to_dict(), _human_report(r))
        return _VERDICT_EXIT[r.verdict]

    return run


def cmd_transform(args, ode, cfg, out):
    report, cand, res = _transform(args, ode, cfg)
    payload = {"check": report.to_dict() if report else None}
    human = [_human_report(report)] if report else []
    if cand is not None:
        payload.update(
            {
                "transform": cand.transform.to_dict(),
                "target": cand.target.to_dict() if cand.target_constant else None,
                "verification": cand.to_dict(),
            }
        )
        human.append(_human_candidate(cand))
        code = EXIT_OK if cand.ok else EXIT_NO
    elif res is not None:
        payload.update({"transform": None, "target": None, "verification": None, "notes": res.notes})
        human.append("no closed-form (F, G) found: " + "; ".join(res.notes))
        code = EXIT_UNDECIDED
    else:
        payload.update({"transform": None, "target": None, "verification": None})
        code = _VERDICT_EXIT[report.verdict]
    out.emit(payload, "\n".join(human))
    return code


def _require_transform(args, ode, cfg):
    report, cand, res = _transform(args, ode, cfg)
    if cand is None:
        why = f"check verdict {report.verdict.value}" if res is None else "no closed-form (F, G) found"
        raise _Stop(why, EXIT_NO if res is None and report.verdict is Verdict.NOT_LINEARIZABLE else EXIT_UNDECIDED)
    if not cand.target_constant:
        raise _Stop("the candidate does not give constant coefficients", EXIT_NO)
    return cand


class _Stop(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def cmd_verify(args, ode, cfg, out):
    cand = _require_transform(args, ode, cfg)
    x0, y0, yp0 = _floats(args.init, 3, "--init")
    x1 = args.to if args.to is not None else x0 + cfg.span
    traj = integrate_ode(ode, (x0, y0, yp0), x1, cfg.h)
    m = sundman_map_trajectory(traj, cand.transform)
    worst, i = residual_linear(m, cand.target)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(m.to_csv())
    ok = worst <= args.tol
    payload = {
        "transform": cand.transform.to_dict(),
        "target": cand.target.to_dict(),
        "init": [x0, y0, yp0],
        "x_end": x1,
        "h": traj.h,
        "steps": len(traj.x) - 1,
        "integration_error_estimate": traj.error_estimate,
        "max_residual": worst,
        "argmax": {"x": float(m.x[i]), "t": float(m.t[i])},
        "tol": args.tol,
        "ok": ok,
        "seed": cfg.seed,
    }
    human = (
        f"{_human_candidate(cand)}\n"
        f"integrated {len(traj.x) - 1} steps of h = {traj.h:.3g} on [{x0:g}, {x1:g}], error estimate {traj.error_estimate:.3g}\n"
        f"max |u'' + beta u' + alpha u - gamma| = {worst:.3e} at x = {m.x[i]:.6g}  ({'ok' if ok else 'FAIL'}, tol {args.tol:g})"
    )
    out.emit(payload, human)
    return EXIT_OK if ok else EXIT_NO


def cmd_solve(args, ode, cfg, out):
    cand = _require_transform(args, ode, cfg)
    sol = linear_general_solution(cand.target)
    c = (args.c1, args.c2)
    if args.y0 is not None:
        t0 = anchor_time(sol, cand.transform, c, args.x0, args.y0)
        y_start = args.y0
    else:
        t0, y_start = args.t0, args.y_start
    x1 = args.to if args.to is not None else args.x0 + cfg.span
    tr = transport_solution(cand.target, cand.transform, c, (args.x0, t0), x1, cfg.h, y_start=y_start, solution=sol)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(tr.to_csv())
    payload = {
        "transform": cand.transform.to_dict(),
        "target": cand.target.to_dict(),
        "solution": sol.to_dict(),
        "c": list(c),
        "anchor": {"x0": args.x0, "t0": t0},
        "table": json.loads(tr.to_json()),
    }
    stride = max(1, (len(tr.x) - 1) // 20)
    rows = "\n".join(f"{tr.x[i]: .10f}  {tr.t[i]: .10f}  {tr.y[i]: .12f}" for i in range(0, len(tr.x), stride))
    human = (
        f"{_human_candidate(cand)}\n"
        f"u(t) = {format_expr(sol.u)}\n"
        f"anchor x0 = {args.x0:g}, t0 = {t0:.12g}, c1 = {c[0]:g}, c2 = {c[1]:g}\n"
        f"          x              t               y\n{rows}"
    )
    out.emit(payload, human)
    return EXIT_OK


COMMANDS = {
    "parse": cmd_parse,
    "invariants": cmd_invariants,
    "check": _cmd_check(check_sundman),
    "dms-check": _cmd_check(check_dms),
    "lie-check": _cmd_check(check_lie),
    "transform": cmd_transform,
    "verify": cmd_verify,
    "solve": cmd_solve,
}


def _guess_format(argv) -> str:
    for i, a in enumerate(argv):
        if a == "--format" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--format="):
            return a.split("=", 1)[1]
    return "human"


def run(argv: Optional[List[str]] = None, stdout=None, stderr=None, environ=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    out = _Out(_guess_format(argv), stdout, stderr)
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            if not args.top_print:
                raise UsageError("a subcommand is required")
            stdout.write(load_config(args.top_config, None, environ).to_text())
            return EXIT_OK
        overrides = {"seed": args.seed, "samples": args.samples, "h": args.h, "format": args.format}
        cfg = load_config(args.config, overrides, environ)
        out.fmt = cfg.format
        if args.print_config:
            stdout.write(cfg.to_text())
            return EXIT_OK
        ode = _load_ode(args, cfg)
        return COMMANDS[args.command](args, ode, cfg, out)
    except (UsageError, ConfigError) as exc:
        return out.error("usage", str(exc), EXIT_USAGE)
    except ExprSyntaxError as exc:
        return out.error("syntax", str(exc), EXIT_PARSE)
    except OdeFormError as exc:
        return out.error(type(exc).__name__, str(exc), EXIT_PARSE)
    except _Stop as exc:
        return out.error("no-transform", str(exc), exc.code)
    except NonConstantTarget as exc:
        return out.error("NonConstantTarget", str(exc), EXIT_NO)
    except (SingularEncounter, StepUnderflow, GVanishes, NoBracket, InversionFailure) as exc:
        return out.error(type(exc).__name__, str(exc), EXIT_NUMERIC)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
