"""Command-line front end.

Exit status 0 on success, 2 on bad arguments, 3 on numerical failure.  Every
payload carries an ``inputs`` block whose ``argv`` reproduces the run.
"""

import argparse
import csv
import io
import json
import math
import sys

from . import critical, landscape, oracle, variational, weights
from .errors import PottsError

SIG_DIGITS = 15


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(x):
    """Float rounded to 15 significant digits; None for inf/nan."""
    if x is None or isinstance(x, bool):
        return x
    if isinstance(x, int):
        return x
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(format(x, f".{SIG_DIGITS}g"))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, str) or obj is None:
        return obj
    return _num(obj)


def _csv_cell(x):
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, str)):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{SIG_DIGITS}g")


# ---------------------------------------------------------------- arguments

def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    return v


def _real(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a real number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _dist(text):
    try:
        return weights.parse_distribution(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _weights(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"weights must be comma-separated reals, got {text!r}") from None


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--rel-tol", type=_real, default=1e-10)
    common.add_argument("--root-tol", type=_real, default=landscape.ROOT_TOL)
    common.add_argument("--seed", default=None, help=argparse.SUPPRESS)

    p = _Parser(prog="annealed-potts", description="Annealed Potts phase structure.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model(sp, beta=False, B=True):
        sp.add_argument("--dist", type=_dist, required=True)
        sp.add_argument("--q", type=_positive_int, required=True)
        if B:
            sp.add_argument("--B", type=_real, default=0.0)
        if beta:
            sp.add_argument("--beta", type=_real, required=True)

    model(sub.add_parser("critical", parents=[common]))
    model(sub.add_parser("classify", parents=[common]))
    model(sub.add_parser("solve", parents=[common]), beta=True)

    sp = sub.add_parser("tau-q", parents=[common])
    sp.add_argument("--q", type=_positive_int, required=True)

    sp = sub.add_parser("scan-f2", parents=[common])
    model(sp)
    sp.add_argument("--points", type=_positive_int, default=200)
    sp.add_argument("--t-max", type=_real, default=None)

    sp = sub.add_parser("sweep", parents=[common])
    model(sp)
    sp.add_argument("--beta-min", type=_real, required=True)
    sp.add_argument("--beta-max", type=_real, required=True)
    sp.add_argument("--steps", type=_positive_int, default=50)

    sp = sub.add_parser("oracle", parents=[common])
    sp.add_argument("--weights", type=_weights, required=True)
    sp.add_argument("--q", type=_positive_int, required=True)
    sp.add_argument("--beta", type=_real, required=True)
    sp.add_argument("--B", type=_real, default=0.0)

    sp = sub.add_parser("counterexample", parents=[common])
    sp.add_argument("--q", type=_positive_int, default=7)
    sp.add_argument("--x1", type=_real, default=1.0)
    sp.add_argument("--x2", type=_real, default=5.0)
    return p


_SKIP = {"command", "format", "seed"}


def _canonical(ns):
    """Inputs echo and an argv list that reproduces the same run."""
    echo = {"command": ns.command}
    argv = [ns.command]
    for key in sorted(vars(ns)):
        if key in _SKIP:
            continue
        val = getattr(ns, key)
        if val is None:
            continue
        flag = "--" + key.replace("_", "-")
        if key == "dist":
            text = val.spec()
            echo[key] = text
        elif key == "weights":
            text = ",".join(repr(w) for w in val)
            echo[key] = list(val)
        else:
            text = repr(val)
            echo[key] = val
        argv += [flag, text]
    if ns.format is not None:
        argv += ["--format", ns.format]
    echo["format"] = ns.format
    echo["argv"] = argv
    return echo


# ---------------------------------------------------------------- commands

def _config(ns):
    return landscape.PottsConfig(ns.q, ns.B, ns.dist, rel_tol=ns.rel_tol, root_tol=ns.root_tol)


def _critical_fields(cp):
    if cp is None:
        return None
    return {
        "t_c": cp.t_c, "beta_c": cp.beta_c, "beta_prime_c": cp.beta_prime_c,
        "s_low": cp.s_low, "s_high": cp.s_high, "order": cp.order,
        "iterations": cp.iterations, "uncertainty": cp.uncertainty,
    }


def cmd_critical(ns):
    return _critical_fields(critical.critical_point(_config(ns))), None


def cmd_classify(ns):
    rep = critical.classify(_config(ns))
    return {"regime": rep.regime, "critical": _critical_fields(rep.critical),
            "detail": rep.detail, "jumps": [list(j) for j in rep.jumps]}, None


def cmd_tau_q(ns):
    r = critical.tau_q(ns.q)
    return {"tau_q": r.tau_q, "r_q": r.r_q, "lower_bound": r.lower_bound,
            "asymptotic": r.asymptotic, "residual": r.residual}, None


def cmd_solve(ns):
    sol = variational.solve(_config(ns), ns.beta)
    return {"s_star": sol.s_star, "t_star_scaled": sol.t_star_scaled,
            "y_vector": list(sol.y_vector), "x1": sol.x1, "pressure": sol.pressure,
            "degenerate": sol.degenerate, "branches": list(sol.branches)}, None


def cmd_scan_f2(ns):
    cfg = _config(ns)
    if ns.points < 2:
        raise ValueError("--points must be at least 2")
    t_max = ns.t_max
    if t_max is None:
        scale = max(cfg.dist.support_min, cfg.dist.quantile(0.5))
        t_max = 2.0 * math.log(cfg.q - 1) / scale
    if not t_max > 0:
        raise ValueError("--t-max must be positive")
    start = 0 if math.isfinite(cfg.dist.moment(3)) else 1
    ts = [t_max * i / (ns.points - 1) for i in range(ns.points)][start:]
    if start:
        ts.append(t_max * (1 + 1.0 / (ns.points - 1)))
    rows = [(t, *landscape.landscape_values(cfg, t)) for t in ts]
    header = ("t", "F", "F1", "F2")
    return {"columns": list(header), "rows": [list(r) for r in rows]}, (header, rows)


def cmd_sweep(ns):
    res = variational.sweep(_config(ns), ns.beta_min, ns.beta_max, ns.steps)
    header = ("beta", "s_star", "x1", "pressure", "jump_flag")
    rows = [(r.beta, r.s_star, r.x1, r.pressure, r.jump) for r in res.rows]
    payload = {"columns": list(header), "rows": [list(r) for r in rows],
               "jumps": [{"beta_left": j.beta_left, "beta_right": j.beta_right,
                          "s_left": j.s_left, "s_right": j.s_right} for j in res.jumps]}
    return payload, (header, rows)


def cmd_oracle(ns):
    inst = oracle.OracleInstance(ns.weights, ns.q, ns.beta, ns.B)
    res = oracle.evaluate(inst)
    return {"log_EZn": res.log_EZn, "phi_n": res.phi_n, "mean_X1": res.mean_X1,
            "n": res.n, "configs_evaluated": res.configs_evaluated}, None


def cmd_counterexample(ns):
    cal = landscape.calibrate_counterexample(ns.q, ns.x1, ns.x2)
    cfg = landscape.PottsConfig(ns.q, 0.0, weights.TwoAtom(ns.x1, ns.x2, cal.c1),
                                rel_tol=ns.rel_tol, root_tol=ns.root_tol)
    rep = landscape.zero_crossing(cfg)
    return {"c1": cal.c1, "c2": cal.c2, "f_x1": cal.f_x1, "f_x2": cal.f_x2,
            "sign_changes": list(rep.sign_changes)}, None


COMMANDS = {
    "critical": cmd_critical, "classify": cmd_classify, "tau-q": cmd_tau_q,
    "solve": cmd_solve, "scan-f2": cmd_scan_f2, "sweep": cmd_sweep,
    "oracle": cmd_oracle, "counterexample": cmd_counterexample,
}
CSV_DEFAULT = {"scan-f2", "sweep"}


def _render(ns, payload, table):
    fmt = ns.format or ("csv" if ns.command in CSV_DEFAULT else "json")
    if fmt == "csv":
        if table is None:
            raise ValueError(f"{ns.command} has no CSV output; use --format json")
        header, rows = table
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_csv_cell(x) for x in r] for r in rows])
        return buf.getvalue()
    payload = dict(payload)
    payload["inputs"] = _canonical(ns)
    return json.dumps(_clean(payload), indent=2) + "\n"


def dispatch(argv, stdout=None, stderr=None):
    """Run one command; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        ns = build_parser().parse_args(argv)
        if ns.seed is not None:
            raise UsageError("--seed is reserved: no command uses randomness")
        if not ns.rel_tol > 0 or not ns.root_tol > 0:
            raise UsageError("--rel-tol and --root-tol must be positive")
        payload, table = COMMANDS[ns.command](ns)
        text = _render(ns, payload, table)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except PottsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 3
    stdout.write(text)
    return 0


def main(argv=None):
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))
