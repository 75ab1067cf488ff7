"""Command-line front end.

Exit status: 0 on success (and on experiment PASS), 2 when an experiment ran
but failed a threshold, 1 on usage or runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from . import mc
from . import profile as pf
from . import special_fn as sf
from . import streams
from .sde import SimConfig, simulate_Z

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _grid(a):
    if not a.step > 0 or a.xmax < a.xmin:
        raise UsageError("need step > 0 and xmax >= xmin")
    n = int(np.floor((a.xmax - a.xmin) / a.step + 1e-9)) + 1
    # round away the drift of xmin + k*step so grid points print cleanly
    return np.round(a.xmin + a.step * np.arange(n), 12)


def _fmt(v):
    return f"{float(v):.17g}"


def _header(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "func")}
    return [f"# sphere-profile {__version__}", "# config " + json.dumps(cfg, sort_keys=True)]


def _csv_text(args, columns, rows, extra_header=()):
    buf = io.StringIO()
    for line in (*_header(args), *extra_header):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_atomic(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# commands

def cmd_density(a):
    x = _grid(a)
    d = sf.stable_density(a.t, x)
    return _csv_text(a, ["x", "p", "p_prime"], zip(x, d.p, d.p_prime)), EXIT_OK


def cmd_drift(a):
    x = _grid(a)
    return _csv_text(a, ["x", "h", "h_airy", "b"],
                     zip(x, sf.drift_h(a.t, x), sf.drift_h_airy(a.t, x), sf.drift_b(x))), EXIT_OK


def cmd_theta(a):
    x = _grid(a)
    return _csv_text(a, ["x", "theta", "theta_prime", "b"],
                     zip(x, sf.theta(x), sf.theta_prime(x), sf.drift_b(x)),
                     [f"# pi_mean {_fmt(sf.pi_mean())}"]), EXIT_OK


def cmd_simulate_z(a):
    cfg = SimConfig(dt=a.dt, seed=a.seed)
    p = simulate_Z(a.w0, a.T, cfg, streams.stream(a.seed, streams.Z_PATH, a.index))
    return _csv_text(a, ["t", "Z", "integral"], zip(p.times, p.values, p.running_integral)), EXIT_OK


def cmd_build_profile(a):
    cfg = SimConfig(dt=a.dt, seed=a.seed)
    if not a.xmax > 0 or a.points < 1:
        raise UsageError("need --xmax > 0 and --points >= 1")
    xs = a.xmax * np.arange(1, a.points + 1) / a.points
    key = (a.seed, streams.PROFILE, a.index)
    real = pf.build_wstar(a.xmax, a.tol, cfg, streams.stream(*key))
    curve = pf.extract_profile(real, xs)
    head = pf.curve_header(real, cfg, a.tol, key)
    if a.format == "json":
        body = dict(head, version=__version__, x=curve.xs.tolist(), L=curve.L.tolist(),
                    Ldot=curve.Ldot.tolist(), tau_star=curve.tau_star.tolist())
        return json.dumps(body, indent=2) + "\n", EXIT_OK
    return _csv_text(a, ["x", "L", "Ldot", "tau_star"],
                     zip(curve.xs, curve.L, curve.Ldot, curve.tau_star),
                     ["# realization " + json.dumps(head, sort_keys=True)]), EXIT_OK


def _run_experiment(a, cfg):
    n = a.n
    name = a.experiment
    if name == "moments":
        return lambda cfg: mc.moment_experiment(a.x or [0.5, 1.0, 2.0], n, cfg)
    if name == "scale":
        return lambda cfg: mc.scale_invariance_experiment(a.lam, (a.x or [1.0])[0], n, cfg)
    if name == "reversal":
        return lambda cfg: mc.reversal_experiment(a.a, n, cfg, delta=a.delta)
    if name == "two-route":
        return lambda cfg: mc.two_route_experiment(a.eps, a.t, n, cfg)
    if name == "markov-kernel":
        return lambda cfg: mc.markov_kernel_experiment(a.eps, a.s, n, cfg)
    if name == "mu-coupling":
        return lambda cfg: mc.mu_coupling_experiment(n, cfg)
    if name == "gamma":
        return lambda cfg: mc.gamma_experiment((a.x or [-1.0])[0], a.horizons, n, cfg)
    raise UsageError(f"unknown experiment {name}")


def cmd_experiment(a):
    if a.n < 1:
        raise UsageError("--n must be positive")
    cfg = SimConfig(dt=a.dt, seed=a.seed)
    run = _run_experiment(a, cfg)
    if a.halve:
        rep = mc.with_dt_halving(lambda cfg: run(cfg), cfg)
    else:
        rep = run(cfg)
    rep.params["argv"] = {k: v for k, v in sorted(vars(a).items()) if k not in ("out", "func")}
    if a.format == "json":
        text = rep.to_json()
    else:
        rows = [(e.label, _fmt(e.value), _fmt(e.stderr)) for e in rep.estimates]
        buf = io.StringIO()
        for line in _header(a):
            buf.write(line + "\n")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["label", "value", "stderr"])
        w.writerows(rows)
        text = buf.getvalue()
    sys.stderr.write(rep.to_text())
    return text, EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="sphere-profile", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt=("csv",)):
        sp.add_argument("--out", default="-", help="output file (default stdout)")
        sp.add_argument("--format", choices=fmt, default=fmt[0])

    def grid(sp, xmin, xmax, step):
        sp.add_argument("--xmin", type=float, default=xmin)
        sp.add_argument("--xmax", type=float, default=xmax)
        sp.add_argument("--step", type=float, default=step)

    sp = sub.add_parser("density-table", help="p_t and p_t' on a grid")
    sp.add_argument("--t", type=float, default=1.0)
    grid(sp, -6.0, 6.0, 0.1)
    common(sp)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("drift-table", help="h(t, x), its Airy form, and b(x)")
    sp.add_argument("--t", type=float, default=1.0)
    grid(sp, -6.0, 6.0, 0.1)
    common(sp)
    sp.set_defaults(func=cmd_drift)

    sp = sub.add_parser("theta-table", help="invariant density and its derivative")
    grid(sp, -10.0, 6.0, 0.1)
    common(sp)
    sp.set_defaults(func=cmd_theta)

    sp = sub.add_parser("simulate-z", help="one Euler path of Z")
    sp.add_argument("--w0", type=float, default=0.0)
    sp.add_argument("--T", type=float, default=10.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--index", type=int, default=0, help="stream index")
    common(sp)
    sp.set_defaults(func=cmd_simulate_z)

    sp = sub.add_parser("build-profile", help="one realization of (L, Ldot) on (0, xmax]")
    sp.add_argument("--xmax", type=float, default=2.0)
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--index", type=int, default=0, help="realization index")
    common(sp, ("csv", "json"))
    sp.set_defaults(func=cmd_build_profile)

    sp = sub.add_parser("experiment", help="Monte Carlo cross-checks")
    sp.add_argument("experiment", choices=["moments", "scale", "reversal", "two-route",
                                           "markov-kernel", "mu-coupling", "gamma"])
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--halve", action="store_true", help="also run at dt/2")
    sp.add_argument("--x", type=float, nargs="+")
    sp.add_argument("--lam", type=float, default=2.0)
    sp.add_argument("--a", type=float, default=5.0)
    sp.add_argument("--delta", type=float, default=15.0)
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--t", type=float, default=0.5)
    sp.add_argument("--s", type=float, default=0.25)
    sp.add_argument("--horizons", type=float, nargs="+", default=[5.0, 50.0])
    common(sp, ("json", "csv"))
    sp.set_defaults(func=cmd_experiment)
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text, code = args.func(args)
        write_atomic(args.out, text)
        return code
    except UsageError as e:
        sys.stderr.write(str(e) + ("\n" if not str(e).endswith("\n") else ""))
        return EXIT_ERROR
    except SystemExit as e:  # --help / --version
        return EXIT_OK if not e.code else EXIT_ERROR
    except Exception as e:  # runtime failure
        sys.stderr.write(f"sphere-profile: {type(e).__name__}: {e}\n")
        return EXIT_ERROR


def main():
    sys.exit(run())
