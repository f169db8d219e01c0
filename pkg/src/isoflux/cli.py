"""``isoflux`` command-line front end.

Subcommands: ``field``, ``optimize``, ``verify``, ``hc1`` and ``phase``.
Options may also come from a flat ``key=value`` file given with
``--config`` (keys are the long option names, dashes or underscores);
command-line flags win.  Every data file written carries the digest of the
effective configuration and the seed, and nothing time-dependent, so reruns
reproduce identical bytes.

Exit status: 0 on success, 2 when a verification fails, 1 on usage or
input errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile


from . import critfield, meissner, nondegen, optimize
from .currents import length, write_curve_csv
from .domain import Ball, parse_domain
from .errors import IsofluxError

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2

DEFAULT_EPS = "1e-3,1e-4,1e-5,1e-6,1e-8,1e-10,1e-12"
DEFAULT_MULT = "-3,-1,0,1,3,10"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="isoflux", description="Isoflux curves and first critical fields.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, seed=True):
        sp.add_argument("--config", help="key=value file with defaults for these options")
        sp.add_argument("--out", default=".", help="output directory")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    f = sub.add_parser("field", help="solve for the azimuthal Meissner component")
    common(f)
    f.add_argument("--domain", default="ball:1")
    f.add_argument("--r-box", type=float, default=None, help="box size (default 3x diameter)")
    f.add_argument("--n-r", type=int, default=256)
    f.add_argument("--n-z", type=int, default=512)
    f.add_argument("--tol", type=float, default=1e-10)

    o = sub.add_parser("optimize", help="maximize the flux-to-length ratio")
    common(o)
    o.add_argument("--domain", default="ball:1")
    o.add_argument("--field", choices=["meissner", "torus"], default="meissner")
    o.add_argument("--starts", type=int, default=32)
    o.add_argument("--vertices", type=int, default=64)
    o.add_argument("--max-iters", type=int, default=400)
    o.add_argument("--anneal", type=int, default=0, help="annealing rounds")
    o.add_argument("--major", type=float, default=2.0)
    o.add_argument("--minor", type=float, default=0.5)

    v = sub.add_parser("verify", help="nondegeneracy, length and tube checks around the maximizer")
    common(v)
    v.add_argument("--domain", default="ball:1")
    v.add_argument("--samples", type=int, default=500)
    v.add_argument("--exponent", type=float, default=2.0)
    v.add_argument("--min-slope", type=float, default=1.8)

    h = sub.add_parser("hc1", help="print the leading-order first critical field")
    common(h, seed=False)
    h.add_argument("--epsilon", type=float, required=False)
    h.add_argument("--r0", type=float, default=None, help="ratio R0 (default: ball axis value)")
    h.add_argument("--domain", default="ball:1")
    h.add_argument("--k0", type=float, default=None, help="also print the band H -+ K0")
    h.add_argument("--K", type=float, default=None, help="also print H + K log log(1/eps)")

    ph = sub.add_parser("phase", help="line count versus applied field")
    common(ph)
    ph.add_argument("--model-config", help="key=value file with epsilon,h_ex,c_log,c_rep,N_max")
    ph.add_argument("--eps-list", type=_floats, default=None,
                    help=f"comma-separated epsilons (default: model-config epsilon, else {DEFAULT_EPS})")
    ph.add_argument("--multipliers", type=_floats, default=_floats(DEFAULT_MULT))
    ph.add_argument("--r0", type=float, default=None)
    ph.add_argument("--length", type=float, default=None, help="length of the maximizer")
    ph.add_argument("--domain", default="ball:1")
    ph.add_argument("--c-log", type=float, default=1.0)
    ph.add_argument("--c-rep", type=float, default=1.0)
    ph.add_argument("--n-max", type=int, default=64)
    return p


def _subparser(parser, command):
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices[command]
    raise KeyError(command)


def parse_args(argv):
    """Parse ``argv`` with config-file values installed as defaults."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                values = critfield.parse_key_values(fh.read())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        sp = _subparser(parser, args.command)
        known = {a.dest: a for a in sp._actions}
        defaults = {}
        for k, val in values.items():
            dest = k.replace("-", "_")
            if dest not in known or dest in ("config", "help"):
                raise UsageError(f"unknown config key: {k}")
            defaults[dest] = val
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def config_digest(args) -> str:
    items = {k: v for k, v in vars(args).items() if k not in ("config", "out")}
    blob = json.dumps(items, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _atomic(path, write):
    """Run ``write(tmp)`` then rename ``tmp`` onto ``path``; sidecars ``tmp + suffix`` follow."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        write(tmp)
        if os.path.exists(tmp + ".json"):
            os.replace(tmp + ".json", str(path) + ".json")
        os.replace(tmp, path)
    finally:
        for t in (tmp, tmp + ".json"):
            if os.path.exists(t):
                os.remove(t)


def _write_json(path, data):
    def w(tmp):
        with open(tmp, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _atomic(path, w)


def _stamp(args, digest):
    return {"config_digest": digest, "seed": getattr(args, "seed", None)}


def _comment(args, digest):
    return f"config_digest={digest},seed={getattr(args, 'seed', None)}"


def _ball(domain):
    if not isinstance(domain, Ball):
        raise UsageError("this command needs a ball domain (ball:R); solids of revolution "
                         "only support the 'field' command")
    return domain


def cmd_field(args, digest):
    dom = parse_domain(args.domain)
    r_box = args.r_box if args.r_box is not None else 3 * dom.diameter
    fld = meissner.solve_axisym_meissner(dom, r_box, args.n_r, args.n_z, tol=args.tol)
    os.makedirs(args.out, exist_ok=True)
    _atomic(os.path.join(args.out, "field.csv"),
            lambda t: meissner.export_field_csv(t, fld, _comment(args, digest)))
    summary = meissner.field_summary(fld)
    summary.update(_stamp(args, digest))
    summary["domain"] = args.domain
    _write_json(os.path.join(args.out, "field_summary.json"), summary)
    print(f"J0 = {summary['J0']!r}  residual = {summary['residual']!r}")
    return EXIT_OK


def cmd_optimize(args, digest):
    cfg = optimize.OptimizerConfig(n_vertices=args.vertices, max_iters=args.max_iters,
                                   n_starts=args.starts, seed=args.seed, anneal_rounds=args.anneal)
    os.makedirs(args.out, exist_ok=True)
    if args.field == "torus":
        tf = optimize.torus_field(args.major, args.minor)
        dom = tf.domain()
        loop = optimize.loop_supremum_probe(tf, dom, cfg, generators=tf.generators(cfg.n_vertices))
        rep = {"loop_ratio": loop.ratio, "best_curve": loop.curve.vertices.tolist(),
               "n_vertices": cfg.n_vertices, "n_starts": cfg.n_starts, "seed": cfg.seed}
        best = loop
    else:
        dom = _ball(parse_domain(args.domain))
        fld = meissner.BallField(dom.radius)
        best, R0, starts = optimize.multistart_maximize(fld, dom, cfg)
        loop = optimize.loop_supremum_probe(fld, dom, cfg)
        rep = optimize.run_report(best, R0, starts, loop, cfg)
        rep["axis_quadrature_R0"] = fld.axis_ratio()
    rep.update(_stamp(args, digest))
    _write_json(os.path.join(args.out, "optimize_report.json"), rep)
    _atomic(os.path.join(args.out, "best_curve.csv"),
            lambda t: write_curve_csv(t, best.curve, _comment(args, digest)))
    print(f"best ratio = {best.ratio!r}")
    return EXIT_OK


def cmd_verify(args, digest):
    dom = _ball(parse_domain(args.domain))
    fld = meissner.BallField(dom.radius)
    g0 = optimize.diameter_curve(dom)
    specs = nondegen.default_specs(dom, args.samples, seed=args.seed)
    samples = nondegen.generate_samples(fld, dom, g0, specs)
    rep = nondegen.verify_nondegeneracy(fld, dom, g0, samples, N=args.exponent, strict=False)
    L0 = length(g0)
    lc = nondegen.check_length_control(rep, L0, nondegen.field_norm(fld, dom))
    deltas = [L0 / 5, L0 / 20, L0 / 80]
    tb = nondegen.check_tubular(rep, L0, deltas)
    pos = nondegen.positivity_scan(fld)
    checks = {
        "maximality": not rep.violations,
        "empirical_C0_positive": rep.empirical_C0 > 0,
        "planar_arc_slope": rep.slope is not None and rep.slope >= args.min_slope,
        "length_control": lc.violations == 0,
        "tubular_stable": tb.stable,
        "positivity": pos.passed,
    }
    extra = {
        "checks": checks,
        "length_control": {"checked": lc.checked, "violations": lc.violations,
                           "min_slack": lc.min_slack, "max_slack": lc.max_slack, "B_norm": lc.B_norm},
        "tubular": {"delta": tb.delta, "C": tb.C, "n_valid": tb.n_valid, "delta0": tb.delta0},
        "positivity": {"min_curl_b0": pos.min_curl_b0, "max_curl_h0": pos.max_curl_h0,
                       "nodes": pos.nodes},
    }
    extra.update(_stamp(args, digest))
    os.makedirs(args.out, exist_ok=True)
    _atomic(os.path.join(args.out, "nondegen.json"), lambda t: nondegen.write_report_json(t, rep, extra))
    _atomic(os.path.join(args.out, "nondegen.csv"),
            lambda t: nondegen.write_report_csv(t, rep, _comment(args, digest)))
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"empirical_C0 = {rep.empirical_C0!r}")
    return EXIT_OK if all(checks.values()) else EXIT_VERIFY


def _r0_default(args):
    if args.r0 is not None:
        return args.r0
    dom = _ball(parse_domain(args.domain))
    return meissner.BallField(dom.radius).axis_ratio()


def cmd_hc1(args, digest):
    if args.epsilon is None:
        raise UsageError("hc1: --epsilon is required")
    R0 = _r0_default(args)
    H = critfield.hc1_zero(args.epsilon, R0)
    print(repr(H))
    if args.k0 is not None or args.K is not None:
        model = critfield.EnergyModel(args.epsilon, 0.0, 0.0, R0, 1.0)
        (lo, hi), ceil = critfield.hc1_band(model, args.k0 or 0.0, args.K or 0.0)
        if args.k0 is not None:
            print(f"band {lo!r} {hi!r}")
        if args.K is not None:
            print(f"ceiling {ceil!r}")
    return EXIT_OK


def cmd_phase(args, digest):
    consts = {}
    if args.model_config:
        consts = critfield.read_model_config(args.model_config)
    c_log = consts.get("c_log", args.c_log)
    c_rep = consts.get("c_rep", args.c_rep)
    n_max = int(consts.get("N_max", args.n_max))
    eps_list = args.eps_list
    if eps_list is None:
        eps_list = [consts["epsilon"]] if "epsilon" in consts else _floats(DEFAULT_EPS)
    R0 = _r0_default(args)
    L0 = args.length if args.length is not None else 2 * _ball(parse_domain(args.domain)).radius
    rows = critfield.phase_table(eps_list, args.multipliers, R0, L0, c_log=c_log, c_rep=c_rep, N_max=n_max)
    os.makedirs(args.out, exist_ok=True)
    _atomic(os.path.join(args.out, "phase.csv"),
            lambda t: critfield.write_phase_csv(t, rows, _comment(args, digest)))
    print(f"{len(rows)} rows")
    return EXIT_OK


COMMANDS = {"field": cmd_field, "optimize": cmd_optimize, "verify": cmd_verify,
            "hc1": cmd_hc1, "phase": cmd_phase}


def run(argv) -> int:
    """Execute one command; returns the exit status."""
    try:
        args = parse_args(argv)
        digest = config_digest(args)
        return COMMANDS[args.command](args, digest)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (IsofluxError, ValueError, OSError) as exc:
        print(f"isoflux: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
