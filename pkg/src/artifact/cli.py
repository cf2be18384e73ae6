"""Command-line front end.

    artifact count --bundle 2,1 --bound 3
    artifact count --bundle 2,1 --grid 1000,2,8 --threads 8 --output counts.csv
    artifact verify-asymptotic --bundle 2,1 --grid 1000,2,11
    artifact eisenstein --s 1.5 --route both
    artifact local-int --p 2 --s 3 --w 2 --oracle
    artifact peyre --bundle 1,1
    artifact constants

Exit codes: 0 success, 2 failed verification, 3 resource budget, 4 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from decimal import ROUND_HALF_EVEN, Context, Decimal
from fractions import Fraction

import mpmath

from . import specfun as sf
from .arith import BundleParams, as_fraction
from .eisenstein import eval_fourier, eval_lattice, kronecker_constants
from .enumerate import THREADS_ENV, count_grid, count_points, CountQuery, DEFAULT_MAX_RADIUS
from .errors import ArtifactError
from .localint import (SatakeParam, height_integral_nonarch, height_integral_twisted,
                       j_cuspidal, oracle_nonarch)
from .peyre import (SECONDARY_ROUTES, leading_constant, manin_constants_laurent,
                    manin_constants_mp, manin_constants_rederived_mp)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_INPUT = 4

EPS_MIN, EPS_MAX = 1e-14, 1e-4
CSV_HEADER = "B,count,main_term,residual_over_B,elapsed_ms"
CONSTANT_DIGITS = 20

_CTX15 = Context(prec=15, rounding=ROUND_HALF_EVEN)


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# =============================================================================
# Parsing helpers
# =============================================================================


def parse_bundle(text: str) -> BundleParams:
    try:
        x, y = (as_fraction(Fraction(v.strip())) for v in text.split(","))
    except ValueError as exc:
        raise InputError(f"bundle must be X,Y (got {text!r})") from exc
    return BundleParams(x, y)


def parse_complex(text: str) -> complex | float:
    parts = [p.strip() for p in text.split(",")]
    try:
        if len(parts) == 1:
            return float(parts[0])
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise InputError(f"expected RE or RE,IM (got {text!r})")


def parse_grid(text: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise InputError("grid must be B0,RATIO,K")
    try:
        k = int(parts[2])
        return as_fraction(parts[0]), as_fraction(parts[1]), k
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad grid {text!r}") from exc


def read_config(path: str) -> dict:
    """key = value lines; '#' starts a comment; keys use flag names."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{n}: expected key = value")
            k, v = (t.strip() for t in line.split("=", 1))
            out[k.replace("-", "_")] = v.strip("\"'")
    return out


def _merge_config(args: argparse.Namespace, keys) -> None:
    if not getattr(args, "config", None):
        return
    cfg = read_config(args.config)
    for k in keys:
        if getattr(args, k, None) is None and k in cfg:
            setattr(args, k, cfg[k])


def resolve_threads(value) -> int:
    """flag/config value, then the environment, then the CPU count."""
    if value is None:
        value = os.environ.get(THREADS_ENV)
    if value is None:
        return os.cpu_count() or 1
    try:
        n = int(value)
    except ValueError as exc:
        raise InputError(f"threads must be an integer (got {value!r})") from exc
    if n < 1:
        raise InputError("threads must be >= 1")
    return n


def check_eps(eps) -> float:
    eps = float(eps)
    if not EPS_MIN <= eps <= EPS_MAX:
        raise InputError(f"eps must lie in [{EPS_MIN:g}, {EPS_MAX:g}]")
    return eps


# =============================================================================
# Formatting
# =============================================================================


def fmt15(x: float) -> str:
    """15 significant digits, round-half-even."""
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    d = _CTX15.plus(Decimal(x)).normalize(_CTX15)
    if d == d.to_integral_value() and abs(d) < 10**15:
        return str(int(d))
    return format(d, "g")


def fmt_bound(B: Fraction) -> str:
    return str(B.numerator) if B.denominator == 1 else fmt15(float(B))


def cnum(z) -> dict:
    if isinstance(z, Fraction):
        return {"re": float(z), "im": 0.0, "exact": str(z)}
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def mpstr(v, digits: int = CONSTANT_DIGITS) -> str:
    return mpmath.nstr(v, digits, strip_zeros=False)


def write_output(text: str, path) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".artifact-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_schema(name: str) -> dict:
    """Shipped JSON schema for a command, e.g. ``load_schema("count")``."""
    from importlib import resources

    ref = resources.files("artifact") / "schemas" / f"{name.replace('-', '_')}.schema.json"
    return json.loads(ref.read_text(encoding="utf-8"))


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


# =============================================================================
# Commands
# =============================================================================


def _records(args):
    bundle = parse_bundle(args.bundle)
    threads = resolve_threads(args.threads)
    max_radius = int(args.max_radius) if args.max_radius is not None else DEFAULT_MAX_RADIUS
    if args.secondary not in SECONDARY_ROUTES:
        raise InputError(f"secondary must be one of {', '.join(SECONDARY_ROUTES)}")
    if args.grid is not None:
        if args.bound is not None:
            raise InputError("give either --bound or --grid")
        B0, ratio, k = parse_grid(args.grid)
        if not ratio > 1 or k < 1 or B0 <= 0:
            raise InputError("grid needs B0 > 0, RATIO > 1, K >= 1")
        recs = count_grid(bundle, B0, ratio, k, threads, max_radius, args.secondary)
    elif args.bound is not None:
        try:
            B = as_fraction(args.bound)
        except (ValueError, TypeError) as exc:
            raise InputError(f"bad bound {args.bound!r}") from exc
        if not B > 1:
            raise InputError("bound must exceed 1")
        recs = [count_points(CountQuery(bundle, B, threads), max_radius, args.secondary)]
    else:
        raise InputError("one of --bound or --grid is required")
    return bundle, recs


def _rows_json(bundle, recs, secondary):
    return {
        "bundle": {"x": str(bundle.x), "y": str(bundle.y), "case": bundle.case_tag},
        "secondary": secondary,
        "rows": [
            {"B": fmt_bound(r.bound), "count": r.count, "main_term": r.main_term,
             "residual_over_B": r.residual, "elapsed_ms": r.elapsed * 1e3}
            for r in recs
        ],
    }


def cmd_count(args) -> int:
    _merge_config(args, ("bundle", "bound", "grid", "threads", "output", "format",
                         "secondary", "max_radius"))
    args.format = args.format or "csv"
    args.secondary = args.secondary or "closed-form"
    if args.bundle is None:
        raise InputError("--bundle is required")
    if args.format not in ("csv", "json"):
        raise InputError("format must be csv or json")
    bundle, recs = _records(args)
    if args.format == "json":
        text = dump_json(_rows_json(bundle, recs, args.secondary))
    else:
        lines = [CSV_HEADER]
        for r in recs:
            lines.append(",".join([fmt_bound(r.bound), str(r.count), fmt15(r.main_term),
                                   fmt15(r.residual), fmt15(r.elapsed * 1e3)]))
        text = "\n".join(lines) + "\n"
    write_output(text, args.output)
    return EXIT_OK


def asymptotic_summary(recs, tolerance: float = 0.05) -> dict:
    devs = [abs(r.count / r.main_term - 1) for r in recs]
    top = devs[len(devs) // 2:]
    slope_ok = all(b <= a for a, b in zip(top, top[1:]))
    ok = slope_ok and devs[-1] < tolerance
    return {"slope_check": slope_ok, "max_residual": max(abs(r.residual) for r in recs),
            "top_deviation": devs[-1], "deviations": devs, "tolerance": tolerance, "pass": ok}


def cmd_verify_asymptotic(args) -> int:
    _merge_config(args, ("bundle", "grid", "threads", "output", "secondary", "max_radius",
                         "tolerance"))
    args.secondary = args.secondary or "closed-form"
    args.bound = None
    if args.bundle is None or args.grid is None:
        raise InputError("--bundle and --grid are required")
    tol = float(args.tolerance) if args.tolerance is not None else 0.05
    bundle, recs = _records(args)
    out = asymptotic_summary(recs, tol)
    out = {**_rows_json(bundle, recs, args.secondary), **out}
    write_output(dump_json(out), args.output)
    return EXIT_OK if out["pass"] else EXIT_VALIDATION


def cmd_eisenstein(args) -> int:
    s = parse_complex(args.s)
    eps = check_eps(args.eps)
    routes = ("lattice", "fourier") if args.route == "both" else (args.route,)
    vals = {}
    for r in routes:
        ev = eval_lattice(s, eps) if r == "lattice" else eval_fourier(s, min(eps, 1e-12))
        vals[r] = {**cnum(ev.value), "tail_bound": ev.tail_bound, "method": ev.method}
    first = vals[routes[0]]
    out = {"s": cnum(s), "eps": eps, "route": args.route,
           "value": {"re": first["re"], "im": first["im"]},
           "tail_bound": max(v["tail_bound"] for v in vals.values()), "values": vals}
    if len(vals) == 2:
        a, b = (complex(v["re"], v["im"]) for v in vals.values())
        out["abs_diff"] = abs(a - b)
        out["agree"] = abs(a - b) < eps
    write_output(dump_json(out), args.output)
    return EXIT_OK


def _num(v: float | complex):
    # integral real parameters stay exact
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return v


def cmd_local_int(args) -> int:
    p = args.p
    if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        raise InputError(f"p = {p} is not prime")
    s = _num(parse_complex(args.s))
    w = _num(parse_complex(args.w))
    tau = _num(parse_complex(args.tau)) if args.tau is not None else 0
    sp = None
    if args.satake is not None:
        sp = SatakeParam(parse_complex(args.satake), p)
    k = args.alpha_val
    if sp is not None:
        if k is None:
            k = 0
        if tau != 0:
            raise InputError("--tau is not combined with --satake")
        kind = "j_cuspidal"
        closed = j_cuspidal(sp, k, s, w) if k >= 0 else 0.0
    else:
        if k is not None:
            raise InputError("--alpha-val needs --satake")
        kind = "height_integral_twisted" if tau != 0 else "height_integral_nonarch"
        closed = height_integral_twisted(p, s, w, tau) if tau != 0 else height_integral_nonarch(p, s, w)
    out = {"p": p, "s": cnum(s), "w": cnum(w), "integral": kind, "closed_form": cnum(closed)}
    if args.oracle:
        orc = oracle_nonarch(p, s, w, alpha_val=k, satake=sp, tau=tau)
        out["oracle"] = cnum(orc)
        diff = closed - orc
        out["abs_diff"] = float(abs(diff)) if not isinstance(diff, Fraction) else float(abs(diff))
    write_output(dump_json(out), args.output)
    return EXIT_OK


def cmd_peyre(args) -> int:
    rep = leading_constant(parse_bundle(args.bundle))
    write_output(dump_json(rep.to_json()), args.output)
    return EXIT_OK


def constants_json() -> dict:
    c = sf.named_constants()
    C, A = manin_constants_mp()
    Cr, Ar = manin_constants_rederived_mp()
    Cl, Al, c2 = manin_constants_laurent()
    ce, c0 = kronecker_constants()
    with mpmath.workdps(c.digits):
        named = {n: mpstr(getattr(c, n)) for n in ("pi", "euler_gamma", "zeta2", "zeta3",
                                                   "zeta_prime_2", "zeta_prime_3",
                                                   "gamma_quarter", "eta_at_i", "catalan")}
        named["inv_zeta3"] = mpstr(1 / c.zeta3)
        named["tamagawa_limit"] = mpstr(12 / c.zeta3)
        return {
            "digits": CONSTANT_DIGITS,
            "named": named,
            "C": mpstr(C),
            "A": mpstr(A),
            "closed_form": {"C": mpstr(C), "A": mpstr(A)},
            "rederived": {"C": mpstr(Cr), "A": mpstr(Ar)},
            # float-accurate contour route, printed to 17 digits
            "laurent": {"C": repr(Cl), "A": repr(Al), "c_minus2": repr(c2)},
            "kronecker": {"C_e": repr(ce), "c0": repr(c0)},
        }


def cmd_constants(args) -> int:
    write_output(dump_json(constants_json()), args.output)
    return EXIT_OK


# =============================================================================
# Entry point
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="artifact", description="Counting and constants for the blow-up of P^3 along a line.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--output", "-o", default=None, help="write atomically to PATH (default stdout)")

    def counting(p):
        p.add_argument("--bundle", default=None, help="X,Y for L = X*D + Y*E")
        p.add_argument("--grid", default=None, help="B0,RATIO,K")
        p.add_argument("--threads", default=None)
        p.add_argument("--secondary", default=None, help="closed-form | laurent | rederived")
        p.add_argument("--max-radius", dest="max_radius", default=None)
        p.add_argument("--config", default=None, help="key = value file; flags win")
        common(p)

    p = sub.add_parser("count", help="exact point counts")
    counting(p)
    p.add_argument("--bound", default=None)
    p.add_argument("--format", default=None, help="csv | json")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("verify-asymptotic", help="compare counts with the predicted main term")
    counting(p)
    p.add_argument("--tolerance", default=None)
    p.set_defaults(func=cmd_verify_asymptotic)

    p = sub.add_parser("eisenstein", help="E(s, e) by the lattice and/or Fourier route")
    p.add_argument("--s", required=True, help="RE or RE,IM")
    p.add_argument("--route", choices=("lattice", "fourier", "both"), default="both")
    p.add_argument("--eps", type=float, default=1e-10)
    common(p)
    p.set_defaults(func=cmd_eisenstein)

    p = sub.add_parser("local-int", help="non-archimedean local integrals")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--alpha-val", dest="alpha_val", type=int, default=None)
    p.add_argument("--satake", default=None, help="chi as RE,IM")
    p.add_argument("--tau", default=None, help="RE or RE,IM")
    p.add_argument("--oracle", action="store_true")
    common(p)
    p.set_defaults(func=cmd_local_int)

    p = sub.add_parser("peyre", help="leading constant for a bundle")
    p.add_argument("--bundle", required=True)
    common(p)
    p.set_defaults(func=cmd_peyre)

    p = sub.add_parser("constants", help="named and secondary constants")
    common(p)
    p.set_defaults(func=cmd_constants)
    return ap


def _fail(code: str, message: str, status: int) -> int:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")
    return status


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "command", None):
            raise InputError("a command is required")
        return args.func(args)
    except InputError as exc:
        return _fail("bad_input", str(exc), EXIT_INPUT)
    except ArtifactError as exc:
        return _fail(exc.code, str(exc), exc.exit_status)
    except (ValueError, OSError) as exc:
        return _fail("bad_input", str(exc), EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
