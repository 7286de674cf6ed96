"""Command-line interface: ``expwell <command> [flags]``.

All output is CSV (comma, LF, header row).  Numbers are printed with 17
significant digits; columns ending in ``_lo`` are rounded down and those
ending in ``_hi`` rounded up, so a printed bracket still encloses the
computed one.

Exit codes: 0 success, 2 bad flags, 3 verification mismatch, 4 computation
failure.
"""
from __future__ import annotations

import argparse
import csv
import decimal
import io
import sys
from typing import Sequence

import mpmath
import numpy as np

from . import checks, datasets
from .oracle import DomainTooSmall
from .rootfind import DEFAULT_K_TOL, DEFAULT_MARGIN, LostSignChange, MissedRootError
from .secular import ImaginaryResidueError, Parity, coupling
from .specfun import PrecisionExhausted, PrecisionPolicy

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISMATCH = 3
EXIT_COMPUTE = 4

DIGITS = 17

COMPUTE_ERRORS = (PrecisionExhausted, MissedRootError, LostSignChange, DomainTooSmall,
                  ImaginaryResidueError)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting

def _decimal(x, rounding) -> str:
    """Exact binary value of x rounded to DIGITS significant digits."""
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    man, exp = (-1) ** sign * int(man), int(exp)
    if man == 0:
        return "0"
    ctx = decimal.Context(prec=DIGITS, rounding=rounding)
    if exp >= 0:
        d = ctx.plus(decimal.Decimal(man << exp))
    else:
        d = ctx.divide(decimal.Decimal(man), decimal.Decimal(1 << -exp))
    d = d.normalize(ctx)
    return format(d, "f") if -6 <= d.adjusted() < DIGITS else format(d, "E")


def format_cell(value, column: str = "") -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    if isinstance(value, (mpmath.mpc, complex)):
        raise TypeError(f"complex value in column {column!r}")
    if not mpmath.isfinite(value):
        return str(float(value))
    if isinstance(value, float) and not column.endswith(("_lo", "_hi")):
        return repr(value)  # shortest round-trip form
    if column.endswith("_lo"):
        rounding = decimal.ROUND_FLOOR
    elif column.endswith("_hi"):
        rounding = decimal.ROUND_CEILING
    else:
        rounding = decimal.ROUND_HALF_EVEN
    return _decimal(value, rounding)


def write_csv(header: Sequence[str], rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_cell(v, c) for v, c in zip(row, header)])


# ---------------------------------------------------------------------------
# argument parsing

def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    parse.__name__ = f"positive {kind.__name__}"
    return parse


pos_float = _positive(float)
pos_int = _positive(int)


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _add_coupling(p, default_g2=None):
    grp = p.add_mutually_exclusive_group(required=default_g2 is None)
    grp.add_argument("--g", type=pos_float, help="coupling g (exclusive with --g2)")
    note = f" (default {default_g2})" if default_g2 is not None else ""
    grp.add_argument("--g2", type=pos_float, help=f"squared coupling g^2{note}")
    p.set_defaults(default_g2=default_g2)


def _add_precision(p):
    p.add_argument("--base-bits", type=pos_int, default=128,
                   help="starting working precision in bits (default 128)")
    p.add_argument("--max-bits", type=pos_int, default=8192,
                   help="precision ceiling in bits (default 8192)")
    p.add_argument("--target-digits", type=pos_float, default=30.0,
                   help="target relative accuracy in decimal digits (default 30)")
    p.add_argument("-o", "--output", help="write CSV here instead of stdout")


def _add_grid(p, name, lo, hi, steps, what):
    p.add_argument(f"--{name}-min", type=pos_float, default=lo, help=f"smallest {what} (default {lo})")
    p.add_argument(f"--{name}-max", type=pos_float, default=hi, help=f"largest {what} (default {hi})")
    p.add_argument(f"--{name}-steps", type=pos_int, default=steps,
                   help=f"number of {what} values (default {steps})")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="expwell",
        description="Bound states of -psi'' + g^2 exp|x| psi = E psi.",
        epilog="Exit codes: 0 ok, 2 bad flags, 3 verification mismatch, 4 computation failure.")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    s = sub.add_parser("spectrum", help="energy brackets E_lo < E_n < E_hi for n = 0..n_max")
    _add_coupling(s)
    s.add_argument("--n-max", type=_nonneg_int, default=8, help="highest level (default 8)")
    s.add_argument("--method", choices=("asymptotic", "regular", "both"), default="both",
                   help="secular method (default both, side by side)")
    s.add_argument("--R", type=pos_float,
                   help="fixed Dirichlet cutoff for the regular method (default x0 + margin per level)")
    s.add_argument("--margin", type=pos_float, default=DEFAULT_MARGIN,
                   help=f"cutoff margin past the turning point (default {DEFAULT_MARGIN})")
    s.add_argument("--k-tol", type=pos_float, default=DEFAULT_K_TOL,
                   help=f"bracket width in k (default {DEFAULT_K_TOL:g})")
    s.add_argument("--oracle", action="store_true", help="add Numerov oracle columns")
    _add_precision(s)

    t = sub.add_parser("table1", help="even brackets for n = 0, 2, 4 against the reference table")
    _add_coupling(t, default_g2=2.0)
    t.add_argument("--method", choices=("regular", "asymptotic"), default="regular",
                   help="secular method (default regular with the tabulated R)")
    t.add_argument("--R", type=pos_float, help="override every row's cutoff")
    t.add_argument("--k-tol", type=pos_float, default=DEFAULT_K_TOL,
                   help=f"bracket width in k (default {DEFAULT_K_TOL:g})")
    _add_precision(t)

    f3 = sub.add_parser("figure3", help="odd secular surface over a (g, k) grid")
    _add_grid(f3, "g", 0.1, 3.0, 30, "g")
    _add_grid(f3, "k", 0.1, 10.0, 100, "k")
    _add_precision(f3)

    f4 = sub.add_parser("figure4", help="odd zero curves k_n(g)")
    _add_grid(f4, "g", 0.1, 5.0, 50, "g")
    f4.add_argument("--n-max", type=_nonneg_int, default=45, help="highest odd level (default 45)")
    f4.add_argument("--k-tol", type=pos_float, default=1e-8, help="bracket width in k (default 1e-8)")
    _add_precision(f4)

    f5 = sub.add_parser("figure5", help="regular wavefunctions at k_n -+ delta")
    _add_coupling(f5, default_g2=2.0)
    f5.add_argument("--n", type=_nonneg_int, default=8, help="level (default 8)")
    f5.add_argument("--delta", type=pos_float, default=1e-4, help="offset in k (default 1e-4)")
    f5.add_argument("--r-max", type=pos_float, default=5.0, help="end of the r grid (default 5)")
    f5.add_argument("--step", type=pos_float, default=0.01, help="r grid step (default 0.01)")
    _add_precision(f5)

    f6 = sub.add_parser("figure6", help="zero curves inside a k window for large g")
    f6.add_argument("--g-min", type=pos_float, default=6.0, help="open lower g end (default 6)")
    f6.add_argument("--g-max", type=pos_float, default=10.0, help="open upper g end (default 10)")
    f6.add_argument("--g-steps", type=pos_int, default=7,
                    help="interior g values, endpoints excluded (default 7)")
    f6.add_argument("--k-min", type=pos_float, default=25.0, help="window start (default 25)")
    f6.add_argument("--k-max", type=pos_float, default=40.0, help="window end (default 40)")
    f6.add_argument("--parity", choices=("even", "odd"), default="even", help="(default even)")
    f6.add_argument("--k-tol", type=pos_float, default=1e-8, help="bracket width in k (default 1e-8)")
    _add_precision(f6)

    w = sub.add_parser("wavefunction", help="psi on a grid for level n or a trial k")
    _add_coupling(w)
    which = w.add_mutually_exclusive_group(required=True)
    which.add_argument("--n", type=_nonneg_int, help="level index (k from the asymptotic method)")
    which.add_argument("--k", type=pos_float, help="trial momentum (needs --parity)")
    w.add_argument("--parity", choices=("even", "odd"), help="parity for --k")
    w.add_argument("--representation", choices=("asymptotic", "regular", "fullline"),
                   default="regular", help="(default regular)")
    w.add_argument("--r-max", type=pos_float, default=5.0, help="grid end (default 5)")
    w.add_argument("--step", type=pos_float, default=0.01, help="grid step (default 0.01)")
    _add_precision(w)

    c = sub.add_parser("check", help="run the acceptance suite")
    c.add_argument("--fast", action="store_true", help="only the quick checks (< 60 s)")
    c.add_argument("--only", type=pos_int, nargs="+", metavar="N", help="run these criteria")
    _add_precision(c)
    return p


def _policy(args) -> PrecisionPolicy:
    try:
        return PrecisionPolicy(base_bits=args.base_bits, max_bits=args.max_bits,
                               target_rel_err=10.0 ** -args.target_digits)
    except ValueError as exc:
        raise UsageError(str(exc))


def _g(args):
    if args.g is not None:
        return coupling(g=args.g)
    if args.g2 is not None:
        return coupling(g2=args.g2)
    return coupling(g2=args.default_g2)


def _linspace(lo, hi, steps):
    if hi < lo:
        raise UsageError("grid maximum is below its minimum")
    if steps == 1:
        return [float(lo)]
    return [float(v) for v in np.linspace(lo, hi, steps)]


# ---------------------------------------------------------------------------
# commands; each returns (exit code, header, rows)

def cmd_spectrum(args, err):
    header, rows = datasets.spectrum_rows(_g(args), args.n_max, args.method, _policy(args),
                                          args.k_tol, args.margin, args.R, args.oracle)
    return EXIT_OK, header, rows


def cmd_table1(args, err):
    g = _g(args)
    table = datasets.table1(g, args.method, args.k_tol, _policy(args), args.R)
    header = ("n", "E_lo", "E_hi", "R", "x0", "reference_lo", "reference_hi", "intersects")
    rows = [[r.ref.n, r.bracket.E_lo, r.bracket.E_hi, r.R, round(r.x0, 2),
             r.ref.E_lo, r.ref.E_hi, r.intersects] for r in table]
    print(f"{'n':>2} {'E lower':>14} {'E upper':>14} {'R':>5} {'x0':>5}   reference", file=err)
    for r in table:
        R = "" if r.R is None else f"{r.R:.1f}"
        mark = "" if r.intersects else "   MISMATCH"
        print(f"{r.ref.n:>2} {float(r.bracket.E_lo):14.9f} {float(r.bracket.E_hi):14.9f} "
              f"{R:>5} {r.x0:5.2f}   ({r.ref.E_lo}, {r.ref.E_hi}){mark}", file=err)
    bad = [r for r in table if not r.intersects]
    for r in bad:
        lo, hi = float(r.bracket.E_lo), float(r.bracket.E_hi)
        ref_lo, ref_hi = float(r.ref.E_lo), float(r.ref.E_hi)
        gap = ref_lo - hi if hi <= ref_lo else lo - ref_hi
        side = "below" if hi <= ref_lo else "above"
        print(f"mismatch n={r.ref.n}: computed bracket lies {gap:.3g} {side} the reference",
              file=err)
    return (EXIT_MISMATCH if bad else EXIT_OK), header, rows


def cmd_figure3(args, err):
    return EXIT_OK, *datasets.figure3_rows(_linspace(args.g_min, args.g_max, args.g_steps),
                                           _linspace(args.k_min, args.k_max, args.k_steps),
                                           _policy(args))


def cmd_figure4(args, err):
    return EXIT_OK, *datasets.figure4_rows(_linspace(args.g_min, args.g_max, args.g_steps),
                                           args.n_max, _policy(args), args.k_tol)


def cmd_figure5(args, err):
    header, rows, _ = datasets.figure5_rows(_g(args), args.n, args.delta, args.r_max, args.step,
                                            _policy(args))
    return EXIT_OK, header, rows


def cmd_figure6(args, err):
    if not args.k_max > args.k_min:
        raise UsageError("--k-max must exceed --k-min")
    grid = _linspace(args.g_min, args.g_max, args.g_steps + 2)[1:-1]
    return EXIT_OK, *datasets.figure6_rows(grid, (args.k_min, args.k_max), _policy(args),
                                           args.k_tol, Parity(args.parity))


def cmd_wavefunction(args, err):
    from .rootfind import parity_roots
    g = _g(args)
    policy = _policy(args)
    if args.k is not None:
        if args.parity is None:
            raise UsageError("--k needs --parity")
        parity, k = Parity(args.parity), args.k
    else:
        parity = Parity.of_level(args.n)
        if args.parity is not None and Parity(args.parity) is not parity:
            raise UsageError(f"level {args.n} is not {args.parity}")
        k = parity_roots(g, parity, args.n // 2 + 1, "asymptotic", policy)[args.n // 2].k_mid
    grid = np.round(np.arange(0.0, args.r_max + args.step / 2, args.step), 12)
    return EXIT_OK, *datasets.wavefunction_rows(g, k, parity, args.representation, grid, policy)


def cmd_check(args, err):
    policy = _policy(args)
    results = checks.run_checks(fast=args.fast, policy=policy, numbers=args.only,
                                on_result=lambda r: print(r.line, file=err, flush=True))
    header = ("criterion", "title", "status", "seconds", "detail")
    rows = [[r.number, r.title, "pass" if r.passed else "fail", round(r.seconds, 2), r.detail]
            for r in results]
    return (EXIT_OK if all(r.passed for r in results) else EXIT_MISMATCH), header, rows


COMMANDS = {
    "spectrum": cmd_spectrum,
    "table1": cmd_table1,
    "figure3": cmd_figure3,
    "figure4": cmd_figure4,
    "figure5": cmd_figure5,
    "figure6": cmd_figure6,
    "wavefunction": cmd_wavefunction,
    "check": cmd_check,
}


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code, header, rows = COMMANDS[args.command](args, stderr)
    except UsageError as exc:
        print(f"expwell: error: {exc}", file=stderr)
        return EXIT_USAGE
    except COMPUTE_ERRORS as exc:
        print(f"expwell: computation failed: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_COMPUTE
    buf = io.StringIO()
    write_csv(header, rows, buf)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        stdout.write(buf.getvalue())
    return code


def run() -> None:
    sys.exit(main())
