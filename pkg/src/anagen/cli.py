"""Command-line interface: ``anagen verify | continue | counterexample | demo``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import SuiteConfig, apply_tolerance_overrides, load_config, parse_complex, parse_element, parse_group
from .continuation import CounterexampleF, counterexample_norm_gap, counterexample_weak_continuity, spike_lower_bound
from .errors import AnagenError, ConfigInvalid, ParseError
from .report import CheckReport
from .suite import run_suite, summarize

RECORD_FIELDS = ("name", "anchor", "inputs_digest", "residual", "tolerance", "passed")


def _use_color(stream) -> bool:
    return "NO_COLOR" not in os.environ and hasattr(stream, "isatty") and stream.isatty()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def render_json(rows: Sequence[dict]) -> str:
    return json.dumps([{k: _json_value(v) for k, v in r.items()} for r in rows], indent=1, allow_nan=False) + "\n"


def render_csv(rows: Sequence[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\r\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def render_summary(reports: Sequence[CheckReport], color: bool = False) -> str:
    def paint(text: str, code: str) -> str:
        return f"\033[{code}m{text}\033[0m" if color else text

    lines = []
    width = max((len(r.name) for r in reports), default=4)
    for r in reports:
        tag = paint("PASS", "32") if r.passed else paint("FAIL", "31")
        lines.append(f"{tag}  {r.name:<{width}}  residual={r.residual:.3e}  tol={r.tolerance:.1e}")
    passed, failed = summarize(list(reports))
    lines.append(f"{passed} passed, {failed} failed, {len(reports)} checks")
    return "\n".join(lines) + "\n"


def _config(args) -> SuiteConfig:
    cfg = load_config(args.config) if args.config else SuiteConfig()
    cfg = cfg.with_overrides(seed=args.seed, format=args.format, output=Path(args.out) if args.out else None)
    return apply_tolerance_overrides(cfg, args.tol or [])


def cmd_verify(args) -> int:
    cfg = _config(args)
    reports = run_suite(cfg)
    rows = [r.record() for r in reports]
    summary = render_summary(reports)
    if cfg.output is not None:
        text = render_json(rows) if cfg.format == "json" else render_csv(rows, RECORD_FIELDS)
        cfg.output.write_text(text, encoding="utf-8", newline="")
        cfg.output.with_name(cfg.output.name + ".summary.txt").write_text(summary, encoding="utf-8")
    sys.stdout.write(render_summary(reports, _use_color(sys.stdout)))
    return 0 if all(r.passed for r in reports) else 1


def cmd_continue(args) -> int:
    from .smearing import alpha_z_quadrature

    group = parse_group(args.group)
    z = parse_complex(args.z)
    x = parse_element(args.element, group)
    spectral = group.alpha(z, x).reshape(-1)
    quad = alpha_z_quadrature(group, z, x, n=args.n).reshape(-1)
    scale = max(float(np.max(np.abs(spectral), initial=0.0)), 1e-300)
    disc = float(np.max(np.abs(spectral - quad), initial=0.0)) / scale
    rows = [
        {
            "index": k,
            "spectral_re": float(s.real),
            "spectral_im": float(s.imag),
            "quadrature_re": float(q.real),
            "quadrature_im": float(q.imag),
            "abs_diff": float(abs(s - q)),
        }
        for k, (s, q) in enumerate(zip(spectral, quad))
    ]
    if args.format == "csv":
        sys.stdout.write(render_csv(rows, list(rows[0])))
        sys.stdout.write(f"# discrepancy (relative, max-entry) = {disc:.3e}\r\n")
    elif args.format == "json":
        sys.stdout.write(render_json(rows + [{"discrepancy": disc}]))
    else:
        sys.stdout.write(f"alpha_z(x) for {group!r}, z = {z}\n")
        sys.stdout.write(f"{'k':>4}  {'spectral':>28}  {'quadrature':>28}  {'|diff|':>9}\n")
        for r in rows:
            sp = complex(r["spectral_re"], r["spectral_im"])
            qu = complex(r["quadrature_re"], r["quadrature_im"])
            sys.stdout.write(f"{r['index']:>4}  {sp:>28.15g}  {qu:>28.15g}  {r['abs_diff']:9.2e}\n")
        sys.stdout.write(f"discrepancy (relative, max-entry) = {disc:.3e}\n")
    return 0


def counterexample_rows(power: int, N: int, n_min: int, n_max: int, spike: bool = False) -> list[dict]:
    F = CounterexampleF.power_schedule(N, power)
    a = 2.0 ** -np.arange(1, N + 1)
    rep = counterexample_weak_continuity(F, a, n_max, n_min)
    rows = []
    for n, w in zip(rep.values["n"], rep.values["pairing"]):
        row = {"n": n, "norm_gap": counterexample_norm_gap(F, n), "weak_pairing": w}
        if spike:
            row["spike_lower_bound"] = spike_lower_bound(F, n)
        rows.append(row)
    return rows


def cmd_counterexample(args) -> int:
    N = args.N
    n_min = args.n_min if args.n_min is not None else min(10, N)
    n_max = args.n_max if args.n_max is not None else min(40, N)
    if not 1 <= n_min <= n_max <= N:
        raise ConfigInvalid(f"need 1 <= n_min <= n_max <= N, got {n_min}, {n_max}, {N}")
    rows = counterexample_rows(args.power, N, n_min, n_max, args.spike)
    text = render_json(rows) if args.format == "json" else render_csv(rows, list(rows[0]))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)
    return 0


def _demo_domain_gap() -> str:
    from .graph_structures import graph_intersection_check
    from .group_models import DiagonalGroup, GeometricSequence, build_corner

    r = graph_intersection_check(build_corner(DiagonalGroup.integer_model(8)), GeometricSequence(1.0, -1.0))
    v = r.values
    return (
        "x = (e^{-n})_{n>=0}, z = -i, lambda_n = n\n"
        f"  in D(alpha_z) for the l-infinity model: {v['in_linf_domain']}\n"
        f"  in D(alpha_z) for the c0 model:         {v['in_c0_domain']}\n"
        f"  alpha_z(x) = {np.round(v['truncated_image'].real, 12).tolist()} ...\n"
    )


def _demo_hinfty() -> str:
    from .graph_structures import hinfty_basis
    from .group_models import ImplementedGroup

    d = 4
    sub = hinfty_basis(ImplementedGroup(np.diag(np.log(np.arange(1, d + 1, dtype=float)))))
    grid = [["x" if (j, k) in sub.units else "." for k in range(d)] for j in range(d)]
    return "H^infty units for P = diag(1, 2, 3, 4):\n" + "\n".join("  " + " ".join(row) for row in grid) + "\n"


def _demo_modular() -> str:
    from .matrix_core import matrix_unit
    from .modular import FaithfulState, build_modular, verify_kms

    md = build_modular(FaithfulState.from_eigenvalues([2 / 3, 1 / 3]))
    e12 = matrix_unit(2, 0, 1)
    lines = ["rho = diag(2/3, 1/3)", "  Delta on vec(M_2) (row-major):"]
    lines += ["    " + " ".join(f"{v:5.2f}" for v in row) for row in md.Delta.real]
    lines.append(f"  KMS(e12, 2 e12) = {verify_kms(md, e12, 2 * e12)}; KMS(e12, e12) = {verify_kms(md, e12, e12)}")
    return "\n".join(lines) + "\n"


def _demo_smearing() -> str:
    from .group_models import DiagonalGroup
    from .smearing import SmearingOperator, smear

    lam = np.arange(-3, 4, dtype=float)
    lines = ["R_n on e_lambda: quadrature vs exp(-lambda^2/(4n^2))"]
    for n in (0.5, 1.0, 2.0):
        got = smear(SmearingOperator(n), DiagonalGroup(lam), np.ones(lam.size)).real
        err = np.max(np.abs(got - np.exp(-(lam**2) / (4 * n * n))))
        lines.append(f"  n={n:<4} " + " ".join(f"{v:.6f}" for v in got) + f"   max err {err:.1e}")
    return "\n".join(lines) + "\n"


def _demo_counterexample() -> str:
    rows = counterexample_rows(3, 64, 10, 40)
    out = [f"{'n':>3}  {'norm_gap':>10}  {'weak_pairing':>12}"]
    out += [f"{r['n']:>3}  {r['norm_gap']:10.6f}  {r['weak_pairing']:12.4e}" for r in rows[::5]]
    return "\n".join(out) + "\n"


DEMOS = {
    "domain-gap": _demo_domain_gap,
    "hinfty": _demo_hinfty,
    "modular": _demo_modular,
    "smearing": _demo_smearing,
    "counterexample": _demo_counterexample,
}


def cmd_demo(args) -> int:
    if args.name == "list":
        sys.stdout.write("\n".join(sorted(DEMOS)) + "\n")
        return 0
    sys.stdout.write(DEMOS[args.name]())
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", metavar="PATH", help="write the machine-readable output here")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance (repeatable)")

    p = argparse.ArgumentParser(prog="anagen", description="Verify analytic-generator identities on finite carriers.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the full verification suite")
    v.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("continue", parents=[common], help="alpha_z(x) via spectral calculus and via quadrature")
    c.add_argument("--group", required=True, help="e.g. integer[4], diagonal[0,1.5], corner[3], implemented[0,1]")
    c.add_argument("--z", required=True, help="complex exponent, e.g. -i or 0.5-1i (write --z=-i)")
    c.add_argument("--element", required=True, help="e.g. delta[1], unit[0,1], vec[1,0,2i], ones")
    c.add_argument("--n", type=float, default=1.0, help="smearing parameter of the quadrature path")
    c.add_argument("--format", choices=("text", "json", "csv"), default="text")
    c.set_defaults(func=cmd_continue)

    ce = sub.add_parser("counterexample", parents=[common], help="norm gap vs weak pairing table")
    ce.add_argument("--power", type=int, default=3, help="k_m = m**power")
    ce.add_argument("--N", type=int, default=64, help="number of components")
    ce.add_argument("--n-min", type=int, default=None)
    ce.add_argument("--n-max", type=int, default=None)
    ce.add_argument("--spike", action="store_true", help="include the n-th component lower bound")
    ce.add_argument("--format", choices=("json", "csv"), default="csv")
    ce.set_defaults(func=cmd_counterexample)

    d = sub.add_parser("demo", parents=[common], help="small illustrative tables")
    d.add_argument("name", choices=sorted(DEMOS) + ["list"])
    d.set_defaults(func=cmd_demo)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ConfigInvalid) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except AnagenError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
