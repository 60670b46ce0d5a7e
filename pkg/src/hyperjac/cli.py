"""Command-line entry point.

Every subcommand reads one JSON document (``--input``) and writes one JSON
report (``--output``, default stdout).  Exit status is 0 on success, 1 for
bad input (including malformed JSON) and 2 when a numerical procedure fails;
on failure the report carries the error class name.

Input fields
------------
All subcommands except ``theta`` with a ``period_matrix`` need
``branch_points``: a list of numbers or ``[re, im]`` pairs.  Curve points are
``{"x": z, "w": z}``, ``{"x": z, "sheet": 1}`` or ``{"branch": s}`` (1-based).

=================  ============================================================
``periods``        (curve only)
``theta``          ``u`` (list of vectors) and optionally ``char``, ``convention``
``char``           optional ``u``; always reports the branch point table check
``aj``             ``points``
``locus verify``   ``system`` and ``points`` (random when missing)
``locus trace``    ``system``, ``points``, ``seed_branch``, ``n_steps``
``locus classify`` ``system``, ``points``, ``u``
``eta``            ``R``, ``Q``, ``path`` (``waypoints`` plus ``sheet`` or ``w``)
``demo``           no input; writes ``demo_report.json`` and ``demo_trace.csv``
=================  ============================================================
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .ajmap import aj
from .curvegeom import CurvePoint, PathSpec, sample_points
from .errors import HyperjacError, InputError
from .jacobian import (
    from_char,
    lattice_distance,
    riemann_constants,
    to_char,
    weierstrass_char,
)
from .locus import (
    classify,
    exclusion,
    follow_x_path,
    forward_inclusion,
    isolation,
    reconstruct_w,
    residuals,
    shifted_violation,
    system_g3_pair,
    system_g3_triple,
    system_g4_pairs,
    system_g4_quad,
    trace,
)
from .periods import compute_periods
from .theta import BACKEND, invariant_modulus, prepare, theta_char_parts, theta_parts
from .thirdkind import (
    eta_on_samples,
    eta_walk,
    make_spec,
    oracle_cumulative,
    oracle_third_kind,
)

DATA = Path(__file__).parent / "data"

SYSTEMS = {
    "g3_pair": (system_g3_pair, ("P", "Q")),
    "g3_triple": (system_g3_triple, ("P", "Q", "R")),
    "g4_pairs": (system_g4_pairs, ("P1", "P2", "Q1", "Q2")),
    "g4_quad": (system_g4_quad, ("P1", "P2", "Q1", "Q2", "R1", "R2")),
}


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fingerprint(curve, alignment: str | None = None, convention: str = "half") -> dict:
    """Conventions needed to compare these numbers with another tool."""
    g = curve.genus
    out = {
        "branch_point_order": "as given; P_s is branch_points[s-1]",
        "base_point": f"P_{2 * g + 2}",
        "a_cycles": "a_j encircles the cut [x_{2j-1}, x_{2j}]",
        "b_cycles": "b_j runs from cut j to the last cut [x_{2g+1}, x_{2g+2}]",
        "normalization": "a-periods of du are the identity; Pi = b-periods",
        "characteristic": "u = (eps' + Pi eps) / 2",
        "theta_char_convention": convention,
        "theta_backend": BACKEND,
    }
    if alignment is not None:
        out["riemann_constants"] = f"eps = 1s, eps' alternating, {alignment}-aligned"
    return out


def _points(curve, data, key, names, seed):
    if key in data:
        pts = data[key]
        if not isinstance(pts, dict):
            raise jsonio.MalformedInput(f"{key}: expected an object keyed by {', '.join(names)}")
        return {n: jsonio.point_from(curve, jsonio.require(pts, n), f"{key}.{n}") for n in names}
    drawn = sample_points(curve, len(names), np.random.default_rng((seed, 1)), min_distance=0.3 * curve.min_separation)
    return dict(zip(names, drawn))


def _system(curve, periods, data, seed):
    name = jsonio.require(data, "system")
    if name not in SYSTEMS:
        raise jsonio.MalformedInput(f"system must be one of {sorted(SYSTEMS)}, got {name!r}")
    build, names = SYSTEMS[name]
    pts = _points(curve, data, "points", names, seed)
    return build(curve, periods, *[pts[n] for n in names]), pts


# -- subcommands ----------------------------------------------------------------


def cmd_periods(data, args):
    curve = jsonio.curve_from(data)
    pd = compute_periods(curve)
    pi = pd.period_matrix
    norm = float(np.max(np.sum(np.abs(pi), axis=1)))
    sym = float(np.max(np.sum(np.abs(pi - pi.T), axis=1)))
    eig = float(np.min(np.linalg.eigvalsh(0.5 * (pi.imag + pi.imag.T))))
    tol = 1e-8 if args.tol is None else args.tol
    return {
        "genus": curve.genus,
        "period_matrix": pi,
        "raw_a": pd.raw_a,
        "raw_b": pd.raw_b,
        "normalizer": pd.normalizer,
        "cond_a": pd.cond_a,
        "checks": {
            "symmetry": _check(sym, tol * max(1.0, norm)),
            "min_eig_imag": {"value": eig, "status": "pass" if eig > 0 else "fail"},
        },
        "convention": fingerprint(curve),
    }


def _check(value, tol, above=False):
    ok = value > tol if above else value < tol
    return {"value": float(value), "tol": float(tol), "status": "pass" if ok else "fail"}


def cmd_theta(data, args):
    if "period_matrix" in data:
        pi = prepare(jsonio.to_cmatrix(data["period_matrix"], "period_matrix")).pi
        fp = None
    else:
        curve = jsonio.curve_from(data)
        pi = compute_periods(curve).period_matrix
        fp = fingerprint(curve)
    us = [jsonio.to_cvector(v, f"u[{i}]") for i, v in enumerate(jsonio.require(data, "u"))]
    tol = 1e-12 if args.tol is None else args.tol
    convention = data.get("convention", "half")
    rows = []
    for u in us:
        if len(u) != pi.shape[0]:
            raise jsonio.MalformedInput(f"u has length {len(u)}, genus is {pi.shape[0]}")
        if "char" in data:
            val, grad, log_scale = theta_char_parts(
                jsonio.to_char(data["char"]), u, pi, tol, want_grad=True, convention=convention
            )
            rows.append({"normalized_value": val, "normalized_gradient": grad, "log_scale": log_scale})
        else:
            ev = theta_parts(u, pi, tol, want_grad=True)
            rows.append(
                {
                    "normalized_value": ev.value,
                    "normalized_gradient": ev.grad,
                    "log_scale": ev.log_scale,
                    "error_bound": ev.error_bound,
                    "terms": ev.nterms,
                    "invariant_modulus": invariant_modulus(u, pi, tol),
                }
            )
    out = {"period_matrix": pi, "tol": tol, "values": rows, "note": "theta = normalized_value * exp(log_scale)"}
    if fp is not None:
        out["convention"] = fp
    return out


def table_check(curve, periods, tol=1e-6):
    g = curve.genus
    pi = periods.period_matrix
    rows = []
    for s in range(1, 2 * g + 3):
        u = aj(curve, periods, curve.weierstrass_point(s))
        c = weierstrass_char(s, g)
        d = lattice_distance(u, from_char(c, pi), pi)
        rows.append({"s": s, "char": c, "measured_char": to_char(u, pi), "lattice_distance": d})
    worst = max(r["lattice_distance"] for r in rows)
    return rows, _check(worst, tol)


def cmd_char(data, args):
    curve = jsonio.curve_from(data)
    pd = compute_periods(curve)
    pi = pd.period_matrix
    rows, status = table_check(curve, pd, 1e-6 if args.tol is None else args.tol)
    k, kc, alignment = riemann_constants(curve, pd, seed=args.seed)
    out = {
        "weierstrass": rows,
        "table_check": status,
        "riemann_constants": {"u": k, "char": kc, "alignment": alignment},
        "convention": fingerprint(curve, alignment),
    }
    if "u" in data:
        out["chars"] = [to_char(jsonio.to_cvector(v, "u"), pi) for v in data["u"]]
    return out


def cmd_aj(data, args):
    curve = jsonio.curve_from(data)
    pd = compute_periods(curve)
    pts = [jsonio.point_from(curve, v, f"points[{i}]") for i, v in enumerate(jsonio.require(data, "points"))]
    images = [aj(curve, pd, p) for p in pts]
    return {
        "points": pts,
        "images": images,
        "chars": [to_char(u, pd.period_matrix) for u in images],
        "convention": fingerprint(curve),
    }


def verify_system(system, seed, tol=1e-6, n=50, n_random=200):
    """Forward inclusion, exclusion and isolation checks for a system."""
    scale_tol = tol
    fwd = forward_inclusion(system, n=n, seed=seed)
    out = {"forward_inclusion": {k: _check(v, scale_tol) for k, v in fwd.items()}}
    out["exclusion_min_residual"] = _check(exclusion(system, n=n_random, seed=seed), 1e-3, above=True)
    for ident, p in system.isolated_points:
        out[f"isolation u({ident})"] = _check(isolation(system, p, seed=seed), 1e-8)
    return out


def cmd_locus(data, args):
    curve = jsonio.curve_from(data)
    pd = compute_periods(curve)
    system, pts = _system(curve, pd, data, args.seed)
    tol = 1e-6 if args.tol is None else args.tol
    out = {"system": system.name, "points": pts, "scale": system.scale, "convention": fingerprint(curve, "right")}
    if args.action == "verify":
        out["checks"] = verify_system(system, args.seed, tol, n=int(data.get("n", 50)))
    elif args.action == "trace":
        s = int(data.get("seed_branch", 1))
        seed = from_char(weierstrass_char(s, curve.genus), pd.period_matrix)
        res = trace(system, seed, n_steps=int(data.get("n_steps", 100)), tol=tol, with_w=bool(data.get("with_w", True)))
        out["trace"] = {"steps_rejected": res.steps_rejected, "samples": [_sample_row(curve, s) for s in res.samples]}
        out["max_residual"] = _check(max(s.residual for s in res.samples), tol)
    else:
        us = [jsonio.to_cvector(v, f"u[{i}]") for i, v in enumerate(jsonio.require(data, "u"))]
        out["labels"] = [str(classify(system, u, tol)) for u in us]
    return out


def _sample_row(curve, s):
    row = {"u": s.u, "x": s.x_proj, "residual": s.residual, "spread": s.spread, "flagged": s.flagged}
    if s.w is not None:
        row["w"] = s.w
        row["curve_equation_rel"] = _curve_rel(curve, s.x_proj, s.w)
    return row


def _curve_rel(curve, x, w):
    f = complex(curve.f(x))
    return abs(w * w - f) / max(abs(f), abs(w) ** 2, 1e-300)


def cmd_eta(data, args):
    curve = jsonio.curve_from(data)
    pd = compute_periods(curve)
    R = jsonio.point_from(curve, jsonio.require(data, "R"), "R")
    Q = jsonio.point_from(curve, jsonio.require(data, "Q"), "Q")
    path = jsonio.path_from(curve, jsonio.require(data, "path"))
    spec = make_spec(curve, pd, R, Q)
    inc, windings, steps = eta_walk(curve, pd, spec, path)
    out = {
        "increment": inc,
        "branch_windings": windings,
        "steps": steps,
        "odd_char": spec.odd_char,
        "convention": fingerprint(curve),
    }
    if args.oracle:
        ref = oracle_third_kind(curve, pd, R, Q, path, loops=spec.loops)
        tol = 1e-6 if args.tol is None else args.tol
        out["oracle_value"] = ref
        out["discrepancy"] = _check(abs(inc - ref), tol)
    return out


# -- demo -------------------------------------------------------------------------


def demo(seed: int = 0, tol: float | None = None):
    """End-to-end run on the bundled genus-3 curve; returns ``(report, csv_text)``."""
    data = jsonio.read_json(DATA / "genus3.json")
    curve = jsonio.curve_from(data)
    tol = 1e-6 if tol is None else tol
    report = {"curve": curve.branch_points, "seed": seed, "tolerances": {"residual": tol}}
    pd = compute_periods(curve)
    pi = pd.period_matrix
    norm = float(np.max(np.sum(np.abs(pi), axis=1)))
    checks = {
        "period_symmetry": _check(float(np.max(np.sum(np.abs(pi - pi.T), axis=1))), 1e-8 * max(1.0, norm)),
        "period_min_eig_imag": _check(float(np.min(np.linalg.eigvalsh(pi.imag))), 0.0, above=True),
    }
    report["period_matrix"] = pi
    rows, checks["weierstrass_table"] = table_check(curve, pd)
    report["weierstrass"] = rows
    K, kc, alignment = riemann_constants(curve, pd, seed=seed)
    report["riemann_constants"] = {"u": K, "char": kc, "alignment": alignment}

    # witnesses from their own stream so they never coincide with verification samples
    rng = np.random.default_rng((seed, 1))
    P, Q, R = sample_points(curve, 3, rng, min_distance=0.3 * curve.min_separation)
    triple = system_g3_triple(curve, pd, P, Q, R, K=K)
    fwd = forward_inclusion(triple, n=10, seed=seed)
    for k, v in fwd.items():
        checks[f"triple_forward {k}"] = _check(v, tol)
    iso = triple.isolated_points[0][1]
    checks["triple_isolation"] = _check(isolation(triple, iso, n=10, seed=seed), 1e-8)
    pair_shift = aj(curve, pd, P) + aj(curve, pd, Q)
    checks["triple_third_eq_on_shifted_copy"] = _check(shifted_violation(triple, pair_shift, 2, n=10, seed=seed), 1e-3, above=True)
    checks["triple_exclusion"] = _check(exclusion(triple, n=50, seed=seed), 1e-3, above=True)

    # trace off the Weierstrass seed P_1, then steer x along a quarter loop around cut 1
    seed_u = from_char(weierstrass_char(1, curve.genus), pi)
    res = trace(triple, seed_u, n_steps=8, tol=tol)
    last = res.samples[-1]
    x0, w0 = reconstruct_w(triple, last.u, last.tangent)
    checks["trace_residual"] = _check(max(s.residual for s in res.samples), tol)
    checks["trace_spread"] = _check(max(s.spread for s in res.samples), 1e-6)
    checks["reconstructed_curve_equation"] = _check(_curve_rel(curve, x0, w0), 1e-6)

    bp = curve.branch_points
    centre = 0.5 * (bp[0] + bp[1])
    radius = abs(x0 - centre)
    phase = np.angle(x0 - centre)
    xs = [x0] + [centre + radius * np.exp(1j * (phase + t)) for t in np.linspace(0, np.pi / 2, 25)[1:]]
    walk = follow_x_path(triple, last.u, w0, xs, tol=tol)
    checks["loop_residual"] = _check(max(float(np.max(residuals(triple, u))) for u, _, _ in walk), tol)
    checks["loop_x_tracking"] = _check(max(abs(x - t) for (_, x, _), t in zip(walk, xs)), 1e-9)
    checks["loop_curve_equation"] = _check(max(_curve_rel(curve, x, w) for _, x, w in walk), 1e-6)

    # third-kind integral along the walk: theta quotient on the traced u against quadrature in x
    poles = (CurvePoint(1.7 + 0.8j, complex(curve.w_plus(1.7 + 0.8j))), CurvePoint(-0.2 - 0.9j, -complex(curve.w_plus(-0.2 - 0.9j))))
    spec = make_spec(curve, pd, *poles)
    eta = eta_on_samples(spec, pi, [u for u, _, _ in walk])
    path = PathSpec([x for _, x, _ in walk], CurvePoint(walk[0][1], walk[0][2]))
    ref = oracle_cumulative(curve, pd, *poles, path, loops=spec.loops)
    checks["eta_vs_oracle"] = _check(float(np.max(np.abs(eta - ref))), tol)
    report["third_kind"] = {"R": poles[0], "Q": poles[1], "odd_char": spec.odd_char, "increment": eta[-1], "oracle": ref[-1]}

    report["checks"] = checks
    report["all_pass"] = all(c["status"] == "pass" for c in checks.values())
    report["convention"] = fingerprint(curve, alignment)

    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["phase", "index", "x_re", "x_im", "w_re", "w_im", "max_residual", "eta_re", "eta_im", "oracle_re", "oracle_im"])
    for i, s in enumerate(res.samples):
        wr.writerow(["trace", i, *_fmt(s.x_proj), "", "", _fmt1(s.residual), "", "", "", ""])
    for i, ((u, x, w), e, o) in enumerate(zip(walk, eta, ref)):
        r = float(np.max(residuals(triple, u)))
        wr.writerow(["loop", i, *_fmt(x), *_fmt(w), _fmt1(r), *_fmt(e), *_fmt(o)])
    return report, buf.getvalue()


def _fmt1(v):
    return repr(float(v) + 0.0)


def _fmt(z):
    z = complex(z)
    return _fmt1(z.real), _fmt1(z.imag)


def cmd_demo(data, args):
    report, table = demo(args.seed, args.tol)
    out = Path(args.output or "demo_out")
    out.mkdir(parents=True, exist_ok=True)
    (out / "demo_report.json").write_text(jsonio.dumps(report))
    (out / "demo_trace.csv").write_text(table)
    return None if report["all_pass"] else 2


# -- entry point ------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="hyperjac", description="Hyperelliptic curves in their Jacobians.")
    common = _Parser(add_help=False)
    common.add_argument("--input", help="input JSON document")
    common.add_argument("--output", help="report path (demo: output directory)")
    common.add_argument("--tol", type=float, help="override the pass/fail tolerance")
    common.add_argument("--seed", type=int, default=0, help="seed for sampling-based checks")
    common.add_argument("--oracle", action="store_true", help="enable independent cross-checks")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("periods", "theta", "char", "aj", "eta", "demo"):
        sub.add_parser(name, parents=[common])
    loc = sub.add_parser("locus", parents=[common])
    loc.add_argument("action", choices=["verify", "trace", "classify"])
    return p


COMMANDS = {
    "periods": cmd_periods,
    "theta": cmd_theta,
    "char": cmd_char,
    "aj": cmd_aj,
    "locus": cmd_locus,
    "eta": cmd_eta,
}


def _emit(report, output):
    text = jsonio.dumps(report)
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    output = None
    try:
        args = build_parser().parse_args(argv)
        output = args.output
        if args.command == "demo":
            return cmd_demo(None, args) or 0
        if not args.input:
            raise UsageError(f"{args.command} needs --input")
        data = jsonio.read_json(args.input)
        report = COMMANDS[args.command](data, args)
        _emit({"status": "ok", "command": args.command, "result": report}, output)
        return 0
    except HyperjacError as exc:
        code = 1 if isinstance(exc, InputError) else 2
        if isinstance(exc, UsageError):
            sys.stderr.write(f"hyperjac: {exc}\n")
        report = {"status": "error", "error": type(exc).__name__, "message": str(exc)}
        if output and not (Path(output).is_dir()):
            _emit(report, output)
        else:
            sys.stderr.write(jsonio.dumps(report))
        return code


if __name__ == "__main__":
    sys.exit(main())
