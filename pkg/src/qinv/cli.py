"""Command-line front end.

Exit codes: 0 success, 1 input or validation error, 2 solver did not converge.
Data goes to stdout (or ``-o``), diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import chancore, classical, ensembles, io
from .fidelity import avg_fidelity, corrected_fidelity, fidelity_bounds, fidelity_report
from .qinvert import analytic
from .qinvert.lp import LpOptions, quasi_inverse_lp
from .qinvert.result import QiResult

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code; 2 is reserved for non-convergence."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _emit(obj, path=None) -> None:
    text = io.dump_json(obj, path)
    if path is None:
        sys.stdout.write(text + "\n")


def _lp_options(args) -> LpOptions:
    return LpOptions(tol_psd=args.tol_psd, max_cuts=args.max_cuts, seed=args.seed, mode=args.lp_mode,
                     n_random=args.n_random, restarts=args.restarts, iters=args.iters)


def _add_lp_flags(p: argparse.ArgumentParser, seed_required=False) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--tol-psd", type=float, default=1e-8, help="positivity tolerance of the returned Choi matrix")
    g.add_argument("--max-cuts", type=int, default=500)
    g.add_argument("--lp-mode", choices=["cutting", "random"], default="cutting",
                   help="'random' solves once over a fixed random constraint sample")
    g.add_argument("--n-random", type=int, default=None, help="constraint sample size in random mode")
    g.add_argument("--restarts", type=int, default=20, help="random starts of the unitary optimizer")
    g.add_argument("--iters", type=int, default=500, help="iterations per unitary start")
    g.add_argument("--seed", type=int, required=seed_required, default=None if seed_required else 0)


def _load_quantum(path) -> chancore.Channel:
    ch = io.read_channel(path)
    report = ch.validate()
    if not report.ok:
        raise CliError(f"{path}: not a valid channel (min eigenvalue {report.min_eig:.3g}, "
                       f"TP residual {report.tp_residual:.3g})")
    return ch


def analytic_qi(ch: chancore.Channel) -> QiResult | None:
    """Closed-form quasi-inverse for a tagged channel, or ``None`` if no formula applies."""
    tag = ch.tag or {}
    fam, prm = tag.get("family"), tag.get("params", {})
    if fam == "depolarizing":
        return analytic.qi_depolarizing(prm["d"], prm["q"])
    if fam == "transverse_depolarizing":
        return analytic.qi_transverse_depolarizing(prm["d"], prm["w"])
    if fam == "pauli":
        return analytic.qi_orthogonal_mixed_unitary(prm["p"], chancore.PAULI)
    if fam == "mixed_unitary":
        us = [io.decode_complex(u, "tag.unitaries") for u in prm["unitaries"]]
        try:
            return analytic.qi_orthogonal_mixed_unitary(prm["weights"], us)
        except ValueError as exc:
            print(f"note: {exc}", file=sys.stderr)
            return None
    if fam in ("landau_streater", "orthogonal_conjugations"):
        return analytic.qi_orthogonal_conjugations(ch.kraus())
    if fam == "commuting_unitary":
        return analytic.qi_commuting_unitary(prm["weights"], prm["phases"])
    if fam == "spin1_dephasing":
        return analytic.qi_commuting_unitary(prm["probs"], [[t, 0.0, -t] for t in prm["taus"]])
    return None


def cmd_qi(args) -> int:
    kind = args.kind
    if kind == "auto":
        kind = "classical" if io.is_stochastic_file(args.input) else "quantum"
    if kind == "classical":
        res = classical.classical_quasi_inverse(io.read_stochastic(args.input))
        _emit(io.classical_result_to_json(res), args.output)
        return EXIT_OK
    ch = _load_quantum(args.input)
    res = analytic_qi(ch) if args.analytic else None
    if res is None:
        res = quasi_inverse_lp(ch.superop(), _lp_options(args))
    elif res.bound is None:
        res.bound = fidelity_bounds(ch.choi(), args.restarts, args.iters, args.seed)
    _emit(io.qi_result_to_json(res), args.output)
    if not res.converged:
        print(f"warning: solver stopped without converging ({res.solver.get('termination')})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_fidelity(args) -> int:
    ch = _load_quantum(args.input)
    phi = ch.superop()
    if args.with_channel:
        corr = _load_quantum(args.with_channel).superop()
        if corr.shape != phi.shape:
            raise CliError(f"dimension mismatch: {ch.dim} vs {int(round(np.sqrt(corr.shape[0])))}")
        _emit({"fidelity_before": avg_fidelity(phi), "corrected_fidelity": corrected_fidelity(corr, phi)},
              args.output)
        return EXIT_OK
    rep = fidelity_report(phi)
    b = fidelity_bounds(ch.choi(), args.restarts, args.iters, args.seed)
    _emit({"avg_fidelity": rep.avg_fidelity, "ent_fidelity": rep.ent_fidelity, "trace_phi": rep.trace_phi,
           "bounds": {"lower": b.lower, "upper": b.upper, "p_max": b.p_max, "fef": b.fef,
                      "fef_witness": b.fef_witness}}, args.output)
    return EXIT_OK


def _json_arg(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc.msg}") from None


def cmd_construct(args) -> int:
    name = args.name.replace("-", "_")
    need = {
        "depolarizing": ("dim", "q"),
        "transverse_depolarizing": ("dim", "w"),
        "werner_holevo": ("dim",),
        "pauli": ("p",),
        "landau_streater": ("j",),
        "stretch": ("d1", "d2", "m1", "m2"),
        "spin1_dephasing": ("taus", "probs"),
        "commuting_unitary": ("weights", "phases"),
        "mixed_unitary": ("weights", "unitaries"),
        "orthogonal_conjugations": ("ops",),
    }
    if name not in need:
        raise CliError(f"unknown family {args.name!r}; choose from {sorted(need)}")
    missing = [k for k in need[name] if getattr(args, k) is None]
    if missing:
        raise CliError(f"{args.name} needs --{', --'.join(m.replace('_', '-') for m in missing)}")
    a = args
    if name == "depolarizing":
        ch = chancore.depolarizing(a.dim, a.q)
    elif name == "transverse_depolarizing":
        ch = chancore.transverse_depolarizing(a.dim, a.w)
    elif name == "werner_holevo":
        ch = chancore.werner_holevo(a.dim)
    elif name == "pauli":
        ch = chancore.pauli(a.p)
    elif name == "landau_streater":
        ch = chancore.landau_streater(a.j)
    elif name == "stretch":
        ch = chancore.stretch_channel(a.d1, a.d2, a.m1, a.m2)
    elif name == "spin1_dephasing":
        ch = chancore.spin1_dephasing(a.taus, a.probs)
    elif name == "commuting_unitary":
        ch = chancore.commuting_unitary_mixture(a.weights, a.phases)
    elif name == "mixed_unitary":
        ch = chancore.mixed_unitary(a.weights, [io.decode_complex(u, "--unitaries") for u in a.unitaries])
    else:
        ch = chancore.orthogonal_conjugations([io.decode_complex(x, "--ops") for x in a.ops])
    if args.form:
        ch = ch.to_form(args.form)
    if args.output:
        io.write_channel(ch, args.output)
    else:
        _emit(io.channel_to_json(ch))
    return EXIT_OK


def _parse_sweep(text: str) -> list[int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError("expected DMIN..DMAX")
    lo, hi = int(lo), int(hi)
    if lo < 2 or hi < lo:
        raise argparse.ArgumentTypeError("need 2 <= DMIN <= DMAX")
    return list(range(lo, hi + 1))


def _parse_grid(text: str) -> np.ndarray:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return np.linspace(float(eval_num(start)), float(eval_num(stop)), int(num))
        return np.array([eval_num(x) for x in text.split(",")], dtype=float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def eval_num(text: str) -> float:
    """Float literal, optionally a multiple of ``pi`` such as ``2pi`` or ``0.5*pi``."""
    t = text.strip().lower().replace("*", "")
    if t.endswith("pi"):
        head = t[:-2]
        return (float(head) if head else 1.0) * np.pi
    return float(t)


def _summary_row(s: ensembles.EnsembleStats) -> dict:
    row = {"d": s.d, "n": s.n, "mean_before": s.before.mean, "se_before": s.before.se,
           "mean_after_qi": s.after_qi.mean, "se_after_qi": s.after_qi.se}
    for key in ("after_unitary", "jam_purity", "unitality", "var_before"):
        est = getattr(s, key)
        if est is not None:
            row[f"mean_{key}"] = est.mean
            row[f"se_{key}"] = est.se
    row["excluded"] = s.excluded
    return row


def cmd_ensemble(args) -> int:
    out = Path(args.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(f"cannot write to {out}: {exc}") from None
    dims = args.sweep or [args.dim]
    if dims == [None]:
        raise CliError("give --dim or --sweep")
    n = args.n
    if n is None:
        n = 100_000 if args.mode == "classical" else (500 if max(dims) <= 3 else 200)
    stats = []
    for d in dims:
        cfg = ensembles.EnsembleConfig(d, n, args.seed, args.mode, _lp_options(args), args.jobs)
        if args.mode == "quantum":
            s, rows = ensembles.run_quantum_ensemble(cfg)
            fields = ensembles.QUANTUM_CSV_FIELDS
        else:
            s, table = ensembles.run_classical_ensemble(cfg)
            rows = ensembles.classical_rows(d, table)
            fields = ensembles.CLASSICAL_CSV_FIELDS
        if not args.summary_only:
            ensembles.write_rows(out / f"{args.mode}_d{d}.csv", rows, fields)
        stats.append(s)
        print(f"d={d}: mean_before={s.before.mean:.6f} mean_after={s.after_qi.mean:.6f}", file=sys.stderr)
    summary = {"mode": args.mode, "seed": args.seed, "n": n, "stats": [s.to_dict() for s in stats]}
    ensembles.write_rows(out / f"{args.mode}_summary.csv", [_summary_row(s) for s in stats],
                         list(_summary_row(stats[0]).keys()))
    fit = None
    if args.fit:
        if args.mode != "classical" or len(dims) < 2:
            raise CliError("--fit needs --mode classical and a --sweep over at least two dimensions")
        fit = classical.power_law_fit(dims, [s.after_qi.mean for s in stats])
        summary["fit"] = {"c": fit[0], "exponent": fit[1]}
    io.dump_json(summary, out / f"{args.mode}_summary.json")
    if args.plot:
        from . import plotting

        plotting.plot_sweep(stats, out / f"{args.mode}_fidelity.png", fit)
    if args.mode == "quantum" and any(s.excluded for s in stats):
        print("warning: some LP solves did not converge; they are excluded from the means", file=sys.stderr)
    _emit(summary)
    return EXIT_OK


def cmd_spin1(args) -> int:
    points = ensembles.spin1_sweep(args.p_grid, args.tau0_grid, args.grid)
    rows = [{"p": pt.p, "tau0": pt.tau0, "f_before": pt.f_before, "f_after": pt.f_after,
             "delta": pt.delta, "tau_m": pt.tau_m} for pt in points]
    fields = ["p", "tau0", "f_before", "f_after", "delta", "tau_m"]
    if args.output:
        ensembles.write_rows(args.output, rows, fields)
        if args.plot:
            from . import plotting

            plotting.plot_spin1(points, Path(args.output).with_suffix(".png"))
    else:
        ensembles.write_rows(sys.stdout, rows, fields)
    return EXIT_OK


def cmd_superdecohere(args) -> int:
    ch = _load_quantum(args.input)
    t = classical.superdecohere(ch)
    if not args.then_qi:
        _emit(io.stochastic_to_json(t), args.output)
        return EXIT_OK
    cres = classical.classical_quasi_inverse(t)
    qres = quasi_inverse_lp(ch.superop(), _lp_options(args))
    t_of_qi = classical.superdecohere(qres.qi)
    _emit({
        "decohered": io.stochastic_to_json(t),
        "qi_of_decohered": io.classical_result_to_json(cres),
        "decohered_qi": io.stochastic_to_json(t_of_qi),
        "commute": bool(np.allclose(t_of_qi, cres.qi, atol=1e-6)),
    }, args.output)
    return EXIT_OK if qres.converged else EXIT_NOT_CONVERGED


def cmd_validate(args) -> int:
    if io.is_stochastic_file(args.input):
        t = io.read_stochastic(args.input)
        _emit({"kind": "classical", "dim": t.shape[0], "valid": True,
               "bistochastic": bool(np.allclose(t.sum(axis=1), 1, atol=1e-10))})
        return EXIT_OK
    ch = io.read_channel(args.input)
    rep = ch.validate()
    _emit({"kind": "quantum", "dim": ch.dim, "min_eig": rep.min_eig, "tp_residual": rep.tp_residual,
           "trace": rep.trace, "cp": rep.cp, "tp": rep.tp, "valid": rep.ok})
    return EXIT_OK if rep.ok else EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qinv", description="Quasi-inverses of quantum and classical channels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("qi", help="quasi-inverse of a channel file")
    p.add_argument("input")
    p.add_argument("--kind", choices=["auto", "quantum", "classical"], default="auto")
    p.add_argument("--analytic", action="store_true", help="use closed forms for tagged channel families")
    p.add_argument("-o", "--output")
    _add_lp_flags(p)
    p.set_defaults(func=cmd_qi)

    p = sub.add_parser("fidelity", help="fidelity report and bounds")
    p.add_argument("input")
    p.add_argument("--with", dest="with_channel", metavar="CORRECTION",
                   help="correction channel applied after INPUT")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("construct", help="write a named channel to a file")
    p.add_argument("name")
    p.add_argument("--dim", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--w", type=float)
    p.add_argument("--p", type=float, nargs=4)
    p.add_argument("--j", type=float)
    for k in ("d1", "d2", "m1", "m2"):
        p.add_argument(f"--{k}", type=int)
    p.add_argument("--taus", type=float, nargs="+")
    p.add_argument("--probs", type=float, nargs="+")
    p.add_argument("--weights", type=float, nargs="+")
    p.add_argument("--phases", type=_json_arg, help="JSON list of phase vectors")
    p.add_argument("--unitaries", type=_json_arg, help="JSON list of [re, im] matrices")
    p.add_argument("--ops", type=_json_arg, help="JSON list of [re, im] matrices")
    p.add_argument("--form", choices=list(chancore.FORMS))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("ensemble", help="Monte Carlo statistics over random channels")
    p.add_argument("--mode", choices=["quantum", "classical"], default="quantum")
    p.add_argument("--dim", type=int)
    p.add_argument("--sweep", type=_parse_sweep, metavar="DMIN..DMAX")
    p.add_argument("--n", type=int)
    p.add_argument("--fit", action="store_true", help="log-log power-law fit of the classical sweep")
    p.add_argument("--jobs", type=int, default=int(os.environ.get("QINV_JOBS", "1")))
    p.add_argument("--summary-only", action="store_true", help="skip the per-sample CSV files")
    p.add_argument("--plot", action="store_true", help="also render PNG figures into the output dir")
    p.add_argument("-o", "--output", required=True, help="output directory")
    _add_lp_flags(p, seed_required=True)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("spin1", help="fidelity gain of the two-point spin-1 dephasing channel")
    p.add_argument("--p-grid", type=_parse_grid, default=_parse_grid("0:1:11"), metavar="START:STOP:NUM")
    p.add_argument("--tau0-grid", type=_parse_grid, default=_parse_grid("0:2pi:13"), metavar="START:STOP:NUM")
    p.add_argument("--grid", type=int, default=64, help="phase grid points per dimension")
    p.add_argument("--plot", action="store_true")
    p.add_argument("-o", "--output", help="CSV path")
    p.set_defaults(func=cmd_spin1)

    p = sub.add_parser("superdecohere", help="stochastic matrix of a quantum channel")
    p.add_argument("input")
    p.add_argument("--then-qi", action="store_true", help="compare with the decohered quantum quasi-inverse")
    p.add_argument("-o", "--output")
    _add_lp_flags(p)
    p.set_defaults(func=cmd_superdecohere)

    p = sub.add_parser("validate", help="check a channel or stochastic matrix file")
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, io.InputError, chancore.ChannelError, classical.NotStochasticError, ValueError,
            KeyError, FileNotFoundError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
