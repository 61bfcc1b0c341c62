"""Command-line front end: figure curves, parameter sweeps, optimizer queries and checks.

Exit codes: 0 success, 1 bad arguments, 2 verification failure, 3 oracle
leakage above threshold.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .interferometer import (
    Coherent,
    MzConfig,
    NbarInput,
    SinglePhoton,
    balance_eta_lossy,
    balance_eta_optimal,
    lambda_max,
    lambda_max_general,
    lambda_max_lossy,
    mz_visibility,
    optimize_gain_numeric,
    vmax_general,
)
from .oracle import LEAKAGE_FLAG, oracle_visibility
from .teleporter import TeleporterParams, gain_from_squeezing, lambda_opt, squeezing_fraction
from .verify import ENTANGLEMENT_LEVELS, SUITES

EXIT_OK, EXIT_ARGS, EXIT_VERIFY, EXIT_LEAK = 0, 1, 2, 3

FIGURES = ("fig5", "fig6", "fig7a", "fig7b", "fig8")
SWEEP_VARS = ("lambda", "eta_b", "entanglement_pct", "nbar")
FIG8_NBAR = (0.25, 1.0, 4.0)

# flag defaults; kept out of argparse so a config file can fill unset flags
DEFAULTS = {
    "H": None,
    "entanglement_pct": None,
    "lam": 1.0,
    "eta_a": 1.0,
    "eta_b1": 1.0,
    "eta_b2": 1.0,
    "balance_eta": 1.0,
    "nbar": 1.0,
    "chi": None,
    "input": "nbar",
    "x": 1.0,
    "y": 0.0,
    "steps": None,
    "range": None,
    "nmax": 10,
    "out": None,
    "format": "csv",
    "threads": 1,
    "method": "engine",
}

# subcommand-specific keys that a config file may also carry
SUB_DEFAULTS = {"free": "lam", "grid": "point", "var": None}

H_HEADER = "H = (1 + V)^2 / (4 V) with V = 1 - squeezing fraction"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------------ parsing


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("parameters")
    g.add_argument("--H", type=float, dest="H", help="EPR parametric gain (>= 1)")
    g.add_argument("--entanglement-pct", type=float, help="entanglement as squeezing percent (alternative to --H)")
    g.add_argument("--lambda", type=float, dest="lam", help="classical channel gain")
    g.add_argument("--eta-a", type=float)
    g.add_argument("--eta-b1", type=float)
    g.add_argument("--eta-b2", type=float)
    g.add_argument("--balance-eta", type=float)
    g.add_argument("--nbar", type=float)
    g.add_argument("--chi", type=float, help="pair-source conversion efficiency (adds pair-source columns)")
    g.add_argument("--input", choices=("photon", "coherent", "nbar"))
    g.add_argument("--x", type=complex, help="h amplitude of the input polarization")
    g.add_argument("--y", type=complex, help="v amplitude of the input polarization")
    g.add_argument("--method", choices=("closed_form", "engine", "oracle"))
    o = p.add_argument_group("run control")
    o.add_argument("--steps", type=int)
    o.add_argument("--range", help="lo:hi")
    o.add_argument("--nmax", type=int, help="oracle truncation per mode")
    o.add_argument("--out", help="write output here instead of stdout")
    o.add_argument("--format", choices=("csv", "json"))
    o.add_argument("--config", help="JSON file of flag values; explicit flags win")
    o.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mzteleport", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    f = sub.add_parser("fig", help="emit the curves of one figure")
    f.add_argument("name", choices=FIGURES)
    s = sub.add_parser("sweep", help="sweep one parameter")
    s.add_argument("--var", choices=SWEEP_VARS)
    s.add_argument("--lambda-max-per-point", action="store_true", help="use the optimal gain at each point")
    o = sub.add_parser("optimize", help="numeric visibility maximum")
    o.add_argument("--free", help="comma list from {lam, eta} (default lam)")
    v = sub.add_parser("verify", help="run an acceptance suite")
    v.add_argument("suite", choices=tuple(SUITES))
    c = sub.add_parser("oracle-check", help="engine vs truncated-Fock oracle")
    c.add_argument("--grid", choices=("point", "fig5"))
    for sp in (f, s, o, v, c):
        _common(sp)
    return p


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from ``--config`` and then from the defaults."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(cfg) - set(DEFAULTS) - set(SUB_DEFAULTS) - {"lambda"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "lambda" in cfg:
            cfg["lam"] = cfg.pop("lambda")
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, cfg.get(key, default))
    for key, default in SUB_DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, cfg.get(key, default))
    if getattr(args, "command", None) == "sweep" and args.var not in SWEEP_VARS:
        raise UsageError(f"sweep needs --var from {SWEEP_VARS}")
    if args.H is not None and args.entanglement_pct is not None:
        raise UsageError("give --H or --entanglement-pct, not both")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    try:
        args.x, args.y = complex(args.x), complex(args.y)
    except ValueError as exc:
        raise UsageError(f"bad polarization amplitude: {exc}") from exc
    return args


def parse_range(text: str | None, default: tuple[float, float], steps: int | None, default_steps: int) -> np.ndarray:
    lo, hi = default
    if text is not None:
        try:
            lo_s, hi_s = text.split(":")
            lo, hi = float(lo_s), float(hi_s)
        except ValueError as exc:
            raise UsageError(f"--range must look like lo:hi, got {text!r}") from exc
    n = default_steps if steps is None else steps
    if n < 2:
        raise UsageError("--steps must be >= 2")
    if not lo < hi:
        raise UsageError("--range needs lo < hi")
    return np.linspace(lo, hi, n)


def gain_of(args) -> float:
    if args.entanglement_pct is not None:
        pct = args.entanglement_pct
        return 1.0 if pct == 0 else gain_from_squeezing(pct / 100.0)
    return 1.0 if args.H is None else args.H


def source_of(args):
    nrm = math.hypot(abs(args.x), abs(args.y))
    if args.input in ("photon", "coherent") and nrm == 0:
        raise UsageError("--x and --y cannot both vanish")
    if args.input == "photon":
        return SinglePhoton(args.x / nrm, args.y / nrm)
    if args.input == "coherent":
        amp = math.sqrt(args.nbar) / nrm
        return Coherent({"h": amp * args.x, "v": amp * args.y})
    return NbarInput(args.nbar)


def config_of(args, **over) -> MzConfig:
    tele = TeleporterParams(over.pop("H", gain_of(args)), over.pop("lam", args.lam), over.pop("eta_a", args.eta_a),
                            over.pop("eta_b1", args.eta_b1), over.pop("eta_b2", args.eta_b2))
    return MzConfig(tele, over.pop("balance_eta", args.balance_eta), over.pop("source", source_of(args)))


# ------------------------------------------------------------------------ output


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def render(rows: list[dict], fmt: str, header: Sequence[str] = ()) -> str:
    if fmt == "json":
        return json.dumps({"header": list(header), "rows": rows}, indent=1) + "\n"
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    if rows:
        cols = list(rows[0])
        for r in rows[1:]:
            cols += [k for k in r if k not in cols]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def pmap(fn: Callable, items: Sequence, threads: int) -> list:
    """Ordered parallel map: results follow ``items`` regardless of scheduling."""
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def visibility_row(cfg: MzConfig, method: str, nmax: int) -> dict:
    rep = oracle_visibility(cfg, nmax) if method == "oracle" else mz_visibility(cfg, method)
    row = {"count_a": rep.count_a, "count_b": rep.count_b, "visibility": rep.visibility, "method": rep.method}
    if rep.leakage is not None:
        row["leakage"] = rep.leakage
    return row


def param_row(cfg: MzConfig) -> dict:
    p = cfg.teleporter
    return {"entanglement_pct": 100.0 * squeezing_fraction(p.H), "H": p.H, "lambda": p.lam, "eta_a": p.eta_a,
            "eta_b1": p.eta_b1, "eta_b2": p.eta_b2, "balance_eta": cfg.balance_eta, "nbar": cfg.nbar}


# ---------------------------------------------------------------------- commands


def cmd_fig(args) -> tuple[list[dict], list[str]]:
    name, method = args.name, args.method
    header = [f"figure: {name}", H_HEADER]
    if name in ("fig5", "fig6", "fig7b"):
        header.append(f"method: {method}")
    points: list[Callable[[], dict]] = []
    if name in ("fig5", "fig6"):
        lams = parse_range(args.range, (0.0, 2.0), args.steps, 41)
        header.append("balance: " + ("eta = 1" if name == "fig5" else "eta = min(1, lam^2 + 4 noise / nbar)"))
        for f in ENTANGLEMENT_LEVELS:
            H = 1.0 if f == 0 else gain_from_squeezing(f)
            for lam in lams:
                def point(H=H, lam=float(lam)):
                    p = TeleporterParams(H, lam)
                    eta = 1.0 if name == "fig5" else balance_eta_optimal(p)
                    cfg = MzConfig(p, eta, NbarInput(1.0))
                    return {**param_row(cfg), **visibility_row(cfg, method, args.nmax)}
                points.append(point)
    elif name == "fig7a":
        etas = parse_range(args.range, (0.0, 1.0), args.steps, 21)
        header.append("equal transmission eta_b in both EPR arms, no balancing; lambda_max is the exact optimum,"
                      " lambda_max_published the closed form with loss-free numerator")
        for f in ENTANGLEMENT_LEVELS:
            H = 1.0 if f == 0 else gain_from_squeezing(f)
            for eb in etas:
                def point(H=H, eb=float(eb), f=f):
                    return {"entanglement_pct": 100.0 * f, "H": H, "eta_b": eb,
                            "lambda_max": lambda_max_general(H, 1.0, 1.0, eb, eb),
                            "lambda_max_published": lambda_max_lossy(H, eb),
                            "v_max": vmax_general(H, 1.0, 1.0, eb, eb), "method": "closed_form"}
                points.append(point)
    elif name == "fig7b":
        etas = parse_range(args.range, (0.0, 1.0), args.steps, 21)
        H = gain_from_squeezing(0.5)
        lam = lambda_opt(H)
        header.append("50% entanglement, lambda = lambda_opt(H), balance eta = (5 - 4 eta_b) lambda^2")
        for eb in etas:
            def point(eb=float(eb)):
                cfg = MzConfig(TeleporterParams(H, lam, eta_b1=eb, eta_b2=eb), balance_eta_lossy(lam, eb), NbarInput(1.0))
                return {**param_row(cfg), "eta_b": eb, **visibility_row(cfg, method, args.nmax)}
            points.append(point)
    else:  # fig8
        pcts = parse_range(args.range, (0.0, 99.0), args.steps, 34)
        header.append("unbalanced optimum gain lambda_max^2 and visibility v_max versus entanglement")
        for nbar in FIG8_NBAR:
            for pct in pcts:
                def point(nbar=nbar, pct=float(pct)):
                    H = 1.0 if pct == 0 else gain_from_squeezing(pct / 100.0)
                    return {"nbar": nbar, "entanglement_pct": pct, "H": H,
                            "lambda_max_sq": lambda_max(H, nbar) ** 2, "v_max": vmax_general(H, nbar),
                            "method": "closed_form"}
                points.append(point)
    return pmap(lambda fn: fn(), points, args.threads), header


def cmd_sweep(args) -> tuple[list[dict], list[str]]:
    defaults = {"lambda": (0.0, 2.0), "eta_b": (0.0, 1.0), "entanglement_pct": (0.0, 99.0), "nbar": (0.05, 4.0)}
    grid = parse_range(args.range, defaults[args.var], args.steps, 101)
    base = config_of(args)
    header = [f"sweep: {args.var}", H_HEADER, f"method: {args.method}",
              "fixed: " + ", ".join(f"{k}={v!r}" for k, v in param_row(base).items() if k != args.var)]

    def point(value: float) -> dict:
        over = {}
        if args.var == "lambda":
            over["lam"] = value
        elif args.var == "eta_b":
            over["eta_b1"] = over["eta_b2"] = value
        elif args.var == "entanglement_pct":
            over["H"] = 1.0 if value == 0 else gain_from_squeezing(value / 100.0)
        else:
            args_n = argparse.Namespace(**{**vars(args), "nbar": value})
            over["source"] = source_of(args_n)
        cfg = config_of(args, **over)
        p = cfg.teleporter
        lam_star = lambda_max_general(p.H, cfg.nbar, p.eta_a, p.eta_b1, p.eta_b2) if cfg.nbar > 0 else float("nan")
        if args.lambda_max_per_point:
            cfg = cfg.with_(lam=lam_star)
        row = {args.var: float(value), **param_row(cfg), **visibility_row(cfg, args.method, args.nmax),
               "lambda_max": lam_star,
               "v_max": vmax_general(p.H, cfg.nbar, p.eta_a, p.eta_b1, p.eta_b2) if cfg.nbar > 0 else 0.0}
        if args.chi is not None:
            from .experiments import PairSourceSpec, conditional_visibility, raw_visibility

            spec = PairSourceSpec(args.chi)
            row["raw_visibility"] = raw_visibility(spec, cfg.teleporter, cfg.balance_eta).visibility
            row["conditional_visibility"] = conditional_visibility(spec, cfg.teleporter, cfg.balance_eta).visibility
        return row

    return pmap(point, [float(v) for v in grid], args.threads), header


def cmd_optimize(args) -> tuple[list[dict], list[str]]:
    free = {s.strip() for s in args.free.split(",") if s.strip()}
    cfg = config_of(args)
    if args.method == "oracle":
        raise UsageError("optimize runs on closed_form or engine")
    try:
        opt = optimize_gain_numeric(cfg, free, method=args.method)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    p = cfg.teleporter
    row = {**param_row(cfg.with_(lam=opt.lam, balance_eta=opt.balance_eta)), "free": "+".join(sorted(free)),
           "visibility": opt.visibility, "flat": opt.flat, "method": args.method,
           "lambda_max_closed_form": lambda_max_general(p.H, cfg.nbar, p.eta_a, p.eta_b1, p.eta_b2)}
    return [row], ["optimize: numeric maximum of visibility", H_HEADER]


def cmd_oracle_check(args) -> tuple[list[dict], list[str], int]:
    if args.grid == "fig5":
        cfgs = [MzConfig(TeleporterParams(1.0 if f == 0 else gain_from_squeezing(f), float(lam)))
                for f in ENTANGLEMENT_LEVELS for lam in parse_range(args.range, (0.0, 2.0), args.steps, 41)]
    else:
        cfgs = [config_of(args)]

    def point(cfg):
        o = oracle_visibility(cfg, args.nmax)
        e = mz_visibility(cfg)
        tol = max(1e-5, 10.0 * o.leakage)
        diff = abs(o.visibility - e.visibility)
        return {**param_row(cfg), "visibility_engine": e.visibility, "visibility_oracle": o.visibility,
                "abs_diff": diff, "tolerance": tol, "leakage": o.leakage, "agree": diff <= tol,
                "flagged": o.leakage > LEAKAGE_FLAG, "method": "engine+oracle"}

    rows = pmap(point, cfgs, args.threads)
    code = EXIT_OK
    if any(r["flagged"] for r in rows):
        code = EXIT_LEAK
    if not all(r["agree"] for r in rows):
        code = EXIT_VERIFY
    return rows, [f"oracle-check: n_max={args.nmax}", "tolerance = max(1e-5, 10 * leakage)"], code


def cmd_verify(args) -> tuple[str, int]:
    checks = SUITES[args.suite]()
    ok = all(c.passed for c in checks)
    if args.format == "json":
        text = json.dumps({"suite": args.suite, "passed": ok, "checks": [c.as_dict() for c in checks]}, indent=1) + "\n"
    else:
        text = "".join(c.line() + "\n" for c in checks)
        text += f"{args.suite}: {sum(c.passed for c in checks)}/{len(checks)} checks passed\n"
    return text, EXIT_OK if ok else EXIT_VERIFY


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = resolve(build_parser().parse_args(argv))
        if args.command == "verify":
            text, code = cmd_verify(args)
            emit(text, args.out)
            return code
        code = EXIT_OK
        if args.command == "fig":
            rows, header = cmd_fig(args)
        elif args.command == "sweep":
            rows, header = cmd_sweep(args)
        elif args.command == "optimize":
            rows, header = cmd_optimize(args)
        else:
            rows, header, code = cmd_oracle_check(args)
        if args.method == "oracle" and any(r.get("leakage", 0.0) > LEAKAGE_FLAG for r in rows):
            code = max(code, EXIT_LEAK)
        emit(render(rows, args.format, header), args.out)
        return code
    except UsageError as exc:
        print(f"mzteleport: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except ValueError as exc:
        print(f"mzteleport: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
