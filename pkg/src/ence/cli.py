"""Command-line front end.

Subcommands: gen, measure, sweep, detect, splittings. Exit codes: 0 ok,
1 bad arguments, 2 invalid density matrix, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .errors import EnceError, ParameterError
from .maps import DEFAULT_X, EnceMapSpec, Side
from .measures import (
    DETECT_THRESHOLD,
    WeightedMeasureSpec,
    measure_D,
    measure_Q,
    measure_Q_tilde,
    weighted_measure,
)
from .multipartite import PEStatus, aggregate_measure, enumerate_bipartitions, fully_product_check
from .states import (
    DensityMatrix,
    format_state,
    make_named_state,
    random_density,
    random_fully_product_state,
    random_pe_state,
    read_state,
    regroup,
)

STATE_ALIASES = {
    "ps": "pseudo_entangled",
    "pseudo-entangled": "pseudo_entangled",
    "zero-plus": "zero_plus",
    "bell": "bell",
    "classical-cc": "classical_cc",
    "one-way-cc": "one_way_cc",
    "1wcc": "one_way_cc",
    "tripartite-cex": "tripartite_cex",
    "maximally-mixed": "maximally_mixed",
}
RANDOM_STATES = ("random", "random-pe", "random-fully-product")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _detect_threshold(args) -> float:
    if getattr(args, "tol", None) is not None:
        return args.tol
    env = os.environ.get("ENCE_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            raise ParameterError(f"ENCE_TOL={env!r} is not a number") from None
    return DETECT_THRESHOLD


# ---------------------------------------------------------------- state input


def _build_named(name: str, args, p: float | None = None) -> tuple[DensityMatrix, str]:
    if name in RANDOM_STATES:
        dims = args.dims or [2, 2]
        if name == "random":
            rho = random_density(dims, args.seed)
        elif name == "random-pe":
            if len(dims) != 2:
                raise ParameterError("random-pe needs exactly two dims")
            rho = random_pe_state(dims[0], dims[1], args.seed, nondegenerate=args.nondegenerate)
        else:
            rho = random_fully_product_state(dims, args.seed, nondegenerate=args.nondegenerate)
        return rho, f"{name}(dims={','.join(map(str, dims))},seed={args.seed})"
    canonical = STATE_ALIASES.get(name, name)
    params = {}
    p = args.p if p is None else p
    if canonical == "pseudo_entangled":
        params["p"] = 1.0 if p is None else p
    elif p is not None:
        raise ParameterError(f"state {name!r} takes no --p")
    if canonical == "maximally_mixed" and args.dims:
        if len(args.dims) != 2:
            raise ParameterError("maximally-mixed needs exactly two dims")
        params.update(dA=args.dims[0], dB=args.dims[1])
    rho = make_named_state(canonical, **params)
    label = canonical + (f"(p={params['p']:g})" if "p" in params else "")
    return rho, label


def _load_input(args) -> tuple[DensityMatrix, str]:
    if args.input:
        return read_state(args.input), args.input
    return _build_named(args.state, args)


def _parse_split(text: str, m: int) -> tuple[list[int], list[int]]:
    try:
        left, right = text.split("|")
        lf = [int(t) for t in left.split(",") if t.strip()]
        rt = [int(t) for t in right.split(",") if t.strip()]
    except ValueError:
        raise ParameterError(f"--split must look like '0,2|1,3', got {text!r}") from None
    if sorted(lf + rt) != list(range(m)):
        raise ParameterError(f"--split {text!r} is not a bipartition of {m} subsystems")
    return lf, rt


def _bipartite(rho: DensityMatrix, split: str | None) -> DensityMatrix:
    if split:
        return regroup(rho, *_parse_split(split, rho.n_subsystems))
    if rho.n_subsystems != 2:
        raise ParameterError(f"state has {rho.n_subsystems} subsystems; pass --split to choose a bipartition")
    return rho


def _map_spec(args, side="right") -> EnceMapSpec:
    if args.map == "transpose":
        return EnceMapSpec.transpose(side)
    return EnceMapSpec.power(args.x, side)


# ---------------------------------------------------------------- commands


def run_gen(args) -> int:
    rho, _ = _build_named(args.state, args)
    text = format_state(rho)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def run_measure(args) -> int:
    rho, label = _load_input(args)
    bi = _bipartite(rho, args.split)
    kind = args.measure
    if kind == "weighted":
        weights = args.weights or [1.0, 1.0]
        xs = args.xs or [DEFAULT_X]
        if len(weights) != len(xs) + 1:
            raise ParameterError("--weights needs one transpose weight plus one weight per --xs value")
        wspec = WeightedMeasureSpec.standard(weights[0], list(zip(xs, weights[1:])))
        res = weighted_measure(bi, wspec)
        map_name, x, side = wspec.label(), None, "n/a"
    else:
        spec = _map_spec(args, args.side)
        if kind == "d":
            res = measure_D(bi, spec)
        elif kind == "q":
            res = measure_Q(bi, spec)
        else:
            res = measure_Q_tilde(bi, spec)
        map_name, x, side = args.map, spec.x, res.side
    record = {
        "state": label,
        "dims": list(rho.dims),
        "map": map_name,
        "x": x,
        "side": side,
        "measure": res.measure.value,
        "value": res.value,
        "spectrum_in": res.spectrum_in.tolist(),
        "spectrum_out": res.spectrum_out.tolist(),
    }
    json.dump(record, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _sweep_values(start: float, stop: float, step: float) -> list[float]:
    if not step > 0 or stop < start:
        raise ParameterError("sweep needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def run_sweep(args) -> int:
    values = _sweep_values(args.start, args.stop, args.step)
    base = None
    if args.var == "p":
        if args.input:
            raise ParameterError("sweeping p needs a named state (--state), not a file")
    else:
        if args.map != "power":
            raise ParameterError("sweeping x requires --map power")
        base = _bipartite(_load_input(args)[0], args.split)

    rows = []
    for v in values:
        if args.var == "p":
            rho, _ = _build_named(args.state, args, p=v)
            rho = _bipartite(rho, args.split)
            spec = _map_spec(args)
        else:
            rho = base
            spec = EnceMapSpec.power(v)
        q_r = measure_Q(rho, spec.with_side(Side.RIGHT)).value
        q_l = measure_Q(rho, spec.with_side(Side.LEFT)).value
        rows.append([v, measure_D(rho, spec).value, q_r, q_l, (q_r + q_l) / 2])

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["param", "value_D", "value_Q_R", "value_Q_L", "value_Qtilde"])
        for row in rows:
            w.writerow([_fmt(c) for c in row])
    finally:
        if args.out:
            fh.close()
    return 0


def _measure_rows(rho: DensityMatrix, x: float) -> list[dict]:
    rows = []
    for sp in enumerate_bipartitions(rho.n_subsystems):
        bi = regroup(rho, sp.left, sp.right)
        for spec in (EnceMapSpec.transpose(), EnceMapSpec.power(x)):
            d_r = measure_D(bi, spec.with_side(Side.RIGHT)).value
            d_l = measure_D(bi, spec.with_side(Side.LEFT)).value
            q_r = measure_Q(bi, spec.with_side(Side.RIGHT)).value
            q_l = measure_Q(bi, spec.with_side(Side.LEFT)).value
            rows.append(
                {
                    "splitting": sp.label(),
                    "map": spec.kind.value,
                    "x": spec.x,
                    "D_R": d_r,
                    "D_L": d_l,
                    "Q_R": q_r,
                    "Q_L": q_l,
                    "Q_tilde": (q_r + q_l) / 2,
                }
            )
    return rows


def run_detect(args) -> int:
    rho, label = _load_input(args)
    if rho.n_subsystems < 2:
        raise ParameterError("detection needs at least two subsystems")
    tau = _detect_threshold(args)
    verdict = fully_product_check(rho)
    rows = _measure_rows(rho, args.x)
    detected = any(r[k] > tau for r in rows for k in ("D_R", "D_L", "Q_R", "Q_L", "Q_tilde"))
    if verdict.status is PEStatus.NO_PE or detected:
        overall = "nonclassical"
    elif verdict.status is PEStatus.HAS_PE:
        overall = "classical"
    else:
        overall = "undetected"
    witnesses = [
        {"splitting": v.splitting.label(), "status": v.status.value, "witness": v.witness} for v in verdict.details
    ]
    record = {
        "state": label,
        "dims": list(rho.dims),
        "threshold": tau,
        "oracle": verdict.status.value,
        "witnesses": witnesses,
        "measures": rows,
        "verdict": overall,
    }
    json.dump(record, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def run_splittings(args) -> int:
    rho, label = _load_input(args)
    spec = _map_spec(args)
    agg = aggregate_measure(rho, spec)
    record = {
        "state": label,
        "dims": list(rho.dims),
        "map": args.map,
        "x": spec.x,
        "measure": "Q_tilde",
        "rows": [
            {"splitting": sp.label(), "left": list(sp.left), "right": list(sp.right), "value": v}
            for sp, v in agg.table
        ],
        **agg.summary,
    }
    json.dump(record, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


# ---------------------------------------------------------------- parser


def _add_state_options(p: argparse.ArgumentParser, required_source: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required_source)
    src.add_argument("--in", dest="input", metavar="PATH", help="density-matrix text file")
    src.add_argument("--state", help="named state: " + ", ".join(list(STATE_ALIASES) + list(RANDOM_STATES)))
    p.add_argument("--p", type=float, help="mixing parameter of the pseudo-entangled family")
    p.add_argument("--dims", type=int, nargs="+", help="dimensions for random or maximally mixed states")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nondegenerate", action="store_true", help="random-pe: force a gapped spectrum")


def _add_map_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", choices=["transpose", "power"], default="transpose")
    p.add_argument("--x", type=float, default=DEFAULT_X, help="power-map parameter (x != 0, 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ence", description="Detect and quantify nonclassical correlation with EnCE maps.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a named or random state in the text format")
    g.add_argument("--state", required=True)
    g.add_argument("--p", type=float)
    g.add_argument("--dims", type=int, nargs="+")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--nondegenerate", action="store_true")
    g.add_argument("--out", help="output path (default stdout)")
    g.set_defaults(func=run_gen)

    m = sub.add_parser("measure", help="evaluate one measure, JSON on stdout")
    _add_state_options(m)
    _add_map_options(m)
    m.add_argument("--measure", choices=["d", "q", "qtilde", "weighted"], default="qtilde")
    m.add_argument("--side", choices=["right", "left"], default="right")
    m.add_argument("--split", help="bipartition of a multipartite state, e.g. '0,2|1,3'")
    m.add_argument("--weights", type=float, nargs="+", help="weighted: transpose weight, then one per --xs")
    m.add_argument("--xs", type=float, nargs="+", help="weighted: power-map parameters")
    m.set_defaults(func=run_measure)

    s = sub.add_parser("sweep", help="sweep p or x, CSV output")
    _add_state_options(s)
    _add_map_options(s)
    s.add_argument("--var", choices=["p", "x"], default="p")
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--step", type=float, required=True)
    s.add_argument("--split")
    s.add_argument("--out")
    s.set_defaults(func=run_sweep)

    d = sub.add_parser("detect", help="oracle verdict plus per-splitting measures")
    _add_state_options(d)
    d.add_argument("--x", type=float, default=DEFAULT_X)
    d.add_argument("--tol", type=float, help="detection threshold (also ENCE_TOL)")
    d.set_defaults(func=run_detect)

    t = sub.add_parser("splittings", help="Q_tilde on every bipartite cut with min/max/avg")
    _add_state_options(t)
    _add_map_options(t)
    t.set_defaults(func=run_splittings)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EnceError as exc:
        print(f"ence {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ence {args.command}: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
