"""Command-line interface. JSON for single results, CSV for sweeps.

Exit codes: 0 success, 2 not_peaked (also printed as JSON), 1 any other failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import circuit as circ
from . import config, estimators, peaked, slices2d, statevec
from .clifford import BRICKWORK_CYCLE, build_v_theta

CSV_VERSION = 1
BENCH_COLUMNS = ["n", "rows", "cols", "d", "theta", "seed", "W", "D", "lambda1", "error_bound",
                 "p_est", "p_exact", "l1_exact", "wall_ms"]
EXIT_OK, EXIT_FAIL, EXIT_NOT_PEAKED = 0, 1, 2


class NotPeakedExit(Exception):
    def __init__(self, payload: dict):
        super().__init__("not_peaked")
        self.payload = payload


def resolved_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["limits"] = {"oracle": config.oracle_limit(), "block": config.block_limit(),
                     "window": config.window_limit(), "max_dim": config.max_dimension()}
    return cfg


def _emit(payload: dict, args) -> None:
    payload = {**payload, "config": resolved_config(args)}
    text = json.dumps(payload, indent=1, default=_json_default)
    if getattr(args, "output", None):
        Path(args.output).write_text(text + "\n")
    print(text)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o)}")


def _params(args, c):
    if args.mode == "theory" and args.W is not None:
        raise ValueError("theory mode derives W; --W is only valid with --mode practical")
    return peaked.select_params(c, args.epsilon, args.mode, args.W)


def _run_state(args):
    c = circ.load(args.circuit)
    res = peaked.approximate_state(c, _params(args, c), seed=args.seed)
    payload = res.to_dict()
    if not res.ok:
        raise NotPeakedExit(payload)
    return c, res, payload


def cmd_simulate(args) -> int:
    c, res, payload = _run_state(args)
    if args.state_out:
        Path(args.state_out).write_text("\n".join(res.state.to_lines()) + "\n")
        payload["state_file"] = args.state_out
    if args.samples:
        payload["samples"] = peaked.sample(res.state, args.samples, args.seed)
    _emit(payload, args)
    return EXIT_OK


def cmd_state(args) -> int:
    c, res, payload = _run_state(args)
    lines = res.state.to_lines()
    if args.state_out:
        Path(args.state_out).write_text("\n".join(lines) + "\n")
        payload["state_file"] = args.state_out
        _emit(payload, args)
    else:
        print("\n".join(lines))
    return EXIT_OK


def cmd_prob(args) -> int:
    c = circ.load(args.circuit)
    if args.mode == "theory" and args.W is not None:
        raise ValueError("theory mode derives W; --W is only valid with --mode practical")
    est = peaked.estimate_output_probability(c, args.x, args.epsilon, args.mode, args.W,
                                             method=args.method, seed=args.seed)
    payload = {"status": est.status, "p": est.value, "x": args.x, "method": est.method,
               **{k: v for k, v in est.result.to_dict().items() if k != "status"}}
    if est.status != "ok":
        raise NotPeakedExit(payload)
    _emit(payload, args)
    return EXIT_OK


def cmd_sample2d(args) -> int:
    c = circ.load(args.circuit)
    try:
        res = slices2d.sample_2d(c, args.epsilon, args.samples, args.seed, rule=args.rule, a=args.a)
    except slices2d.NotPeaked as exc:
        raise NotPeakedExit({"status": "not_peaked", "reason": str(exc)})
    plan = res.plan.to_dict()
    if args.plan_out:
        Path(args.plan_out).write_text(json.dumps(plan, indent=1))
    _emit({"status": res.status, "flips": res.flips, "plan": plan, "samples": res.samples}, args)
    return EXIT_OK


def cmd_trace(args) -> int:
    c = circ.load(args.circuit)
    est = estimators.trace_magnitude_squared(c, args.epsilon, args.mode, args.W, exact=args.exact)
    payload = {"status": est.status, "value": est.value, "method": est.method}
    if est.status != "ok":
        raise NotPeakedExit(payload)
    _emit(payload, args)
    return EXIT_OK


def cmd_frobenius(args) -> int:
    u, v = circ.load(args.circuit), circ.load(args.circuit2)
    d = estimators.frobenius_distance(u, v, args.epsilon, args.mode, args.W, exact=args.exact)
    _emit({"status": "ok", "distance": d}, args)
    return EXIT_OK


def cmd_frame_potential(args) -> int:
    spec = estimators.EnsembleSpec(args.family, args.n, args.k, args.M, args.seed,
                                   args.rows, args.cols, args.d, args.theta)
    if args.enumerate:
        value = estimators.frame_potential_exact(args.family, args.n, args.k)
        _emit({"status": "ok", "mean": value, "stderr": 0.0, "pairs": None, "not_peaked_pairs": 0}, args)
        return EXIT_OK
    fp = estimators.frame_potential(spec, args.epsilon, args.mode, args.W, exact=args.exact)
    _emit({"status": "ok", **fp.to_dict()}, args)
    return EXIT_OK


def cmd_meanvalue(args) -> int:
    c = circ.load(args.circuit)
    if args.pauli:
        val = estimators.pauli_mean_magnitude(c, args.pauli, args.epsilon, args.mode, args.W,
                                              embed=args.embed, exact=args.exact)
    else:
        raw = json.loads(Path(args.observables).read_text())
        obs = [np.asarray(o, dtype=float)[..., 0] + 1j * np.asarray(o, dtype=float)[..., 1]
               if not isinstance(o, str) else o for o in raw]
        val = estimators.general_mean_magnitude(c, obs, args.epsilon, args.mode, args.W, exact=args.exact)
    _emit({"status": "ok", "value": val}, args)
    return EXIT_OK


def cmd_oracle(args) -> int:
    c = circ.load(args.circuit)
    st = statevec.run(c)
    probs = st.probabilities()
    payload = {"status": "ok", "n": c.n, "norm": st.norm()}
    if args.x:
        payload["p"] = float(probs[circ.bits_to_int(args.x)])
    order = np.argsort(-probs)[:args.top]
    payload["top"] = [[circ.int_to_bits(i, c.n), float(probs[i])] for i in order]
    _emit(payload, args)
    return EXIT_OK


def cmd_gen_vtheta(args) -> int:
    pattern = tuple(args.pattern.split(",")) if args.pattern else BRICKWORK_CYCLE
    v = build_v_theta(args.rows, args.cols, args.d, args.theta, args.seed, pattern=pattern)
    circ.save(v.circuit, args.out)
    _emit({"status": "ok", "path": args.out, "peak": v.peak, "depth": v.circuit.depth}, args)
    return EXIT_OK


def bench_point(point: dict) -> dict:
    """One row of the V(theta) sweep."""
    rows, cols, d, theta, seed, W = (point[k] for k in ("rows", "cols", "d", "theta", "seed", "W"))
    t0 = time.perf_counter()
    v = build_v_theta(rows, cols, d, theta, seed)
    params = peaked.select_params(v.circuit, point["epsilon"], "practical", W)
    res = peaked.approximate_state(v.circuit, params, seed=seed)
    p_est = res.state.probability(v.peak)
    wall = (time.perf_counter() - t0) * 1000
    n = rows * cols
    p_exact = l1 = ""
    if n <= point["exact_limit"]:
        probs = statevec.run(v.circuit).probabilities()
        p_exact = float(probs[circ.bits_to_int(v.peak)])
        l1 = float(np.abs(res.state.dense_probabilities() - probs).sum())
    return {"n": n, "rows": rows, "cols": cols, "d": d, "theta": theta, "seed": seed, "W": W,
            "D": params.D, "lambda1": res.lambda1, "error_bound": res.error_bound, "p_est": p_est,
            "p_exact": p_exact, "l1_exact": l1, "wall_ms": round(wall, 3)}


def cmd_bench_vtheta(args) -> int:
    points = []
    for rows in args.rows:
        for cols in args.cols:
            for theta in args.theta:
                for seed in args.seeds:
                    for W in range(args.w_min, args.w_max + 1):
                        points.append({"rows": rows, "cols": cols, "d": args.d, "theta": theta,
                                       "seed": seed, "W": W, "epsilon": args.epsilon,
                                       "exact_limit": args.exact_limit})
    workers = args.workers or os.cpu_count() or 1
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows_out = list(pool.map(bench_point, points))
    else:
        rows_out = []
        for p in points:
            rows_out.append(bench_point(p))
            print(f"# done n={p['rows'] * p['cols']} theta={p['theta']} seed={p['seed']} W={p['W']}",
                  file=sys.stderr)
    buf = io.StringIO()
    buf.write(f"# peakedsim bench-vtheta csv v{CSV_VERSION}\n")
    buf.write("# config: " + json.dumps(resolved_config(args), default=_json_default) + "\n")
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows_out:
        writer.writerow(r)
    text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text)
    print(text, end="")
    return EXIT_OK


def _add_estimation(p, default_mode="theory"):
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--mode", choices=peaked.MODES, default=default_mode)
    p.add_argument("--W", type=int, default=None, help="weight cutoff (practical mode)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None, help="also write the JSON result here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="peakedsim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sparse output state, success test, optional samples")
    p.add_argument("circuit")
    _add_estimation(p)
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--state-out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("state", help="write the sparse state as 'bitstring re im' lines")
    p.add_argument("circuit")
    _add_estimation(p)
    p.add_argument("--state-out", default=None)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("prob", help="estimate one output probability")
    p.add_argument("circuit")
    p.add_argument("--x", required=True)
    p.add_argument("--method", choices=("direct", "resample"), default="direct")
    _add_estimation(p)
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("sample2d", help="heavy-slice sampler for 2D grid circuits")
    p.add_argument("circuit")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rule", choices=("theory", "tight"), default="tight")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--plan-out", default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_sample2d)

    p = sub.add_parser("trace", help="|Tr(U)/2^n|^2")
    p.add_argument("circuit")
    _add_estimation(p)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("frobenius", help="2(1 - |t(U V^+)|)")
    p.add_argument("circuit")
    p.add_argument("circuit2")
    _add_estimation(p)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_frobenius)

    p = sub.add_parser("frame-potential", help="ensemble mean of |t(U^+ V)|^(2k)")
    p.add_argument("--family", choices=estimators.FAMILIES, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--exact", action="store_true", help="dense traces instead of the estimator")
    p.add_argument("--enumerate", action="store_true", help="exact value of a finite family")
    _add_estimation(p)
    p.set_defaults(func=cmd_frame_potential)

    p = sub.add_parser("meanvalue", help="|<psi|O_1 x ... x O_n|psi>|^2")
    p.add_argument("circuit")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--pauli")
    g.add_argument("--observables", help="JSON list of 2x2 matrices of [re, im] pairs or Pauli letters")
    p.add_argument("--embed", action="store_true", help="force the 2n-qubit dilation")
    p.add_argument("--exact", action="store_true")
    _add_estimation(p)
    p.set_defaults(func=cmd_meanvalue)

    p = sub.add_parser("oracle", help="dense statevector probabilities")
    p.add_argument("circuit")
    p.add_argument("--x", default=None)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench-vtheta", help="V(theta) sweep over grids, angles, seeds and W")
    p.add_argument("--rows", type=int, nargs="+", required=True)
    p.add_argument("--cols", type=int, nargs="+", required=True)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--theta", type=float, nargs="+", default=[0.1])
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--w-min", type=int, default=0)
    p.add_argument("--w-max", type=int, default=4)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--exact-limit", type=int, default=20, help="largest n for the oracle columns")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_bench_vtheta)

    p = sub.add_parser("gen-vtheta", help="write a V(theta) benchmark circuit as JSON")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pattern", default=None, help="comma-separated layer kinds, e.g. v-even,v-odd,h-even")
    p.add_argument("--out", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_gen_vtheta)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotPeakedExit as exc:
        payload = {"status": "not_peaked", **exc.payload, "config": resolved_config(args)}
        print(json.dumps(payload, indent=1, default=_json_default))
        return EXIT_NOT_PEAKED
    except Exception as exc:  # noqa: BLE001 - the CLI maps every other failure to exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
