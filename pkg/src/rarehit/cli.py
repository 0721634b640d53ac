"""Command-line frontend.

Subcommands: tail, lambda, verify, limitlaw, rarity (epsilon|d0|rate|kappa),
mc, sweep.  Every run emits its fully resolved configuration alongside the
results so a report can be reproduced from its own header.

Exit codes: 0 ok, 1 config error, 2 failed assertion (--assert), 3 resource
cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import exact, limitlaw, mc, process, rarity, scaling, targets
from .errors import (
    ConfigInvalidError,
    EnumerationTooLargeError,
    ExpansionTooLargeError,
    HorizonTooShortError,
    RarehitError,
    RejectionBudgetExceededError,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ASSERTION = 2
EXIT_RESOURCE = 3

_RESOURCE_ERRORS = (EnumerationTooLargeError, ExpansionTooLargeError,
                    RejectionBudgetExceededError, HorizonTooShortError)


def parse_model(text: str) -> process.ProcessModel:
    """Model spec: 'iid-uniform-<q>', inline JSON, or @path-to-json."""
    if text.startswith("@"):
        with open(text[1:]) as f:
            text = f.read()
    if text.lstrip().startswith("{"):
        return process.from_json(text)
    if text.startswith("iid-uniform-"):
        return process.uniform_iid(int(text.rsplit("-", 1)[1]))
    raise ConfigInvalidError(f"cannot parse model spec {text!r}")


def parse_target(text: str, q: int) -> targets.TargetSet:
    """Target spec: 'cyl:0,1,1', 'hamming:0,0,0:0.2', inline JSON or @path."""
    if text.startswith("@"):
        with open(text[1:]) as f:
            text = f.read()
    if text.lstrip().startswith("{"):
        return targets.from_json(text, q)
    if text.startswith("cyl:"):
        return targets.from_dict({"cylinder": text[4:]}, q)
    if text.startswith("hamming:"):
        _, center, D = text.split(":")
        return targets.from_dict({"hamming": {"center": center, "D": float(D)}}, q)
    raise ConfigInvalidError(f"cannot parse target spec {text!r}")


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as f:
            yield f


def _emit_json(fp, config: dict, result: dict) -> None:
    json.dump({"config": config, "result": result}, fp, indent=2, default=float)
    fp.write("\n")


def _config_header(fp, config: dict) -> None:
    fp.write(f"# config: {json.dumps(config, sort_keys=True)}\n")


def _cmd_tail(args) -> int:
    model = parse_model(args.model)
    target = parse_target(args.target, model.alphabet_size)
    config = {"analysis": "tail", "model": process.to_dict(model),
              "target": {"n": target.n, "words": ["".join(map(str, w)) for w in target.words]},
              "K": args.K}
    hit = exact.hitting_tail(model, target, args.K)
    ret = exact.return_tail(model, target, args.K)
    with _output(args.out) as fp:
        _config_header(fp, config)
        exact.write_tails_csv(fp, hit, ret)
    return EXIT_OK


def _cmd_lambda(args) -> int:
    model = parse_model(args.model)
    target = parse_target(args.target, model.alphabet_size)
    config = {"analysis": "lambda", "model": process.to_dict(model),
              "target": {"n": target.n, "kappa": target.kappa}}
    cert, _ = scaling.scale_certificate(model, target)
    with _output(args.out) as fp:
        _emit_json(fp, config, cert.to_dict())
    if args.assert_ and cert.regime == "quantitative" and not all(cert.checks.values()):
        return EXIT_ASSERTION
    return EXIT_OK


def _cmd_verify(args) -> int:
    model = parse_model(args.model)
    target = parse_target(args.target, model.alphabet_size)
    config = {"analysis": "verify", "model": process.to_dict(model),
              "target": {"n": target.n, "kappa": target.kappa}}
    cert, report, _ = scaling.verify(model, target)
    result = {"certificate": cert.to_dict(), "report": report.to_dict()}
    with _output(args.out) as fp:
        _emit_json(fp, config, result)
    if args.assert_ and not (report.passed and all(cert.checks.values())):
        return EXIT_ASSERTION
    return EXIT_OK


def _cmd_limitlaw(args) -> int:
    model = parse_model(args.model)
    target = parse_target(args.target, model.alphabet_size)
    config = {"analysis": "limitlaw", "model": process.to_dict(model),
              "target": {"n": target.n, "kappa": target.kappa}, "s0": args.s0}
    cert, tail = scaling.scale_certificate(model, target)
    tail = scaling.extend_for_verification(model, target, tail, cert.lam)
    ret = exact.return_tail(model, target, tail.horizon)
    F = limitlaw.make_F(tail, cert.lam, cert.mu_A)
    G = limitlaw.make_G(ret, cert.lam, cert.mu_A)
    t_max = 0.9 * F.t_max
    t_grid = np.linspace(args.s0, t_max, 64)
    pairs = [(t_grid[i], t_grid[j]) for i in range(0, 64, 8) for j in range(i + 1, 64, 8)]
    result = {
        "certificate": cert.to_dict(),
        "kac_violation": limitlaw.kac_bound_violation(G, t_grid),
        "sandwich_violation": limitlaw.check_sandwich(F, G, cert.mu_A, pairs),
        "integral_residual_max": float(limitlaw.check_integral_relation(F, G, t_grid).max()),
        "integral_residual_allowance": cert.mu_A,
    }
    with _output(args.out) as fp:
        _emit_json(fp, config, result)
    ok = (result["kac_violation"] <= 1e-10
          and result["sandwich_violation"] <= 1e-10
          and result["integral_residual_max"] <= cert.mu_A + 1e-10)
    if args.assert_ and not ok:
        return EXIT_ASSERTION
    return EXIT_OK


def _entropy_nats(args) -> float:
    if args.h_nats is not None:
        return args.h_nats
    if args.h_bits is not None:
        return args.h_bits * math.log(2.0)
    raise ConfigInvalidError("need --h-bits or --h-nats")


def _cmd_rarity(args) -> int:
    with _output(args.out) as fp:
        if args.rarity_cmd == "d0":
            h = _entropy_nats(args)
            config = {"analysis": "rarity.d0", "q": args.q, "h_nats": h}
            _emit_json(fp, config, {"D0": rarity.solve_D0(args.q, h)})
        elif args.rarity_cmd == "kappa":
            config = {"analysis": "rarity.kappa", "n": args.n, "D": args.D, "q": args.q}
            _emit_json(fp, config,
                       {"kappa_bound": rarity.hamming_kappa_bound(args.n, args.D, args.q)})
        elif args.rarity_cmd == "rate":
            table = {int(k): int(v) for k, v in json.loads(args.kappa_table).items()}
            config = {"analysis": "rarity.rate", "kappa_table": table}
            _emit_json(fp, config, {"rate": rarity.cardinality_rate(table)})
        else:  # epsilon
            model = parse_model(args.model)
            config = {"analysis": "rarity.epsilon", "model": process.to_dict(model),
                      "kappa": args.kappa, "n": args.n}
            rb = rarity.epsilon_bound(model, args.kappa, args.n)
            _emit_json(fp, config, {
                "n": rb.n, "kappa": rb.kappa_n, "h": rb.h, "k": rb.k, "m": rb.m,
                "aep_deficiency": rb.aep_deficiency, "epsilon_n": rb.epsilon_n,
                "surrogate": rb.surrogate,
            })
    return EXIT_OK


def _cmd_mc(args) -> int:
    model = parse_model(args.model)
    target = parse_target(args.target, model.alphabet_size)
    config = {"analysis": "mc", "model": process.to_dict(model),
              "target": {"n": target.n, "kappa": target.kappa},
              "kind": args.kind, "N": args.N, "seed": args.seed, "cap": args.cap}
    sampler = mc.sample_hitting if args.kind == "hitting" else mc.sample_return
    batch = sampler(model, target, args.N, args.seed, censor_cap=args.cap)
    with _output(args.out) as fp:
        _config_header(fp, config)
        mc.write_batch_csv(fp, batch)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    model = parse_model(args.model)
    n_range = range(args.n_min, args.n_max + 1)
    config = {"analysis": "sweep", "model": process.to_dict(model),
              "point": args.point, "n_min": args.n_min, "n_max": args.n_max,
              "s0": args.s0}
    point = [int(s) for s in args.point.split(",")]
    by_n = {}
    for n in n_range:
        word = [point[i % len(point)] for i in range(n)]
        by_n[n] = targets.cylinder(word)
    rows = limitlaw.convergence_diagnostics(model, by_n, s0=args.s0) if by_n else []
    with _output(args.out) as fp:
        _config_header(fp, config)
        limitlaw.write_diagnostics_csv(fp, rows)
    if args.assert_:
        certs = scaling.lambda_trajectory(model, point, n_range)
        for cert in certs:
            if cert.regime == "quantitative" and not all(cert.checks.values()):
                return EXIT_ASSERTION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rarehit",
                                description="Hitting/return time statistics of rare events")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, target=True):
        sp.add_argument("--model", required=True)
        if target:
            sp.add_argument("--target", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=["csv", "json"], default=None)
        sp.add_argument("--assert", dest="assert_", action="store_true")

    sp = sub.add_parser("tail", help="exact hitting/return tail CSV")
    common(sp)
    sp.add_argument("--K", type=int, required=True)
    sp.set_defaults(func=_cmd_tail)

    sp = sub.add_parser("lambda", help="scale certificate and lambda(A)")
    common(sp)
    sp.set_defaults(func=_cmd_lambda)

    sp = sub.add_parser("verify", help="explicit exponential-approximation bound")
    common(sp)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("limitlaw", help="Kac bound, sandwich, integral relation")
    common(sp)
    sp.add_argument("--s0", type=float, default=0.05)
    sp.set_defaults(func=_cmd_limitlaw)

    sp = sub.add_parser("rarity", help="rarity bounds and D0")
    rsub = sp.add_subparsers(dest="rarity_cmd", required=True)
    spe = rsub.add_parser("epsilon")
    spe.add_argument("--model", required=True)
    spe.add_argument("--kappa", type=int, required=True)
    spe.add_argument("--n", type=int, required=True)
    spe.add_argument("--out", default=None)
    spe.set_defaults(func=_cmd_rarity)
    spd = rsub.add_parser("d0")
    spd.add_argument("--q", type=int, required=True)
    spd.add_argument("--h-bits", type=float, default=None)
    spd.add_argument("--h-nats", type=float, default=None)
    spd.add_argument("--out", default=None)
    spd.set_defaults(func=_cmd_rarity)
    spr = rsub.add_parser("rate")
    spr.add_argument("--kappa-table", required=True,
                     help='JSON object mapping n to kappa_n, e.g. \'{"4":16}\'')
    spr.add_argument("--out", default=None)
    spr.set_defaults(func=_cmd_rarity)
    spk = rsub.add_parser("kappa")
    spk.add_argument("--n", type=int, required=True)
    spk.add_argument("--D", type=float, required=True)
    spk.add_argument("--q", type=int, required=True)
    spk.add_argument("--out", default=None)
    spk.set_defaults(func=_cmd_rarity)

    sp = sub.add_parser("mc", help="Monte Carlo sample batch CSV")
    common(sp)
    sp.add_argument("--kind", choices=["hitting", "return"], default="hitting")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--cap", type=int, default=None)
    sp.set_defaults(func=_cmd_mc)

    sp = sub.add_parser("sweep", help="per-n convergence diagnostics for a point")
    sp.add_argument("--model", required=True)
    sp.add_argument("--point", required=True, help="finite word recycled, e.g. 0 or 0,1")
    sp.add_argument("--n-min", type=int, required=True)
    sp.add_argument("--n-max", type=int, required=True)
    sp.add_argument("--s0", type=float, default=0.05)
    sp.add_argument("--out", default=None)
    sp.add_argument("--assert", dest="assert_", action="store_true")
    sp.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except _RESOURCE_ERRORS as e:
        print(f"resource cap exceeded: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigInvalidError, OSError, json.JSONDecodeError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except RarehitError as e:
        print(f"analysis failed: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
