"""Command-line entry point: reproducible simulation, oracle and bound runs.

Every command is deterministic given its flags (seeded streams, fixed
accumulation order), so reruns produce byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import _kernels
from .bounds import bound_constants, covariance_bound
from .complete_graph import (
    CompleteGraphParams,
    cg_invariant,
    cg_model,
    cg_spectrum_inclusion,
)
from .coupling import CoupledPair, coupling_consistency_check, wasserstein_decay
from .model import Configuration, Model, ergodic_coefficients
from .oracle import enumerate_configurations, generator_matrix, spectrum, stationary_exact
from .semigroup import qsd
from .simulate import SimulationSpec, ensemble_statistics, statistics_to_csv
from .two_point import (
    bd_gap_exact,
    bd_invariant,
    bd_marginal,
    gap_report,
    ratio_monotone_regime,
    tp_model,
)


def _parse_kv(text: str) -> dict:
    out = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        if not _:
            raise argparse.ArgumentTypeError(f"expected key=value, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def _build_model(args) -> tuple[Model, dict]:
    """Model plus a tag describing which builder produced it."""
    sources = [s for s in ("model", "complete_graph", "two_point") if getattr(args, s)]
    if len(sources) != 1:
        raise SystemExit("exactly one of --model/--complete-graph/--two-point is required")
    if args.model:
        with open(args.model) as fh:
            return Model.from_json(fh.read()), {"kind": "file"}
    if args.complete_graph:
        kv = _parse_kv(args.complete_graph)
        K, p = int(kv["K"]), float(kv["p"])
        return cg_model(K, p), {"kind": "cg", "K": K, "p": p}
    a, b, p1, p2 = (float(x) for x in args.two_point.split(","))
    return tp_model(a, b, p1, p2), {"kind": "tp", "a": a, "b": b, "p1": p1, "p2": p2}


def _times(args) -> np.ndarray:
    if args.times:
        return np.array([float(x) for x in args.times.split(",")])
    return np.linspace(0.0, args.t_end, 11)[1:]


def _balanced_start(K: int, N: int) -> Configuration:
    eta = np.full(K, N // K, dtype=np.int64)
    eta[: N % K] += 1
    return Configuration(eta=eta, N=N)


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args) -> int:
    model, _ = _build_model(args)
    spec = SimulationSpec(
        model=model, N=args.N, t_end=args.t_end, seed=args.seed, replicas=args.replicas
    )
    stats = ensemble_statistics(spec, _balanced_start(model.K, args.N), _times(args))
    _emit(args, statistics_to_csv(stats))
    return 0


def _cmd_couple(args) -> int:
    model, _ = _build_model(args)
    # maximally separated start: all particles on site 0 vs all on site K-1
    eta = np.zeros(model.K, dtype=np.int64)
    eta[0] = args.N
    etap = np.zeros(model.K, dtype=np.int64)
    etap[-1] = args.N
    pair0 = CoupledPair(
        eta=Configuration(eta=eta, N=args.N),
        eta_prime=Configuration(eta=etap, N=args.N),
    )
    curve = wasserstein_decay(model, args.N, pair0, _times(args), args.replicas, args.seed)
    _emit(args, curve.to_csv())
    return 0


def _cmd_qsd(args) -> int:
    model, _ = _build_model(args)
    _emit(args, qsd(model).to_json() + "\n")
    return 0


def _cmd_spectrum(args) -> int:
    model, _ = _build_model(args)
    vals = spectrum(generator_matrix(model, args.N))
    _emit(args, json.dumps({"eigenvalues": vals.tolist()}) + "\n")
    return 0


def _cmd_invariant(args) -> int:
    model, _ = _build_model(args)
    space = enumerate_configurations(model.K, args.N)
    law = stationary_exact(model, args.N)
    lines = ["eta,probability\n"]
    for cfg, mass in zip(space.configs, law):
        lines.append(f"{';'.join(map(str, cfg.eta.tolist()))},{float(mass)!r}\n")
    _emit(args, "".join(lines))
    return 0


def _cmd_bounds(args) -> int:
    model, _ = _build_model(args)
    c = bound_constants(model)
    e = ergodic_coefficients(model)
    payload = {
        "Q1": c.Q1,
        "p_sup": c.p_sup,
        "B": c.B,
        "lam": e.lam,
        "alpha": e.alpha,
        "rho": e.rho,
        "rho_prime": e.rho_prime,
        "covariance_bound_at_t_end": covariance_bound(model, args.N, args.t_end),
    }
    _emit(args, json.dumps(payload) + "\n")
    return 0


def _cmd_verify(args) -> int:
    model, tag = _build_model(args)
    N = args.N
    failures = 0

    def report(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        failures += 0 if ok else 1
        suffix = f" ({detail})" if detail else ""
        print(f"{status} {name}{suffix}")

    check = coupling_consistency_check(model, N)
    report("coupling-marginals", check["max_marginal_gap"] < 1e-9,
           f"max gap {check['max_marginal_gap']:.2e}")
    rho = ergodic_coefficients(model).rho
    report("coupling-drift", check["max_drift_violation"] < 1e-9,
           f"max violation of drift <= -({rho:g})*d1: {check['max_drift_violation']:.2e}")

    law = stationary_exact(model, N)
    if tag["kind"] == "cg":
        closed = cg_invariant(CompleteGraphParams(K=tag["K"], N=N, p=tag["p"]))
        report("invariant-closed-form", np.abs(law - closed).max() < 1e-10)
        inc = cg_spectrum_inclusion(CompleteGraphParams(K=tag["K"], N=N, p=tag["p"]))
        report("spectrum-inclusion", inc["max_candidate_distance"] < 1e-8,
               f"max distance {inc['max_candidate_distance']:.2e}")
    if tag["kind"] == "tp":
        chain = bd_marginal(tag["a"], tag["b"], tag["p1"], tag["p2"], N)
        space = enumerate_configurations(2, N)
        marginal = np.zeros(N + 1)
        for cfg, mass in zip(space.configs, law):
            marginal[cfg.eta[0]] += mass
        report("invariant-marginal", np.abs(marginal - bd_invariant(chain)).max() < 1e-10)
        rep = gap_report(tag["a"], tag["b"], tag["p1"], tag["p2"], N)
        exact = bd_gap_exact(chain)
        report("hardy-validity", 0.0 < rep.gap_lower_bound <= exact + 1e-9,
               f"bound {rep.gap_lower_bound:.4g} vs exact {exact:.4g}")
        if ratio_monotone_regime(tag["a"], tag["b"], tag["p1"], tag["p2"], N):
            report("unimodality", rep.unimodal)
        else:
            report("unimodality", True, "outside monotone-ratio regime; not asserted")

    result = qsd(model)
    report("qsd-positive-rate", result.theta > 0, f"theta {result.theta:.4g}")
    return 1 if failures else 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "couple": _cmd_couple,
    "qsd": _cmd_qsd,
    "spectrum": _cmd_spectrum,
    "invariant": _cmd_invariant,
    "bounds": _cmd_bounds,
    "verify": _cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fv-lab",
        description="Simulate and verify redistribution particle systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--model", help="path to a model JSON file {K, Q, p0}")
        p.add_argument("--complete-graph", metavar="K=..,p=..",
                       help="complete-graph builder parameters")
        p.add_argument("--two-point", metavar="a,b,p1,p2",
                       help="two-site builder parameters")
        p.add_argument("--N", type=int, default=10, help="number of particles")
        p.add_argument("--t-end", type=float, default=1.0)
        p.add_argument("--times", help="comma-separated grid (overrides --t-end grid)")
        p.add_argument("--replicas", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output file (default: stdout)")
    return parser


def main(argv=None) -> int:
    # FV_LAB_THREADS caps the compiled-kernel worker pool when available
    threads = os.environ.get("FV_LAB_THREADS")
    if threads and _kernels.USE_NUMBA:
        import numba

        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
