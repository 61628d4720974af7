"""Command line driver: ``symmes <subcommand> [options]``.

Exit codes: 0 success, 1 a verification failed, 2 usage error.
"""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .cloning import clone_demo
from .designs import (
    DesignError,
    find_channel_design,
    find_state_design,
    load_design,
    pauli_design,
    save_design,
    verify_design,
)
from .mes import JointState, build_phi, build_psi_singlet, save_state
from .mps import mps_tensors, save_circuit, sequential_circuit, simulate_sequential
from .protocols import FIDELITY_TOL, ProtocolError, run_teleportation, run_transformation, teleport_povm
from .symcheck import (
    PairMapSpec,
    ensemble_rounds,
    gap_scan,
    gnuplot_script,
    iterate_channel,
    write_gap_csv,
    write_regression_json,
)
from .symspace import random_density, random_pure_state

log = logging.getLogger("symmes")


class VerificationFailed(Exception):
    pass


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_branch_csv(records, path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["outcome", "probability", "fidelity", "correction_applied"])
    for r in records:
        row = r.to_dict()
        w.writerow([row["outcome"], repr(row["probability"]), repr(row["fidelity"]), json.dumps(row["correction_applied"])])
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _emit(report, args, records=None):
    if args.format == "csv":
        if records is None:
            raise ValueError(f"{args.command} has no tabular output; use --format json")
        _write_branch_csv(records, args.out)
    else:
        _write_json(report, args.out)


def _complex_json(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(m)]


def _require(ok, msg):
    if not ok:
        raise VerificationFailed(msg)


def _channel_design(args, n):
    if args.design:
        d = load_design(args.design)
        if d.kind != "channel" or d.n != n:
            raise ValueError(f"{args.design} is a {d.kind} design for n={d.n}; need channel, n={n}")
        return d
    return pauli_design() if n == 1 else find_channel_design(n, rng_seed=args.seed)


def cmd_build_state(args):
    state = build_psi_singlet(args.n) if args.kind == "psi" else build_phi(args.n)
    norm = state.norm()
    _require(abs(norm - 1) <= args.tol, f"state norm {norm!r}")
    if args.out:
        save_state(state, args.out)
    summary = {"n": args.n, "kind": args.kind, "entries": state.amplitudes.size, "norm": norm, "tolerance": args.tol}
    summary.update({k: v for k, v in state.meta.items()})
    _write_json(summary, None if args.out is None else Path(args.out).with_suffix(".summary.json"))


def cmd_sequential(args):
    circuit = sequential_circuit(mps_tensors(args.n))
    res = simulate_sequential(args.n, circuit=circuit)
    tol = args.tol
    _require(res.fidelity >= 1 - tol and res.ancilla_defect <= tol, f"fidelity {res.fidelity!r}, ancilla defect {res.ancilla_defect!r}")
    report = {"n": args.n, "fidelity": res.fidelity, "ancilla_defect": res.ancilla_defect, "tolerance": tol}
    if args.out:
        save_circuit(circuit, args.out)
        _write_json(report, Path(args.out).with_suffix(".report.json"))
    else:
        _write_json(report, None)


def cmd_transform(args):
    n = args.n
    if args.target:
        target = JointState.from_dict(json.loads(Path(args.target).read_text())).normalized()
    else:
        rng = np.random.default_rng(args.seed)
        target = JointState(n, amplitudes=rng.standard_normal((n + 1, n + 1)) + 1j * rng.standard_normal((n + 1, n + 1))).normalized()
    design = _channel_design(args, n) if args.design or args.kind == "channel" else None
    if design is None:
        from .protocols import conjugate_root

        sigma = conjugate_root(target)
        design = find_state_design(sigma @ sigma, n, rng_seed=args.seed)
    records = run_transformation(target, design, tol=args.tol)
    tv = 0.5 * sum(abs(r.probability - w) for r, w in zip(records, design.weights))
    _require(tv <= 1e-10, f"outcome distribution deviates from weights by {tv!r}")
    _emit(
        {
            "n": n,
            "design_kind": design.kind,
            "total_variation": tv,
            "fidelity_tolerance": args.tol,
            "correction_rule": records[0].meta["correction_rule"],
            "branches": [r.to_dict() for r in records],
        },
        args,
        records,
    )


def cmd_teleport(args):
    n = args.n
    design = _channel_design(args, n)
    rng = np.random.default_rng(args.seed)
    rho = random_density(n + 1, 2, rng) if args.mixed else random_pure_state(n + 1, rng)
    completeness = teleport_povm(n, design).completeness_residual
    records = run_teleportation(rho, design, rng_seed=args.seed, tol=args.tol)
    _emit(
        {
            "n": n,
            "mixed": bool(args.mixed),
            "completeness_residual": completeness,
            "fidelity_tolerance": args.tol,
            "sampled_outcome": next(r.outcome for r in records if r.sampled),
            "branches": [r.to_dict() for r in records],
        },
        args,
        records,
    )


def cmd_find_design(args):
    n = args.n
    if args.kind == "channel":
        design = find_channel_design(n, rng_seed=args.seed, tol=args.tol)
    else:
        if args.rho:
            r = np.array(json.loads(Path(args.rho).read_text()), dtype=float)
            rho = r[..., 0] + 1j * r[..., 1]
        else:
            rho = np.zeros((n + 1, n + 1), dtype=complex)
            rho[0, 0] = 1
        design = find_state_design(rho, n, rng_seed=args.seed, tol=args.tol)
    residual = verify_design(design)
    summary = {"n": n, "kind": design.kind, "cardinality": len(design), "bound": design.cardinality_bound, "residual": residual, "tolerance": args.tol}
    if args.out:
        save_design(design, args.out)
        _write_json(summary, Path(args.out).with_suffix(".summary.json"))
    else:
        _write_json(summary, None)


def cmd_gap_scan(args):
    result = gap_scan(range(args.n_min, args.n_max + 1), args.topology, args.variant, seed=args.seed)
    out = Path(args.out)
    if args.format == "json":
        rows = [{"n": r.n, "lambda2": r.lambda2_modulus, "gap": r.gap, "iterations": r.iterations} for r in result.records]
        _write_json({"topology": args.topology, "variant": args.variant, "records": rows}, out)
    else:
        write_gap_csv(result, out)
    if len(result.records) >= 3:
        write_regression_json(result, out.with_suffix(".regression.json"))
        if args.gnuplot:
            out.with_suffix(".gp").write_text(gnuplot_script(out.name, result))
    for r in result.records:
        log.info("n=%d lambda2=%.12f gap=%.6e", r.n, r.lambda2_modulus, r.gap)


def cmd_simulate_rounds(args):
    spec = PairMapSpec(args.n, args.topology, args.variant)
    rng = np.random.default_rng(args.seed)
    rho0 = random_density(spec.dim, 1, rng)
    rounds = args.rounds or args.n**3
    seeds = [int(s) for s in rng.integers(0, 2**31, size=args.runs)]
    mean, err = ensemble_rounds(rho0, spec, rounds, seeds)
    exact = iterate_channel(rho0, spec, rounds)
    worst = float(np.max(np.abs(mean - exact) - 4 * err - 1e-12))
    _require(worst <= 0, f"ensemble mean leaves the 4-sigma band by {worst!r}")
    _write_json(
        {
            "n": args.n,
            "rounds": rounds,
            "runs": args.runs,
            "topology": args.topology,
            "variant": args.variant,
            "defect_mean": mean.tolist(),
            "defect_stderr": err.tolist(),
            "defect_channel": exact.tolist(),
            "band_sigma": 4,
        },
        args.out,
    )


def cmd_clone_demo(args):
    n = args.n
    design = _channel_design(args, n)
    psi = random_pure_state(2, args.seed)
    rep = clone_demo(n, psi, design, rng_seed=args.seed, tol=args.tol)
    _write_json(
        {
            "n": n,
            "input_qubit": _complex_json(psi[None])[0],
            "ideal_fidelity": rep.ideal_fidelity,
            "per_qubit_fidelity": rep.per_qubit_fidelity,
            "worst_branch_deviation": rep.worst_branch_deviation,
            "min_branch_fidelity_to_first": rep.min_pairwise_branch_fidelity,
            "tolerance": args.tol,
        },
        args.out,
    )


def cmd_verify_all(args):
    results = acceptance.run_all(quick=args.quick)
    for r in results:
        print(r.line())
    if args.out:
        _write_json([r.to_dict() for r in results], args.out)
    _require(all(r.passed for r in results), "acceptance criteria failed")


def build_parser():
    p = argparse.ArgumentParser(prog="symmes", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, n=True, seed=False, tol=FIDELITY_TOL, out=True, fmt=None):
        sp = sub.add_parser(name)
        if n:
            sp.add_argument("--n", type=int, required=True)
        if seed:
            sp.add_argument("--seed", type=int, required=True)
        sp.add_argument("--tol", type=float, default=tol)
        if out:
            sp.add_argument("--out")
        if fmt:
            sp.add_argument("--format", choices=["json", "csv"], default=fmt)
        sp.set_defaults(func=fn)
        return sp

    sp = add("build-state", cmd_build_state, tol=1e-12)
    sp.add_argument("--kind", choices=["phi", "psi"], default="phi")
    add("sequential", cmd_sequential, tol=1e-10)
    sp = add("transform", cmd_transform, seed=True, fmt="json")
    sp.add_argument("--design")
    sp.add_argument("--target")
    sp.add_argument("--kind", choices=["state", "channel"], default="state")
    sp = add("teleport", cmd_teleport, seed=True, fmt="json")
    sp.add_argument("--design")
    sp.add_argument("--mixed", action="store_true")
    sp = add("find-design", cmd_find_design, seed=True, tol=1e-8)
    sp.add_argument("--kind", choices=["state", "channel"], default="state")
    sp.add_argument("--rho", help="JSON file with an (n+1)x(n+1) matrix of [re, im] pairs")
    sp = add("gap-scan", cmd_gap_scan, n=False, seed=True, out=False, fmt="csv")
    sp.add_argument("--n-min", type=int, required=True)
    sp.add_argument("--n-max", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--gnuplot", action="store_true")
    sp.add_argument("--topology", choices=["ring", "line"], default="ring")
    sp.add_argument("--variant", choices=["formula", "prose"], default="formula")
    sp = add("simulate-rounds", cmd_simulate_rounds, seed=True)
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--runs", type=int, default=200)
    sp.add_argument("--topology", choices=["ring", "line"], default="ring")
    sp.add_argument("--variant", choices=["formula", "prose"], default="formula")
    sp = add("clone-demo", cmd_clone_demo, seed=True)
    sp.add_argument("--design")
    sp = add("verify-all", cmd_verify_all, n=False)
    sp.add_argument("--quick", action="store_true", help="skip the slow gap scan")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 2 on usage error, 0 for --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        args.func(args)
    except (VerificationFailed, ProtocolError, DesignError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
