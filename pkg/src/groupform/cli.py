"""Command-line driver.

Exit codes: 0 on success or a confirmed equilibrium, 1 when a check finds a
blocking deviation (or dynamics fail to converge), 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import serialize
from .dynamics import DeviationPolicy, Mode, run_dynamics
from .errors import GroupFormationError, PreconditionError
from .geometry import DEFAULT_TOL, CoverageKind
from .model import (AffineTradeoff, GForm, NoPenalty, Partition, PowerScaled, Ratio,
                    ResourceScaled, UtilitySpec, game_for)
from .psae import psae_bruteforce, psae_diameter_fast
from .realize import realize_dag
from .structure import assert_structure_theorems, encroachment_graph
from .verify import check_ae, check_sae, enumerate_equilibria

EXIT_OK, EXIT_UNSTABLE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt_partition(p: Partition) -> str:
    return str(p)


def _load(args):
    instance, spec, partition = serialize.load_instance(args.instance)
    if getattr(args, "partition", None):
        raw = args.partition
        groups = json.loads(Path(raw).read_text()) if Path(raw).is_file() else json.loads(raw)
        partition = game_for(instance, spec).canonical(groups)
    return instance, spec, partition


def _require_partition(partition):
    if partition is None:
        raise UsageError("no partition: add a \"partition\" field to the instance or pass --partition")
    return partition


def _spec_from_args(args) -> UtilitySpec:
    if args.power == "affine":
        power = AffineTradeoff(args.a, args.b)
    else:
        power = Ratio(GForm(args.power), args.alpha)
    if args.penalty == "resource_scaled":
        penalty = ResourceScaled(args.beta)
    elif args.penalty == "power_scaled":
        penalty = PowerScaled(args.beta)
    else:
        penalty = NoPenalty()
    return UtilitySpec(CoverageKind(args.coverage), power, penalty, args.epsilon)


def _add_spec_flags(p: argparse.ArgumentParser, coverage: str) -> None:
    p.add_argument("--coverage", choices=[k.value for k in CoverageKind], default=coverage)
    p.add_argument("--power", choices=[g.value for g in GForm] + ["affine"], default="linear")
    p.add_argument("--alpha", type=float, default=1.0, help="exponent for --power power")
    p.add_argument("--a", type=float, default=1.0, help="resource weight for --power affine")
    p.add_argument("--b", type=float, default=1.0, help="coverage weight for --power affine")
    p.add_argument("--penalty", choices=["none", "resource_scaled", "power_scaled"], default="none")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=1e-9)


def cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    inst = serialize.gen_random(args.n, args.d, args.seed, (args.box_lo, args.box_hi), args.r_min, args.r_max)
    text = serialize.dumps_instance(inst, spec)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve(args) -> int:
    instance, spec, partition = _load(args)
    game = game_for(instance, spec)
    if args.init == "singletons":
        start = game.canonical([[i] for i in instance.agents])
    elif args.init == "grand":
        start = game.canonical([list(instance.agents)])
    else:
        start = _require_partition(partition)
    res = run_dynamics(instance, start, spec, Mode(args.mode), DeviationPolicy(args.policy),
                       args.seed, args.max_subset, args.max_iterations)
    tr = res.trace
    for t, step in enumerate(tr.steps, 1):
        print(f"step {t}: {step.deviation.describe()}")
    print(f"final partition: {_fmt_partition(res.partition)}")
    print(f"converged: {tr.converged} after {tr.iterations} iterations ({tr.stability})")
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            serialize.write_trace(fh, tr, instance.n)
    if args.out:
        serialize.save_instance(args.out, instance, spec, res.partition)
    return EXIT_OK if tr.converged else EXIT_UNSTABLE


def cmd_psae(args) -> int:
    instance, spec, _ = _load(args)
    if args.fast:
        part, diag = psae_diameter_fast(instance, spec, oracle_check=args.oracle_check)
        print(f"candidates per round: {diag.candidate_counts}")
        if diag.tie_breaks:
            print(f"lexicographic tie-break used in rounds {diag.tie_breaks}")
        if args.oracle_check:
            if diag.discrepancies:
                for rnd, fast_u, brute_u in diag.discrepancies:
                    print(f"oracle disagreement in round {rnd}: fast {fast_u!r} < brute force {brute_u!r}")
            else:
                print("oracle check: agrees with brute force")
    else:
        part = psae_bruteforce(instance, spec)
    print(f"partition: {_fmt_partition(part)}")
    game = game_for(instance, spec)
    for k, u in enumerate(game.utilities(part.groups)):
        print(f"  G{k} = {sorted(part.groups[k])}  U = {u!r}")
    if args.out:
        serialize.save_instance(args.out, instance, spec, part)
    return EXIT_OK


def cmd_check(args) -> int:
    instance, spec, partition = _load(args)
    partition = _require_partition(partition)
    if args.kind == "ae":
        verdict = check_ae(instance, partition, spec)
    else:
        verdict = check_sae(instance, partition, spec, args.max_subset)
    print(f"partition: {_fmt_partition(partition)}")
    print(verdict)
    return EXIT_OK if verdict.stable else EXIT_UNSTABLE


def cmd_analyze(args) -> int:
    instance, spec, partition = _load(args)
    partition = _require_partition(partition)
    graph = encroachment_graph(instance, partition, args.tol)
    print(f"partition: {_fmt_partition(partition)}")
    for pair in sorted(graph.labels):
        print(f"  {graph.labels[pair]}")
    print(f"edges: {sorted(graph.edges)}")
    status = EXIT_OK
    try:
        report = assert_structure_theorems(instance, partition, spec, args.tol)
    except PreconditionError as exc:
        print(f"structure assertions skipped: {exc}")
    else:
        for line in report.lines():
            print(line)
        if not report.passed:
            status = EXIT_UNSTABLE
    if args.dot:
        Path(args.dot).write_text(serialize.graph_to_dot(instance, partition, spec, graph))
    return status


def cmd_realize(args) -> int:
    dag = serialize.parse_dag(Path(args.dag).read_text())
    spec = _spec_from_args(args)
    cert = realize_dag(dag, spec, seed=args.seed, epsilon=args.scaffold_eps)
    print(json.dumps(cert.summary(), indent=2))
    if args.out:
        serialize.save_instance(args.out, cert.instance, spec, cert.partition)
    return EXIT_OK if cert.ok else EXIT_UNSTABLE


def cmd_enumerate(args) -> int:
    instance, spec, _ = _load(args)
    found = enumerate_equilibria(instance, spec, Mode(args.kind))
    for p in found:
        print(_fmt_partition(p))
    print(f"{len(found)} {args.kind.upper()} partition(s)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="groupform", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-d", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--box-lo", type=float, default=0.0)
    p.add_argument("--box-hi", type=float, default=1.0)
    p.add_argument("--r-min", type=float, default=0.5)
    p.add_argument("--r-max", type=float, default=5.0)
    p.add_argument("--out")
    _add_spec_flags(p, "diameter")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run improving-deviation dynamics")
    p.add_argument("instance")
    p.add_argument("--mode", choices=["ae", "sae"], default="ae")
    p.add_argument("--policy", choices=[x.value for x in DeviationPolicy], default="first")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-subset", type=int)
    p.add_argument("--max-iterations", type=int, default=100_000)
    p.add_argument("--init", choices=["singletons", "grand", "file"], default="singletons")
    p.add_argument("--partition", help="JSON list of groups (or a file holding one); implies --init file")
    p.add_argument("--trace", help="write the step trace as CSV")
    p.add_argument("--out", help="write the instance with the final partition")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("psae", help="greedy maximum-utility group extraction")
    p.add_argument("instance")
    p.add_argument("--fast", action="store_true", help="diameter fast path")
    p.add_argument("--oracle-check", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_psae)

    p = sub.add_parser("check", help="check a partition for AE/SAE")
    p.add_argument("instance")
    p.add_argument("--kind", choices=["ae", "sae"], default="ae")
    p.add_argument("--max-subset", type=int)
    p.add_argument("--partition")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("analyze", help="encroachment graph and structural assertions")
    p.add_argument("instance")
    p.add_argument("--partition")
    p.add_argument("--dot")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("realize", help="build an instance realizing a DAG")
    p.add_argument("--dag", required=True, help="edge list or DOT digraph")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scaffold-eps", type=float, default=1e-3)
    _add_spec_flags(p, "hull_perimeter")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("enumerate", help="list every equilibrium (n <= 10)")
    p.add_argument("instance")
    p.add_argument("--kind", choices=["ae", "sae"], default="sae")
    p.set_defaults(func=cmd_enumerate)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "partition", None) and getattr(args, "init", None) == "singletons":
        args.init = "file"
    try:
        return args.func(args)
    except (GroupFormationError, UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
