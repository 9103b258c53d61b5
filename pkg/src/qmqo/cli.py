"""Command-line front end.

Every source of randomness is an explicit ``--seed``. CSV files are written to
a temporary file next to the target and renamed into place, so a failed run
leaves no partial output. ``QMQO_THREADS`` caps the number of worker
processes used by sweeps (default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean
from typing import Callable, Iterable, Optional, Sequence

from qmqo import problem as mqo
from qmqo.circuit import CONVENTIONS, build, emit_text, gate_count
from qmqo.optimizers import OPTIMIZERS
from qmqo.qaoa import STRATEGIES, QaoaParams, optimize_with_restarts
from qmqo.qubo import encode
from qmqo.spectral import COST_HAMILTONIANS, GAP_CONVENTIONS, gap_profile

log = logging.getLogger("qmqo")

QAOA_COLUMNS = ["seed", "p", "optimizer", "strategy", "approx_ratio", "success_prob", "evaluations", "best_expectation"]
BENCH_COLUMNS = ["Q", "P", "qubits", "p", "mean_success_prob", "mean_approx_ratio"]
GAP_COLUMNS = ["s", "e0", "e1", "gap"]


class CliError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    problem_file: Optional[str] = None
    generator: Optional[tuple] = None  # (Q, P, seed) for qaoa; (Qs, Ps, first seed) for bench
    p_values: list[int] = field(default_factory=lambda: [1])
    optimizer: str = "powell"
    strategy: str = "fourier"
    seeds: list[int] = field(default_factory=lambda: [0])
    restarts: int = 1
    budget: int = 10000
    shots: int = 0
    out: Optional[str] = None
    gap_convention: str = "unnormalized"

    def __post_init__(self):
        if (self.problem_file is None) == (self.generator is None):
            raise CliError("give exactly one problem source: a problem file or --generate Q P SEED")
        if not self.seeds:
            raise CliError("at least one seed is required")

    def load_problem(self) -> mqo.MqoProblem:
        if self.problem_file is not None:
            return mqo.load(self.problem_file)
        q, p, seed = self.generator
        return mqo.generate_random(q, p, seed)


# --- helpers -------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _workers() -> int:
    raw = os.environ.get("QMQO_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise CliError(f"QMQO_THREADS must be an integer, got {raw!r}") from None


def parallel_map(func: Callable, items: Sequence) -> list:
    """Order-preserving map; uses worker processes when QMQO_THREADS > 1."""
    workers = min(_workers(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def parse_int_list(text: str) -> list[int]:
    """``"3"``, ``"1,2,5"`` or ``"1-5"`` (inclusive)."""
    values: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif part:
            values.append(int(part))
    if not values:
        raise argparse.ArgumentTypeError(f"empty integer list: {text!r}")
    return values


def parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


# --- commands ------------------------------------------------------------


def cmd_generate(args) -> int:
    config = mqo.GeneratorConfig(saving_density=args.density)
    problem = mqo.generate_random(args.queries, args.plans, args.seed, config)
    _emit(mqo.dumps(problem), args.out)
    return 0


def cmd_brute(args) -> int:
    problem = mqo.load(args.problem)
    bits, cost = mqo.brute_force(problem)
    print(f"{mqo.bits_to_str(bits)} cost={mqo._number(cost)}")
    return 0


def _qaoa_cell(task) -> tuple:
    problem, p, seed, config = task
    qubo = encode(problem)
    r = optimize_with_restarts(
        qubo,
        problem,
        p,
        restarts=config.restarts,
        seed=seed,
        optimizer=config.optimizer,
        strategy=config.strategy,
        budget=config.budget,
        shots=config.shots,
    )
    return (seed, p, config.optimizer, config.strategy, r.approx_ratio, r.success_probability, r.evaluations, r.best_expectation)


def run_qaoa(config: ExperimentConfig) -> list[tuple]:
    problem = config.load_problem()
    tasks = [(problem, p, seed, config) for seed in config.seeds for p in config.p_values]
    rows = parallel_map(_qaoa_cell, tasks)
    return sorted(rows, key=lambda r: (r[0], r[1]))


def cmd_qaoa(args) -> int:
    config = ExperimentConfig(
        command="qaoa",
        problem_file=args.problem,
        generator=tuple(args.generate) if args.generate else None,
        p_values=args.p,
        optimizer=args.optimizer,
        strategy=args.strategy,
        seeds=args.seed,
        restarts=args.restarts,
        budget=args.budget,
        shots=args.shots,
        out=args.out,
    )
    rows = run_qaoa(config)
    text = render_csv(QAOA_COLUMNS, rows)
    if config.out:
        write_atomic(config.out, text)
    else:
        sys.stdout.write(text)
    for p in config.p_values:
        ratios = [r[4] for r in rows if r[1] == p]
        print(
            f"p={p} optimizer={config.optimizer} strategy={config.strategy} "
            f"mean_approx_ratio={mean(ratios):.6f}",
            file=sys.stderr if not config.out else sys.stdout,
        )
    return 0


def cmd_gap(args) -> int:
    problem = mqo.load(args.problem)
    prof = gap_profile(encode(problem), args.grid, refine=not args.no_refine, cost=args.cost_hamiltonian, convention=args.gap_convention)
    rows = [(float(s), float(a), float(b), float(b - a)) for s, a, b in zip(prof.s_grid, prof.e0, prof.e1)]
    if args.out:
        write_atomic(args.out, render_csv(GAP_COLUMNS, rows))
    print(f"delta_min={prof.delta_min:.6g} s*={prof.s_at_min:.6g} T={prof.annealing_time:.6g}")
    return 0


def _bench_cell(task) -> tuple:
    Q, P, p, seeds, config = task
    success, ratios = [], []
    for seed in seeds:
        problem = mqo.generate_random(Q, P, seed)
        qubo = encode(problem)
        r = optimize_with_restarts(
            qubo, problem, p, restarts=config.restarts, seed=seed,
            optimizer=config.optimizer, strategy=config.strategy, budget=config.budget, shots=config.shots,
        )
        success.append(r.success_probability)
        ratios.append(r.approx_ratio)
    return (Q, P, Q * P, p, mean(success), mean(ratios))


def cmd_bench(args) -> int:
    config = ExperimentConfig(
        command="bench",
        generator=(tuple(args.queries), tuple(args.plans), args.seed),
        p_values=args.p,
        optimizer=args.optimizer,
        strategy=args.strategy,
        seeds=list(range(args.seed, args.seed + args.instances)),
        restarts=args.restarts,
        budget=args.budget,
        shots=args.shots,
        out=args.out,
    )
    tasks = [(Q, P, p, config.seeds, config) for Q in args.queries for P in args.plans for p in config.p_values]
    rows = sorted(parallel_map(_bench_cell, tasks), key=lambda r: (r[0], r[1], r[3]))
    _emit(render_csv(BENCH_COLUMNS, rows), args.out)
    return 0


def cmd_circuit(args) -> int:
    qubo = encode(mqo.load(args.problem))
    gammas, betas = parse_float_list(args.gamma), parse_float_list(args.beta)
    if len(gammas) != len(betas):
        raise CliError("--gamma and --beta need the same number of values")
    circuit = build(qubo, QaoaParams(gammas, betas), args.convention)
    sys.stdout.write(emit_text(circuit))
    counts = gate_count(qubo, circuit.depth)
    print("# " + " ".join(f"{k}={v}" for k, v in counts.items()))
    return 0


def cmd_dump_qubo(args) -> int:
    qubo = encode(mqo.load(args.problem))
    rows = [("linear", i, "", float(c)) for i, c in enumerate(qubo.linear)]
    rows += [("quadratic", i, j, float(c)) for (i, j), c in sorted(qubo.quadratic.items())]
    _emit(render_csv(["kind", "i", "j", "coefficient"], rows), args.out)
    return 0


def cmd_repro(args) -> int:
    from qmqo import repro

    return repro.run(args.name, out_dir=args.out_dir)


# --- parser --------------------------------------------------------------


def _add_opt_flags(sp, p_default="1") -> None:
    sp.add_argument("--p", type=parse_int_list, default=parse_int_list(p_default), help="depth(s): 3, 1,2,5 or 1-5")
    sp.add_argument("--optimizer", choices=sorted(OPTIMIZERS), default="powell")
    sp.add_argument("--strategy", choices=STRATEGIES, default="fourier")
    sp.add_argument("--restarts", type=int, default=1)
    sp.add_argument("--budget", type=int, default=10000, help="circuit evaluations per run")
    sp.add_argument("--shots", type=int, default=0, help="0 = exact expectation")
    sp.add_argument("--out", help="CSV output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmqo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("generate", help="write a random problem file")
    sp.add_argument("--queries", "-Q", type=int, required=True)
    sp.add_argument("--plans", "-P", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--density", type=float, default=0.25, help="saving probability per cross-query pair")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("brute", help="exact optimum by enumeration")
    sp.add_argument("problem")
    sp.set_defaults(func=cmd_brute)

    sp = sub.add_parser("qaoa", help="optimize QAOA parameters")
    sp.add_argument("problem", nargs="?")
    sp.add_argument("--generate", type=int, nargs=3, metavar=("Q", "P", "SEED"))
    sp.add_argument("--seed", type=parse_int_list, default=[0], help="seed(s), e.g. 0-29")
    _add_opt_flags(sp)
    sp.set_defaults(func=cmd_qaoa)

    sp = sub.add_parser("gap", help="minimum spectral gap of the adiabatic path")
    sp.add_argument("problem")
    sp.add_argument("--grid", type=int, default=201)
    sp.add_argument("--no-refine", action="store_true")
    sp.add_argument("--gap-convention", choices=GAP_CONVENTIONS, default="unnormalized")
    sp.add_argument("--cost-hamiltonian", choices=COST_HAMILTONIANS, default="qubo")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gap)

    sp = sub.add_parser("bench", help="sweep random instances over a (Q, P, p) grid")
    sp.add_argument("--queries", "-Q", type=parse_int_list, default=[2])
    sp.add_argument("--plans", "-P", type=parse_int_list, default=[2])
    sp.add_argument("--instances", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0, help="first instance seed")
    _add_opt_flags(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("circuit", help="print the QAOA circuit")
    sp.add_argument("problem")
    sp.add_argument("--gamma", default="0.5", help="comma-separated, one per layer")
    sp.add_argument("--beta", default="0.5", help="comma-separated, one per layer")
    sp.add_argument("--convention", choices=CONVENTIONS, default="ising-exact")
    sp.set_defaults(func=cmd_circuit)

    sp = sub.add_parser("dump-qubo", help="QUBO coefficients as CSV")
    sp.add_argument("problem")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_dump_qubo)

    sp = sub.add_parser("repro", help="reproduce worked examples and experiments")
    sp.add_argument("name", choices=["example2", "fourier-vs-random", "gap-example"])
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_repro)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, mqo.ProblemError, ValueError, IndexError, OSError) as exc:
        print(f"qmqo: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
