"""One-command reproductions of the worked example and the main experiments."""

from __future__ import annotations

import os
from statistics import mean
from typing import Optional

from qmqo import problem as mqo
from qmqo.circuit import build, emit_text
from qmqo.qaoa import optimize, optimize_with_restarts
from qmqo.qubo import encode, qubo_eval
from qmqo.spectral import COST_HAMILTONIANS, GAP_CONVENTIONS, gap_profile

FOURIER_VS_RANDOM_INSTANCES = 30


def example2(out_dir: Optional[str] = None) -> dict:
    problem = mqo.example_problem()
    qubo = encode(problem)
    bits, cost = mqo.brute_force(problem)
    print(f"brute force: {mqo.bits_to_str(bits)} cost={mqo._number(cost)}")
    print(f"w_min={mqo._number(qubo.w_min)} w_max={mqo._number(qubo.w_max)}")
    for s in ("1011", "1001"):
        print(f"F_C({s}) = {mqo._number(qubo_eval(qubo, mqo.str_to_bits(s)))}")
    text = emit_text(build(qubo, [(0.5, 0.0)], "paper-direct"))
    print(text, end="")
    result = optimize_with_restarts(qubo, problem, 5, restarts=10, seed=0, optimizer="powell", strategy="fourier")
    print(
        f"qaoa p=5 fourier+powell: argmax={result.argmax_bitstring} "
        f"success_probability={result.success_probability:.4f} approx_ratio={result.approx_ratio:.4f}"
    )
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        mqo.save(problem, os.path.join(out_dir, "example2.json"))
        with open(os.path.join(out_dir, "example2_circuit.txt"), "w", encoding="utf-8") as fh:
            fh.write(text)
    return {"bits": bits, "cost": cost, "result": result}


def fourier_vs_random(
    out_dir: Optional[str] = None, instances: int = FOURIER_VS_RANDOM_INSTANCES, p: int = 5, budget: int = 10000
) -> dict:
    """Random 2x2 instances, one run per strategy each, Powell optimizer."""
    from qmqo.cli import QAOA_COLUMNS, render_csv, write_atomic

    rows = []
    ratios: dict[str, list[float]] = {"fourier": [], "random-init": []}
    for seed in range(instances):
        problem = mqo.generate_random(2, 2, seed)
        qubo = encode(problem)
        for strategy in ("fourier", "random-init"):
            r = optimize(qubo, problem, p, "powell", strategy, seed=seed, budget=budget)
            ratios[strategy].append(r.approx_ratio)
            rows.append((seed, p, "powell", strategy, r.approx_ratio, r.success_probability, r.evaluations, r.best_expectation))
    summary = {k: mean(v) for k, v in ratios.items()}
    for k, v in summary.items():
        print(f"{k}: mean approx_ratio={v:.4f} over {instances} instances (p={p})")
    if out_dir:
        write_atomic(os.path.join(out_dir, "fourier_vs_random.csv"), render_csv(QAOA_COLUMNS, rows))
    return {"ratios": ratios, "mean": summary}


def gap_example(out_dir: Optional[str] = None) -> dict:
    """Minimum gap of the worked example and of the small-gap instance under every convention."""
    instances = {
        "example2": mqo.example_problem(),
        "small-gap(negative savings)": mqo.small_gap_instance(True),
        "small-gap(positive savings)": mqo.small_gap_instance(False),
    }
    table = {}
    for name, problem in instances.items():
        qubo = encode(problem)
        for cost in COST_HAMILTONIANS:
            for conv in GAP_CONVENTIONS:
                prof = gap_profile(qubo, cost=cost, convention=conv)
                table[(name, cost, conv)] = prof
                print(f"{name:28s} {cost:12s} {conv:12s} delta_min={prof.delta_min:.6g} s*={prof.s_at_min:.4f} T={prof.annealing_time:.6g}")
    if out_dir:
        from qmqo.cli import render_csv, write_atomic

        rows = [(n, c, v, p.delta_min, p.s_at_min, p.annealing_time) for (n, c, v), p in table.items()]
        write_atomic(
            os.path.join(out_dir, "gap_conventions.csv"),
            render_csv(["instance", "cost_hamiltonian", "convention", "delta_min", "s_at_min", "annealing_time"], rows),
        )
    return table


REPROS = {"example2": example2, "fourier-vs-random": fourier_vs_random, "gap-example": gap_example}


def run(name: str, out_dir: Optional[str] = None) -> int:
    REPROS[name](out_dir)
    return 0
