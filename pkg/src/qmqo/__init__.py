"""Multiple-query optimization as a QUBO, solved with simulated QAOA."""

from qmqo.circuit import Gate, QaoaCircuit, build, emit_text, gate_count
from qmqo.problem import (
    MqoProblem,
    ProblemError,
    Saving,
    brute_force,
    enumeration_count,
    example_problem,
    generate_random,
    is_admissible,
    solution_cost,
)
from qmqo.qaoa import FourierParams, QaoaParams, QaoaResult, optimize, optimize_with_restarts
from qmqo.qubo import Ising, Qubo, encode, qubo_eval, to_ising
from qmqo.simulator import StateVector, expectation, run, sample
from qmqo.spectral import GapProfile, gap_profile

__version__ = "0.1.0"

__all__ = [
    "FourierParams",
    "GapProfile",
    "Gate",
    "Ising",
    "MqoProblem",
    "ProblemError",
    "QaoaCircuit",
    "QaoaParams",
    "QaoaResult",
    "Qubo",
    "Saving",
    "StateVector",
    "brute_force",
    "build",
    "emit_text",
    "encode",
    "enumeration_count",
    "example_problem",
    "expectation",
    "gap_profile",
    "gate_count",
    "generate_random",
    "is_admissible",
    "optimize",
    "optimize_with_restarts",
    "qubo_eval",
    "run",
    "sample",
    "solution_cost",
    "to_ising",
]
