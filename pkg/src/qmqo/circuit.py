"""QAOA circuit construction.

A depth-p circuit is a Hadamard on every qubit followed by p layers. Each
layer applies, in this order: one RZ per plan (linear terms), one RZZ per
saving, one RZZ per same-query plan pair, then one RX per qubit (the mixer).

Two angle conventions are supported:

``paper-direct``
    RZ(gamma * linear_i), RZZ(gamma * quadratic_ij), the QUBO coefficients used
    directly as rotation angles.
``ising-exact``
    RZ(2 gamma h_i), RZZ(2 gamma J_ij) from the Ising form, so the cost block
    equals ``exp(-i gamma F_C)`` up to a global phase.

Mixer angles are ``RX(beta)`` in both conventions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from qmqo.qubo import Qubo, to_ising

CONVENTIONS = ("ising-exact", "paper-direct")


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("H", "RZ", "RZZ", "RX"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind == "RZZ" else 1
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} takes {arity} target(s), got {self.targets}")
        if arity == 2 and self.targets[0] == self.targets[1]:
            raise ValueError("RZZ targets must be distinct")
        if (self.angle is None) != (self.kind == "H"):
            raise ValueError(f"{self.kind} angle mismatch: {self.angle!r}")


@dataclass(frozen=True)
class QaoaCircuit:
    n: int
    gates: tuple[Gate, ...]
    params: tuple[tuple[float, float], ...]
    convention: str

    @property
    def depth(self) -> int:
        return len(self.params)

    def __len__(self) -> int:
        return len(self.gates)


def _params_pairs(params) -> list[tuple[float, float]]:
    gammas = getattr(params, "gammas", None)
    if gammas is not None:
        return list(zip(map(float, gammas), map(float, params.betas)))
    return [(float(g), float(b)) for g, b in params]


def _ordered_quadratic(qubo: Qubo) -> list[tuple[tuple[int, int], float]]:
    items = list(qubo.quadratic.items())
    savings = [kv for kv in items if kv[0] in qubo.saving_pairs]
    rest = [kv for kv in items if kv[0] not in qubo.saving_pairs]
    return savings + rest


def build(qubo: Qubo, params, convention: str = "ising-exact") -> QaoaCircuit:
    """Build the depth-p circuit.

    ``params`` is either an object with ``gammas``/``betas`` or a sequence of
    ``(gamma, beta)`` pairs, one per layer.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    layers = _params_pairs(params)
    if len(layers) < 1:
        raise ValueError("need at least one (gamma, beta) layer")

    quad = _ordered_quadratic(qubo)
    if convention == "ising-exact":
        ising = to_ising(qubo)
        lin_coef = [2.0 * h for h in ising.h]
        quad_coef = [(key, 2.0 * ising.J[key]) for key, _ in quad]
    else:
        lin_coef = [float(c) for c in qubo.linear]
        quad_coef = quad

    gates = [Gate("H", (q,)) for q in range(qubo.n)]
    for gamma, beta in layers:
        gates.extend(Gate("RZ", (q,), gamma * lin_coef[q]) for q in range(qubo.n))
        gates.extend(Gate("RZZ", key, gamma * c) for key, c in quad_coef)
        gates.extend(Gate("RX", (q,), beta) for q in range(qubo.n))
    return QaoaCircuit(qubo.n, tuple(gates), tuple(layers), convention)


def gate_count(qubo: Qubo, p: int) -> dict[str, int]:
    """Gate totals of a depth-p circuit without building it."""
    n, nq = qubo.n, len(qubo.quadratic)
    counts = {"H": n, "RZ": p * n, "RZZ": p * nq, "RX": p * n}
    counts["total"] = sum(counts.values())
    return counts


def _fmt(x: float) -> str:
    return repr(round(float(x), 12) + 0.0)


def emit_text(circuit: QaoaCircuit) -> str:
    """One gate per line, e.g. ``RZ q0 -9.5`` or ``RZZ q1 q2 -7.0``."""
    lines = [f"# qubits={circuit.n} depth={circuit.depth} convention={circuit.convention}"]
    for g in circuit.gates:
        qubits = " ".join(f"q{t}" for t in g.targets)
        lines.append(g.kind + " " + qubits + ("" if g.angle is None else " " + _fmt(g.angle)))
    return "\n".join(lines) + "\n"

