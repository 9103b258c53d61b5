"""Adiabatic interpolation and minimum spectral gap.

``H(s) = (1 - s) H_B + s H_C`` with the transverse-field driver
``H_B = -sum_i X_i`` and a diagonal cost Hamiltonian ``H_C``. The annealing
time estimate is ``T = 1 / gap_min**2``.

Cost Hamiltonians (``cost``):

``qubo``
    diag(F_C(z)), the QUBO value of every basis state.
``paper-direct``
    ``(sum_i a_i Z_i + sum_ij b_ij Z_i Z_j) / 2`` with the raw QUBO
    coefficients ``a``, ``b``; the operator generated by the paper-direct
    circuit angles.

Scaling (``convention``): ``unnormalized`` or ``normalized`` (H_C divided by
its spectral range ``max - min``).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from qmqo.optimizers import GOLDEN
from qmqo.qubo import Qubo, bit_table

log = logging.getLogger(__name__)

MAX_SPECTRAL_QUBITS = 12
GAP_CONVENTIONS = ("unnormalized", "normalized")
COST_HAMILTONIANS = ("qubo", "paper-direct")
DEGENERATE_GAP = 1e-12


def cost_diagonal(qubo: Qubo, cost: str = "qubo", convention: str = "unnormalized") -> np.ndarray:
    if cost not in COST_HAMILTONIANS:
        raise ValueError(f"unknown cost Hamiltonian {cost!r}; expected one of {COST_HAMILTONIANS}")
    if convention not in GAP_CONVENTIONS:
        raise ValueError(f"unknown gap convention {convention!r}; expected one of {GAP_CONVENTIONS}")
    if cost == "qubo":
        diag = np.array(qubo.energies, dtype=float)
    else:
        spins = 1.0 - 2.0 * bit_table(qubo.n)
        diag = spins @ qubo.linear
        for (i, j), c in qubo.quadratic.items():
            diag += c * spins[:, i] * spins[:, j]
        diag *= 0.5
    if convention == "normalized":
        span = diag.max() - diag.min()
        if span > 0:
            diag = diag / span
    return diag


def driver_hamiltonian(n: int) -> np.ndarray:
    """Dense ``-sum_i X_i``."""
    dim = 2**n
    H = np.zeros((dim, dim))
    z = np.arange(dim)
    for q in range(n):
        H[z ^ (1 << q), z] -= 1.0
    return H


def _check_size(n: int) -> None:
    if n > MAX_SPECTRAL_QUBITS:
        raise ValueError(f"{n} qubits exceed the dense spectral cap of {MAX_SPECTRAL_QUBITS}")


def build_hamiltonian(qubo: Qubo, s: float, cost: str = "qubo", convention: str = "unnormalized") -> np.ndarray:
    """Dense real symmetric ``H(s)``."""
    _check_size(qubo.n)
    H = (1.0 - s) * driver_hamiltonian(qubo.n)
    H[np.diag_indices_from(H)] += s * cost_diagonal(qubo, cost, convention)
    return H


def lowest_two_eigenvalues(H: np.ndarray, symmetry_tol: float = 1e-10) -> tuple[float, float]:
    """Two smallest eigenvalues of a real symmetric matrix, ``e0 <= e1``."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.abs(H).max(initial=0.0)))
    if not np.allclose(H, H.T, rtol=0.0, atol=symmetry_tol * scale):
        raise ValueError("matrix is not symmetric")
    if H.shape[0] == 1:
        return float(H[0, 0]), float(H[0, 0])
    w = eigh(H, eigvals_only=True, subset_by_index=[0, 1], check_finite=True)
    return float(w[0]), float(w[1])


@dataclass
class GapProfile:
    s_grid: np.ndarray
    e0: np.ndarray
    e1: np.ndarray
    delta_min: float
    s_at_min: float
    annealing_time: float
    cost: str = "qubo"
    convention: str = "unnormalized"

    @property
    def gaps(self) -> np.ndarray:
        return self.e1 - self.e0


def annealing_time(delta_min: float) -> float:
    return math.inf if delta_min == 0 else 1.0 / delta_min**2


def gap_profile(
    qubo: Qubo,
    grid_points: int = 201,
    refine: bool = True,
    cost: str = "qubo",
    convention: str = "unnormalized",
    tol: float = 1e-6,
) -> GapProfile:
    """Scan ``s`` on a uniform grid, then refine the minimum gap by golden-section search."""
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    _check_size(qubo.n)
    driver = driver_hamiltonian(qubo.n)
    diag = cost_diagonal(qubo, cost, convention)
    idx = np.diag_indices_from(driver)

    def levels(s: float) -> tuple[float, float]:
        H = (1.0 - s) * driver
        H[idx] += s * diag
        return lowest_two_eigenvalues(H)

    def gap(s: float) -> float:
        e0, e1 = levels(s)
        return e1 - e0

    s_grid = np.linspace(0.0, 1.0, grid_points)
    pairs = np.array([levels(s) for s in s_grid])
    e0, e1 = pairs[:, 0], pairs[:, 1]
    gaps = e1 - e0
    k = int(np.argmin(gaps))
    delta, s_star = float(gaps[k]), float(s_grid[k])

    if refine:
        a = s_grid[max(k - 1, 0)]
        c = s_grid[min(k + 1, grid_points - 1)]
        s_ref, g_ref = _golden_min(gap, a, c, tol)
        if g_ref < delta:
            delta, s_star = g_ref, s_ref

    delta = max(delta, 0.0)
    if delta <= DEGENERATE_GAP:
        warnings.warn(f"ground state is (near-)degenerate at s={s_star:.6g}: gap {delta:.3g}", RuntimeWarning)
    return GapProfile(s_grid, e0, e1, delta, s_star, annealing_time(delta), cost, convention)


def _golden_min(fun, a: float, c: float, tol: float) -> tuple[float, float]:
    """Golden-section minimization on ``[a, c]``; returns the best point seen."""
    x1 = a + GOLDEN * (c - a)
    x2 = c - GOLDEN * (c - a)
    f1, f2 = fun(x1), fun(x2)
    best = min((f1, x1), (f2, x2))
    while c - a > tol:
        if f1 <= f2:
            c, x2, f2 = x2, x1, f1
            x1 = a + GOLDEN * (c - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = c - GOLDEN * (c - a)
            f2 = fun(x2)
        best = min(best, (f1, x1), (f2, x2))
    for end in (a, c):
        best = min(best, (fun(end), end))
    return best[1], best[0]
