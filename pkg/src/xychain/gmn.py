"""Genuine multiparticle negativity via the decomposable-witness program.

``N = max(0, -min_W tr(W rho))`` where W ranges over observables that split,
for every bipartition m of the parties, as ``W = P_m + Q_m^{T_m}`` with
``0 <= P_m, Q_m <= 1``.  A strictly negative optimum certifies that rho is
not a PPT mixture and hence genuinely multiparticle entangled; N vanishes
on every biseparable state.  Witnesses returned by the optimizer can be
re-verified with `verify_witness`, which uses nothing but fresh
eigendecompositions of the reported matrices.

All states handled here are real symmetric, so the optimization is run over
real symmetric variables: conjugating any feasible complex point gives an
equally feasible one with the same objective, and their average is real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ipm import (
    SolverFailure,
    partial_transpose_matrix,
    solve_witness_sdp,
)
from .rdm import DensityMatrix, validate_state

__all__ = [
    "SolverFailure",
    "Bipartition",
    "WitnessDecomposition",
    "NegativityResult",
    "bipartitions",
    "partial_transpose",
    "genuine_negativity",
    "verify_witness",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Bipartition:
    """One side of a split of the parties, canonicalized to contain party 0."""

    subset: tuple[int, ...]
    n_parties: int

    def __post_init__(self):
        s = tuple(sorted(set(self.subset)))
        if not s or len(s) >= self.n_parties:
            raise ValueError("subset must be a nonempty proper subset")
        if any(p < 0 or p >= self.n_parties for p in s):
            raise ValueError(f"party index out of range in {s}")
        if 0 not in s:
            s = tuple(p for p in range(self.n_parties) if p not in s)
        object.__setattr__(self, "subset", s)


def bipartitions(n_parties: int) -> list[Bipartition]:
    """All distinct splits: 3 for three parties, 7 for four."""
    from itertools import combinations

    rest = range(1, n_parties)
    out = [Bipartition((0,), n_parties)]
    for k in range(1, n_parties - 1):
        for extra in combinations(rest, k):
            out.append(Bipartition((0,) + extra, n_parties))
    return out


def partial_transpose(m: np.ndarray, subset, n_parties: int) -> np.ndarray:
    """Partial transpose of a multi-qubit operator over ``subset``."""
    sub = subset.subset if isinstance(subset, Bipartition) else tuple(subset)
    return partial_transpose_matrix(np.asarray(m, dtype=float), sub, n_parties)


@dataclass(frozen=True)
class WitnessDecomposition:
    witness: np.ndarray
    parts: tuple[Bipartition, ...]
    p_blocks: tuple[np.ndarray, ...]
    q_blocks: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class NegativityResult:
    value: float
    raw_objective: float        # tr(W rho), negative when entanglement is found
    witness: WitnessDecomposition
    duality_gap: float
    iterations: int
    status: str                 # "optimal" or "inaccurate"


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=float)


def genuine_negativity(rho, tol: float = DEFAULT_TOL,
                       max_iter: int = 200) -> NegativityResult:
    """Genuine multiparticle negativity of a 3- or 4-qubit state.

    Parameters
    ----------
    rho : DensityMatrix or (8,8)/(16,16) array
        Real symmetric unit-trace state.
    tol : float
        Target for the duality gap and both feasibility residuals.

    Raises
    ------
    ValueError
        For non-physical input (validate_state fails at 100*tol).
    SolverFailure
        Only on interior-point breakdown; slow convergence instead returns
        ``status="inaccurate"`` with the best bound found.
    """
    mat = _as_matrix(rho)
    dim = mat.shape[0]
    if dim not in (8, 16):
        raise ValueError(f"need 3 or 4 qubits, got dimension {dim}")
    n = 3 if dim == 8 else 4
    report = validate_state(mat, tol=max(1e-7, 100.0 * tol))
    if not report.passed:
        raise ValueError(
            f"input state is not physical: trace dev {report.trace_deviation:.2e}, "
            f"asymmetry {report.asymmetry:.2e}, min eig {report.min_eigenvalue:.2e}"
        )
    parts = bipartitions(n)
    sol = solve_witness_sdp(0.5 * (mat + mat.T), [b.subset for b in parts], n,
                            tol=tol, max_iter=max_iter)
    decomposition = WitnessDecomposition(
        witness=sol.witness,
        parts=tuple(parts),
        p_blocks=tuple(sol.p_blocks),
        q_blocks=tuple(sol.q_blocks),
    )
    return NegativityResult(
        value=max(0.0, -sol.objective),
        raw_objective=sol.objective,
        witness=decomposition,
        duality_gap=sol.gap + sol.primal_residual + sol.dual_residual,
        iterations=sol.iterations,
        status=sol.status,
    )


def verify_witness(res: NegativityResult, rho, tol: float = 1e-7) -> tuple[bool, dict]:
    """Re-check the returned witness with plain eigendecompositions.

    Confirms, for every bipartition, that ``W = P_m + Q_m^{T_m}`` holds,
    that the eigenvalues of P_m and Q_m lie in [-tol, 1+tol], and that
    ``-tr(W rho)`` reproduces the reported value within the duality gap
    plus ``tol``.  No solver state is consulted.
    """
    mat = _as_matrix(rho)
    w = res.witness.witness
    n = res.witness.parts[0].n_parties
    report: dict = {"bipartitions": []}
    ok = True
    for part, p, q in zip(res.witness.parts, res.witness.p_blocks,
                          res.witness.q_blocks):
        residual = float(np.max(np.abs(
            w - (p + partial_transpose(q, part, n))
        )))
        p_eigs = np.linalg.eigvalsh(0.5 * (p + p.T))
        q_eigs = np.linalg.eigvalsh(0.5 * (q + q.T))
        entry = {
            "subset": part.subset,
            "decomposition_residual": residual,
            "p_range": (float(p_eigs[0]), float(p_eigs[-1])),
            "q_range": (float(q_eigs[0]), float(q_eigs[-1])),
        }
        entry["passed"] = (
            residual <= tol
            and p_eigs[0] >= -tol and p_eigs[-1] <= 1.0 + tol
            and q_eigs[0] >= -tol and q_eigs[-1] <= 1.0 + tol
        )
        ok = ok and entry["passed"]
        report["bipartitions"].append(entry)
    objective = float(np.sum(w * mat))
    value_dev = abs(max(0.0, -objective) - res.value)
    report["objective"] = objective
    report["value_deviation"] = value_dev
    ok = ok and value_dev <= res.duality_gap + tol
    report["passed"] = ok
    return ok, report
