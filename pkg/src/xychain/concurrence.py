"""Four-qubit concurrence: antilinear invariant and its mixed-state extension.

For a pure four-qubit state the quantity is |<psi*| Y Y Y Y |psi>| with
Y the Pauli-y on each factor; it vanishes on the null cone (W-type states)
and reaches 1 on GHZ-type states and products of two Bell pairs.  For a
mixed state rho the closed-form extension uses rho_tilde = Y4 rho* Y4:
with mu_1 >= mu_2 >= ... the square roots of the eigenvalues of
rho*rho_tilde,

    C4(rho) = max(0, mu_1 - sum_{i>=2} mu_i).
"""

from __future__ import annotations

import numpy as np

from .rdm import DensityMatrix

__all__ = ["y_fourfold", "c4_pure", "c4_mixed"]


def y_fourfold() -> np.ndarray:
    """Real matrix of sigma_y applied to each of four qubits."""
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]])
    out = np.array([[1.0 + 0.0j]])
    for _ in range(4):
        out = np.kron(out, sy)
    return out.real  # even power of i: exactly real


def c4_pure(psi) -> float:
    """|<psi*| Y Y Y Y |psi>| of a normalized 16-component vector."""
    v = np.asarray(psi)
    if v.shape != (16,):
        raise ValueError(f"need a four-qubit vector, got shape {v.shape}")
    norm = float(np.vdot(v, v).real)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state not normalized: <psi|psi> = {norm}")
    # <psi*| O |psi> contracts psi with itself (no conjugation)
    return float(abs(v @ y_fourfold() @ v))


def c4_mixed(rho) -> float:
    """Closed-form extension of `c4_pure` to 16-dimensional states."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, float)
    if m.shape != (16, 16):
        raise ValueError(f"need a four-qubit state, got shape {m.shape}")
    y4 = y_fourfold()
    tilde = y4 @ m @ y4          # rho is real, so rho* = rho
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    mid = sqrt_rho @ tilde @ sqrt_rho
    ev = np.clip(np.linalg.eigvalsh(0.5 * (mid + mid.T)), 0.0, None)
    # the sqrt amplifies round-off in the zero eigenvalues; floor them
    ev[ev < 1e-12 * max(ev[-1], 1e-300)] = 0.0
    mu = np.sort(np.sqrt(ev))
    return float(max(0.0, mu[-1] - np.sum(mu[:-1])))
