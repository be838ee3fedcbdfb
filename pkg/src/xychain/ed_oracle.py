"""Brute-force ground states of small chains, the oracle for every analytic layer.

Builds the full 2**L spin Hamiltonian

    H = -(lam/4) sum_i [(1+gamma) X_i X_{i+1} + (1-gamma) Y_i Y_{i+1}]
        + (1/2) sum_i Z_i

with periodic wrap-around and finds its lowest eigenpair (Lanczos on a
sparse matrix; dense fallback for tiny L).  Site 0 is the most significant
bit, |0> the sigma_z = +1 state, matching the basis used by `rdm`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh

from .model import ModelParams
from .rdm import Arrangement, DensityMatrix

__all__ = ["SpinGroundState", "exact_ground_state", "partial_trace", "spin_hamiltonian"]

MAX_SITES = 15

_DENSE_CUTOFF = 9  # dense eigh below this, Lanczos above


@dataclass(frozen=True)
class SpinGroundState:
    """Lowest eigenpair of the spin Hamiltonian.

    ``gap`` is the distance to the next eigenvalue; it shrinks roughly like
    lam**(-L) for lam > 1 and is surfaced rather than symmetrized away.
    """

    params: ModelParams
    energy: float
    amplitudes: np.ndarray
    gap: float

    @property
    def L(self) -> int:
        return self.params.L


def spin_hamiltonian(params: ModelParams) -> sparse.csr_matrix:
    """Sparse 2**L Hamiltonian matrix in the computational basis."""
    L = params.L
    dim = 1 << L
    states = np.arange(dim, dtype=np.int64)
    # field term: +1/2 sum_i z_i with z_i = +1 for bit 0
    diag = np.zeros(dim)
    for i in range(L):
        bit = (states >> (L - 1 - i)) & 1
        diag += 0.5 * (1.0 - 2.0 * bit)

    rows, cols, data = [states], [states], [diag]
    cxx = -(params.lam / 4.0) * (1.0 + params.gamma)
    cyy = -(params.lam / 4.0) * (1.0 - params.gamma)
    for i in range(L):
        j = (i + 1) % L
        mask = (1 << (L - 1 - i)) | (1 << (L - 1 - j))
        flipped = states ^ mask
        bi = (states >> (L - 1 - i)) & 1
        bj = (states >> (L - 1 - j)) & 1
        # <b^flip| X_i X_j |b> = 1;  <b^flip| Y_i Y_j |b> = -(-1)^(b_i+b_j)
        elem = cxx - cyy * np.where((bi + bj) % 2, -1.0, 1.0)
        rows.append(flipped)
        cols.append(states)
        data.append(elem)
    h = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return h.tocsr()


def exact_ground_state(params: ModelParams) -> SpinGroundState:
    """Lowest eigenpair, deterministic up to the fixed global-sign rule."""
    if params.thermodynamic:
        raise ValueError("exact diagonalization needs a finite chain")
    if params.L > MAX_SITES:
        raise ValueError(f"chain too long for brute force: L={params.L} > {MAX_SITES}")
    h = spin_hamiltonian(params)
    if params.L <= _DENSE_CUTOFF:
        w, v = np.linalg.eigh(h.toarray())
        energy, psi, gap = w[0], v[:, 0], float(w[1] - w[0])
    else:
        v0 = np.full(h.shape[0], 1.0 / np.sqrt(h.shape[0]))
        w, v = eigsh(h, k=2, which="SA", v0=v0, maxiter=5000)
        order = np.argsort(w)
        energy, psi, gap = w[order[0]], v[:, order[0]], float(w[order[1]] - w[order[0]])
    if gap < 1e-12:
        import warnings

        warnings.warn(
            f"near-degenerate ground state at {params}: gap {gap:.2e}",
            RuntimeWarning,
            stacklevel=2,
        )
    psi = np.real(psi)
    psi /= np.linalg.norm(psi)
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    return SpinGroundState(params, float(energy), psi, gap)


def partial_trace(state: SpinGroundState, sites) -> DensityMatrix:
    """Marginal of the ground state on 3 or 4 selected sites."""
    sites = tuple(sorted(int(s) for s in sites))
    if len(sites) not in (3, 4):
        raise ValueError("partial_trace targets three or four sites")
    if sites[0] < 0 or sites[-1] >= state.L:
        raise ValueError(f"sites {sites} outside chain of length {state.L}")
    psi = state.amplitudes.reshape((2,) * state.L)
    keep = list(sites)
    rest = [i for i in range(state.L) if i not in keep]
    m = np.transpose(psi, keep + rest).reshape(2 ** len(keep), -1)
    rho = m @ m.T
    spac = tuple(b - a for a, b in zip(sites, sites[1:]))
    return DensityMatrix(rho, state.params, Arrangement(spac))
