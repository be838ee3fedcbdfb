"""Reduced three- and four-qubit density matrices of the ground state.

A k-site marginal is assembled from its Pauli expectations,

    rho = (1/2^k) sum_P  <P>  P,

where the sum runs over the symmetry-allowed basis strings only (even X and
Y counts: 24 of 64 terms for three sites, 72 of 256 for four).  Strings
with an even number of Y's are real matrices up to a sign, so the marginal
is real symmetric by construction.

Basis convention: tensor factors ordered left-to-right by site index,
computational |0> is the sigma_z = +1 eigenstate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .correlators import CorrelatorTable, DEFAULT_TOL, build_table
from .model import ModelParams
from .wick import PauliString, reduce_pauli_string, wick_determinant

__all__ = [
    "PhysicalityError",
    "Arrangement",
    "DensityMatrix",
    "StateReport",
    "arrangement_sites",
    "build_rdm",
    "validate_state",
    "partial_trace_matrix",
]

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
_SY_REAL = np.array([[0.0, 1.0], [-1.0, 0.0]])  # i * sigma_y, real antisymmetric
_ID = np.eye(2)


class PhysicalityError(ValueError):
    """A constructed state violates trace, symmetry or positivity bounds."""


@dataclass(frozen=True)
class Arrangement:
    """Spacings (alpha, beta) or (alpha, beta, delta) between selected sites."""

    spacings: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "spacings", tuple(int(s) for s in self.spacings))
        if len(self.spacings) not in (2, 3):
            raise ValueError("an arrangement has two or three spacings")
        if any(s < 1 for s in self.spacings):
            raise ValueError(f"spacings must be positive, got {self.spacings}")

    @property
    def n_sites(self) -> int:
        return len(self.spacings) + 1

    @property
    def span(self) -> int:
        return sum(self.spacings)

    def canonical(self) -> "Arrangement":
        """Mirror representative: (alpha, beta) -> alpha <= beta, four-site
        (alpha, beta, delta) -> alpha <= delta."""
        s = self.spacings
        return Arrangement(min(s, s[::-1]))


def arrangement_sites(arr: Arrangement) -> tuple[int, ...]:
    """Site offsets (0, alpha, alpha+beta, ...) of an arrangement."""
    sites = [0]
    for s in arr.spacings:
        sites.append(sites[-1] + s)
    return tuple(sites)


@dataclass(frozen=True)
class DensityMatrix:
    """Real symmetric unit-trace state with its provenance."""

    matrix: np.ndarray
    params: ModelParams | None = None
    arrangement: Arrangement | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"state must be a square matrix, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        n = int(round(np.log2(self.dim)))
        if 2 ** n != self.dim:
            raise ValueError(f"dimension {self.dim} is not a power of two")
        return n


@dataclass(frozen=True)
class StateReport:
    trace_deviation: float
    asymmetry: float
    min_eigenvalue: float
    passed: bool


@lru_cache(maxsize=None)
def _basis_matrices(labels: tuple[str, ...]) -> np.ndarray:
    """Real matrix of a Pauli string with an even number of Y's.

    Each Y contributes i*sigma_y; the compensating (-i)^{#Y} = (-1)^{#Y/2}
    is folded in so the result equals the true (real) Pauli product.
    """
    mats = {"X": _SX, "Y": _SY_REAL, "Z": _SZ, "I": _ID}
    out = np.array([[1.0]])
    for l in labels:
        out = np.kron(out, mats[l])
    if (labels.count("Y") // 2) % 2:
        out = -out
    return out


@lru_cache(maxsize=None)
def _rdm_terms(spacings: tuple[int, ...]) -> tuple[tuple[tuple[str, ...], object], ...]:
    """Reduced monomials of every symmetry-allowed basis string (cached)."""
    arr = Arrangement(spacings)
    sites = arrangement_sites(arr)
    terms = []
    for labels in product("XYZI", repeat=arr.n_sites):
        if labels.count("X") % 2 or labels.count("Y") % 2:
            continue
        mono = reduce_pauli_string(PauliString(sites, labels))
        if mono is not None:
            terms.append((labels, mono))
    return tuple(terms)


def required_window(arr: Arrangement) -> tuple[int, int]:
    """Offset window of G needed by every determinant of the arrangement."""
    s = arr.span + 1
    return -s, s


def build_rdm(params: ModelParams, arr: Arrangement,
              tol: float = DEFAULT_TOL) -> DensityMatrix:
    """Ground-state marginal on the sites selected by ``arr``.

    Raises
    ------
    PhysicalityError
        If the assembled matrix fails `validate_state` at ``1e-9`` (signals
        an upstream correlator or sign bug, not a user error).
    """
    if not params.thermodynamic and arr.span + 1 > params.L:
        raise ValueError(f"arrangement {arr.spacings} does not fit in L={params.L}")
    rmin, rmax = required_window(arr)
    g = build_table(params, rmin, rmax, tol)
    return rdm_from_table(g, arr)


def rdm_from_table(g: CorrelatorTable, arr: Arrangement) -> DensityMatrix:
    """Assemble the marginal from an existing contraction table."""
    k = arr.n_sites
    dim = 2 ** k
    rho = np.zeros((dim, dim))
    for labels, mono in _rdm_terms(arr.spacings):
        val = wick_determinant(mono, g)
        rho += val * _basis_matrices(labels)
    rho /= dim
    state = DensityMatrix(rho, g.params, arr)
    report = validate_state(state, tol=1e-9)
    if not report.passed:
        raise PhysicalityError(
            f"marginal for {arr.spacings} at {g.params} is unphysical: "
            f"trace dev {report.trace_deviation:.2e}, "
            f"asymmetry {report.asymmetry:.2e}, "
            f"min eigenvalue {report.min_eigenvalue:.2e}"
        )
    return state


def validate_state(rho: DensityMatrix | np.ndarray, tol: float = 1e-9) -> StateReport:
    """Diagnostic report: trace deviation, asymmetry, smallest eigenvalue."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, float)
    trace_dev = abs(m.trace() - 1.0)
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])
    passed = trace_dev <= tol and asym <= tol and min_eig >= -tol
    return StateReport(trace_dev, asym, min_eig, passed)


def clip_to_psd(rho: np.ndarray, floor: float = 1e-10) -> np.ndarray:
    """Zero out eigenvalues in [-floor, 0) and renormalize the trace.

    Opt-in repair for consumers that need strictly PSD input; eigenvalues
    below -floor are a genuine error and raise.
    """
    w, v = np.linalg.eigh(0.5 * (rho + rho.T))
    if w[0] < -floor:
        raise PhysicalityError(f"eigenvalue {w[0]:.3e} below the clip floor")
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.T
    return out / out.trace()


def partial_trace_matrix(rho: np.ndarray, keep: tuple[int, ...],
                         n_sites: int) -> np.ndarray:
    """Trace a 2**n density matrix down to the qubits in ``keep`` (ordered)."""
    keep = tuple(keep)
    dims = (2,) * n_sites
    t = np.asarray(rho).reshape(dims + dims)
    drop = [i for i in range(n_sites) if i not in keep]
    for off, i in enumerate(sorted(drop, reverse=True)):
        t = np.trace(t, axis1=i, axis2=i + n_sites - off)
    d = 2 ** len(keep)
    return t.reshape(d, d)
