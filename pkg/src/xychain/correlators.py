"""Two-point fermionic contraction G_r of the ground state.

``G_r`` is the only input every spin expectation value needs.  For a finite
odd chain it is the momentum sum

    G_r = (1/L) sum_q [cos(r phi_q) (1 + lam cos phi_q)
                       - gamma lam sin(phi_q) sin(r phi_q)] / Lambda_q

and in the thermodynamic limit the corresponding integral over (0, pi) with
prefactor 1/pi.  The same-species contractions are constants
(<A_l A_k> = delta_{lk}, <B_l B_k> = -delta_{lk}) and are not tabulated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .model import ModelParams, mode_energy, momentum_grid

__all__ = [
    "QuadratureError",
    "CorrelatorTable",
    "correlator_finite",
    "correlator_thermo",
    "build_table",
]

DEFAULT_TOL = 1e-10


class QuadratureError(RuntimeError):
    """Adaptive integration failed to reach the requested tolerance."""


def _integrand(params: ModelParams, r: int):
    lam, gamma = params.lam, params.gamma
    if lam == 1.0 and gamma == 1.0:
        # At the critical Ising point Lambda = 2 cos(phi/2) divides the
        # numerator exactly: the integrand collapses to cos((r + 1/2) phi),
        # which removes the 0/0 at phi = pi.
        return lambda phi: np.cos((r + 0.5) * phi)

    def f(phi):
        num = (np.cos(r * phi) * (1.0 + lam * np.cos(phi))
               - gamma * lam * np.sin(phi) * np.sin(r * phi))
        return num / mode_energy(params, phi)

    return f


def correlator_finite(params: ModelParams, r: int) -> float:
    """G_r on a finite odd chain (exact momentum sum)."""
    if params.thermodynamic:
        raise ValueError("correlator_finite needs a finite chain")
    phi = momentum_grid(params.L)
    num = (np.cos(r * phi) * (1.0 + params.lam * np.cos(phi))
           - params.gamma * params.lam * np.sin(phi) * np.sin(r * phi))
    return float(np.mean(num / mode_energy(params, phi)))


def correlator_thermo(params: ModelParams, r: int, tol: float = DEFAULT_TOL) -> float:
    """G_r in the thermodynamic limit, to absolute accuracy ``tol``."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    f = _integrand(params, r)
    # Lambda vanishes inside (0, pi) only for gamma == 0 with lam >= 1; the
    # singularity is removable but the quadrature needs the split point.
    points = None
    if params.gamma == 0.0 and params.lam >= 1.0:
        points = [float(np.arccos(-1.0 / params.lam))] if params.lam > 1.0 else None
    val, abserr, info, *message = quad(
        f, 0.0, np.pi, epsabs=tol, epsrel=1e-12, limit=400,
        points=points, full_output=True,
    )
    if message or abserr > 10.0 * max(tol, 1e-14):
        raise QuadratureError(
            f"correlator integral did not converge for r={r}, {params}: "
            f"abserr={abserr:.3e}, {message[0] if message else ''}"
        )
    return float(val) / np.pi


@dataclass(frozen=True)
class CorrelatorTable:
    """Immutable table of G_r over a contiguous offset window."""

    params: ModelParams
    rmin: int
    rmax: int
    values: tuple[float, ...] = field(repr=False)

    def __getitem__(self, r: int) -> float:
        if not self.rmin <= r <= self.rmax:
            raise KeyError(
                f"offset {r} outside tabulated window [{self.rmin}, {self.rmax}]"
            )
        return self.values[r - self.rmin]

    def as_dict(self) -> dict[int, float]:
        return {r: self[r] for r in range(self.rmin, self.rmax + 1)}


def build_table(params: ModelParams, rmin: int, rmax: int,
                tol: float = DEFAULT_TOL) -> CorrelatorTable:
    """Tabulate G_r for every offset in [rmin, rmax]."""
    if rmin > rmax:
        raise ValueError(f"empty offset window [{rmin}, {rmax}]")
    if params.thermodynamic:
        vals = [correlator_thermo(params, r, tol) for r in range(rmin, rmax + 1)]
    else:
        vals = [correlator_finite(params, r) for r in range(rmin, rmax + 1)]
    return CorrelatorTable(params, rmin, rmax, tuple(vals))
