"""Transverse-field XY chain: parameters, dispersion and ground-state energy.

Spin Hamiltonian (periodic chain, odd length L)::

    H = -(lam/4) * sum_i [(1+gamma) X_i X_{i+1} + (1-gamma) Y_i Y_{i+1}]
        + (1/2) * sum_i Z_i

The coupling ``lam >= 0`` is measured against the transverse field and
``gamma`` interpolates between the isotropic XY chain (0) and the Ising
chain (1).  After fermionization the chain decouples into independent
momentum modes with energy ``Lambda(phi) = sqrt(alpha^2 + beta^2)`` where
``alpha = lam*cos(phi) + 1`` and ``beta = lam*gamma*sin(phi)``; the ground
state is the quasiparticle vacuum with energy ``-(1/2) sum_p Lambda(phi_p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

__all__ = [
    "ModelParams",
    "ModeData",
    "momentum_grid",
    "dispersion",
    "ground_energy",
    "energy_density",
]


@dataclass(frozen=True)
class ModelParams:
    """Couplings and size of the chain.

    Parameters
    ----------
    lam : float
        Nearest-neighbour coupling, ``lam >= 0``.
    gamma : float
        Anisotropy in [0, 1]; 1 is the transverse Ising chain.
    L : int or None
        Chain length (odd, >= 3) or ``None`` for the thermodynamic limit.
    """

    lam: float
    gamma: float = 1.0
    L: int | None = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"coupling must be nonnegative, got {self.lam}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"anisotropy must lie in [0, 1], got {self.gamma}")
        if self.L is not None:
            if self.L < 3 or self.L % 2 == 0:
                raise ValueError(f"chain length must be odd and >= 3, got {self.L}")

    @property
    def thermodynamic(self) -> bool:
        return self.L is None


@dataclass(frozen=True)
class ModeData:
    """Single momentum mode of the diagonalized chain.

    ``energy`` is the quasiparticle energy Lambda(phi) and
    ``alpha_tilde``/``beta_tilde`` are the Bogoliubov rotation
    coefficients (``alpha_tilde**2 + beta_tilde**2 == 1`` away from the
    degenerate point; see `dispersion`).
    """

    phi: float
    alpha: float
    beta: float
    energy: float
    alpha_tilde: float
    beta_tilde: float


def momentum_grid(L: int) -> np.ndarray:
    """Momenta ``phi_p = 2 pi p / L`` for integer ``p in [-(L-1)/2, (L-1)/2]``."""
    half = (L - 1) // 2
    p = np.arange(-half, half + 1)
    return 2.0 * np.pi * p / L


def mode_energy(params: ModelParams, phi) -> np.ndarray:
    """Quasiparticle energy Lambda(phi); accepts scalars or arrays."""
    alpha = params.lam * np.cos(phi) + 1.0
    beta = params.lam * params.gamma * np.sin(phi)
    return np.hypot(alpha, beta)


def dispersion(params: ModelParams, phi: float) -> ModeData:
    """Evaluate one momentum mode.

    The Bogoliubov coefficients are ``alpha_tilde = (Lambda - alpha) / N``
    and ``beta_tilde = beta / N`` with ``N = sqrt(2 (Lambda^2 - Lambda*alpha))``.
    When ``beta == 0`` and ``Lambda == alpha > 0`` both expressions are 0/0;
    the mode is already diagonal, and we fix ``alpha_tilde = beta_tilde = 0``.
    Only ``energy`` feeds the correlators, so the choice is inert downstream.
    """
    if not -np.pi < phi <= np.pi + 1e-15:
        raise ValueError(f"momentum must lie in (-pi, pi], got {phi}")
    alpha = params.lam * math.cos(phi) + 1.0
    beta = params.lam * params.gamma * math.sin(phi)
    energy = math.hypot(alpha, beta)
    norm_sq = 2.0 * (energy * energy - energy * alpha)
    if norm_sq <= 0.0:
        # beta == 0 with alpha >= 0 (degenerate) or the gapless point Lambda == 0.
        alpha_tilde = 0.0
        beta_tilde = 0.0
    else:
        norm = math.sqrt(norm_sq)
        alpha_tilde = (energy - alpha) / norm
        beta_tilde = beta / norm
    return ModeData(phi, alpha, beta, energy, alpha_tilde, beta_tilde)


def ground_energy(params: ModelParams) -> float:
    """Exact ground-state energy ``-(1/2) sum_p Lambda(phi_p)`` of a finite chain.

    Raises
    ------
    ValueError
        For thermodynamic-limit parameters; use `energy_density` instead.
    """
    if params.thermodynamic:
        raise ValueError("ground_energy needs a finite chain; use energy_density")
    phis = momentum_grid(params.L)
    return -0.5 * float(np.sum(mode_energy(params, phis)))


def energy_density(params: ModelParams, tol: float = 1e-12) -> float:
    """Ground-state energy per site.

    Finite chains divide `ground_energy` by L; the thermodynamic limit is
    ``-(1/4 pi) * integral_{-pi}^{pi} Lambda(phi) dphi``.
    """
    if not params.thermodynamic:
        return ground_energy(params) / params.L
    val, _ = quad(lambda phi: mode_energy(params, phi), 0.0, np.pi,
                  epsabs=tol, epsrel=tol, limit=200)
    # Lambda is even in phi, so integrate the half line and double.
    return -val / (2.0 * np.pi)
