"""Independent validation of biseparability certificates.

Deliberately self-contained: everything is recomputed from the raw arrays
in the certificate with plain numpy (reconstruction, Schmidt-rank-1 product
checks, the purity-ball bound), sharing no helpers with the search code in
`separability`.
"""

from __future__ import annotations

import numpy as np

__all__ = ["check_certificate"]


def _schmidt_second_singular_value(psi: np.ndarray, subset: tuple[int, ...],
                                   n_sites: int) -> float:
    order = list(subset) + [i for i in range(n_sites) if i not in subset]
    tensor = psi.reshape((2,) * n_sites).transpose(order)
    mat = tensor.reshape(2 ** len(subset), -1)
    svals = np.linalg.svd(mat, compute_uv=False)
    return float(svals[1]) if len(svals) > 1 else 0.0


def check_certificate(cert, rtol: float = 1e-8,
                      schmidt_tol: float = 1e-10) -> tuple[bool, dict]:
    """Re-derive every claim of a `SeparabilityCertificate`.

    Checks that the weights are positive and sum to one with the tail,
    that each component is a unit product vector across its recorded
    bipartition (second Schmidt coefficient below ``schmidt_tol``), that
    the mixture reconstructs the certified state entrywise to ``rtol``,
    and that the tail is a state with purity strictly inside 1/(D-1).
    """
    state = np.asarray(cert.state, dtype=float)
    d = state.shape[0]
    n_sites = int(round(np.log2(d)))
    report: dict = {}

    weights = np.asarray(cert.weights, dtype=float)
    total = float(weights.sum() + cert.tail_weight)
    report["weight_sum_deviation"] = abs(total - 1.0)
    report["weights_positive"] = bool(np.all(weights > 0.0)) \
        and cert.tail_weight > 0.0

    mix = cert.tail_weight * np.asarray(cert.tail, dtype=complex)
    worst_schmidt = 0.0
    worst_norm = 0.0
    for w, psi, part in zip(cert.weights, cert.vectors, cert.parts):
        psi = np.asarray(psi, dtype=complex)
        worst_norm = max(worst_norm, abs(float(np.vdot(psi, psi).real) - 1.0))
        worst_schmidt = max(
            worst_schmidt,
            _schmidt_second_singular_value(psi, tuple(part.subset), n_sites),
        )
        mix += w * np.outer(psi, psi.conj())
    report["max_norm_deviation"] = worst_norm
    report["max_second_schmidt"] = worst_schmidt
    report["reconstruction_error"] = float(np.max(np.abs(mix - state)))

    tail = np.asarray(cert.tail, dtype=float)
    tail_trace = float(tail.trace())
    tail_min_eig = float(np.linalg.eigvalsh(0.5 * (tail + tail.T))[0])
    purity = float(np.sum(tail * tail)) / tail_trace ** 2
    report["tail_trace_deviation"] = abs(tail_trace - 1.0)
    report["tail_min_eigenvalue"] = tail_min_eig
    report["tail_purity"] = purity
    report["tail_in_ball"] = purity < 1.0 / (d - 1)

    ok = (
        report["weight_sum_deviation"] <= 1e-10
        and (report["weights_positive"] or len(cert.weights) == 0)
        and worst_norm <= 1e-10
        and worst_schmidt <= schmidt_tol
        and report["reconstruction_error"] <= rtol
        and report["tail_trace_deviation"] <= 1e-10
        and tail_min_eig >= -1e-12
        and report["tail_in_ball"]
    )
    report["passed"] = ok
    return ok, report
