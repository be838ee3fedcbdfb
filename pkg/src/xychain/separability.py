"""Randomized biseparability certification by iterative subtraction.

A state is certified biseparable by an explicit convex decomposition

    rho = sum_k w_k |psi_k><psi_k| + s * tau

where every |psi_k> is a pure product state across some bipartition and
the remainder tau lies strictly inside the purity ball around the
maximally mixed state (tr(tau^2) < 1/(D-1) makes tau separable for every
cut).  Each round draws random pure product states over random
bipartitions, polishes the best by alternating single-factor optimization,
subtracts it from the running remainder, and periodically re-optimizes all
subtraction weights at once (the weight problem is convex, so the
re-optimization step is what keeps the search out of dead ends).

Failure to certify within the iteration budget is reported as
`Inconclusive` and proves nothing.  States with tiny eigenvalues sit near
the boundary of the biseparable set; local filtering
(`filter_normal_form`) preconditions them by making every single-party
marginal maximally mixed, which preserves (bi)separability in both
directions.  Candidates are complex product states by default: real
states admit biseparable decompositions whose components are genuinely
complex (conjugate pairs), and restricting to real candidates leaves part
of the decomposition cone unreachable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .gmn import Bipartition, bipartitions
from .rdm import DensityMatrix, clip_to_psd, partial_trace_matrix

__all__ = [
    "FilterError",
    "SeparabilityCertificate",
    "Inconclusive",
    "FilterResult",
    "ball_check",
    "filter_normal_form",
    "certify_biseparable",
]

DEFAULT_TRIALS = 64
FILTER_THRESHOLD = 1e-3


class FilterError(RuntimeError):
    """Local filtering cannot proceed (singular single-party marginal)."""


def ball_check(rho: np.ndarray | DensityMatrix) -> bool:
    """True iff the state lies strictly inside the separable purity ball.

    The bound is tr(rho^2) < 1/(D-1) with D the total dimension: 1/7 for
    three qubits, 1/15 for four.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    d = m.shape[0]
    return float(np.sum(np.abs(m) ** 2)) < 1.0 / (d - 1)


@dataclass(frozen=True)
class FilterResult:
    filters: tuple[np.ndarray, ...]
    filtered_state: np.ndarray
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SeparabilityCertificate:
    """Explicit biseparable decomposition of ``state``.

    ``state`` is the matrix the decomposition reconstructs (the filtered
    state when filtering was applied); ``filters`` map the original input
    to it.  Weights plus ``tail_weight`` sum to one, every vector is a
    unit product state across its recorded bipartition, and the
    unit-trace ``tail`` passes `ball_check`.
    """

    state: np.ndarray
    weights: tuple[float, ...]
    vectors: tuple[np.ndarray, ...]
    parts: tuple[Bipartition, ...]
    tail_weight: float
    tail: np.ndarray
    iterations: int
    filters: tuple[np.ndarray, ...] | None = None


@dataclass(frozen=True)
class Inconclusive:
    """Certification did not finish; carries diagnostics, proves nothing."""

    iterations: int
    final_purity: float
    gap: float = np.nan          # remaining distance to the certifying ball
    reason: str = "iteration budget exhausted"


# ----------------------------------------------------------------------
# local filtering
# ----------------------------------------------------------------------

def _single_site_marginals(rho: np.ndarray, n_sites: int) -> list[np.ndarray]:
    return [partial_trace_matrix(rho, (i,), n_sites) for i in range(n_sites)]


def filter_normal_form(rho, tol: float = 1e-12,
                       max_iter: int = 200) -> FilterResult:
    """Drive every single-party marginal to 1/2 by invertible local maps.

    Raises `FilterError` when a marginal becomes (numerically) singular,
    which happens for pure product inputs: those cannot reach the normal
    form.
    """
    m = np.array(rho.matrix if isinstance(rho, DensityMatrix) else rho,
                 dtype=float)
    n = int(round(np.log2(m.shape[0])))
    filters = [np.eye(2) for _ in range(n)]
    residual = np.inf
    for it in range(max_iter + 1):
        marginals = _single_site_marginals(m, n)
        residual = max(float(np.max(np.abs(marg - np.eye(2) / 2.0)))
                       for marg in marginals)
        if residual <= tol:
            return FilterResult(tuple(filters), m, residual, it, True)
        if it == max_iter:
            break
        step = np.array([[1.0]])
        for i, marg in enumerate(marginals):
            w, v = np.linalg.eigh(marg)
            if w[0] < 1e-14:
                raise FilterError(
                    f"singular marginal on site {i} (eigenvalue {w[0]:.2e}); "
                    "state cannot be filtered to normal form"
                )
            f = (v / np.sqrt(2.0 * w)) @ v.T
            filters[i] = f @ filters[i]
            step = np.kron(step, f)
        m = step @ m @ step.T
        m /= m.trace()
    return FilterResult(tuple(filters), m, residual, max_iter, False)


# ----------------------------------------------------------------------
# candidate search
# ----------------------------------------------------------------------

def _sample_product_states(rng: np.random.Generator, parts: list[Bipartition],
                           n_sites: int, count: int,
                           complex_atoms: bool = True):
    """Batch of pure product states across random bipartitions."""
    dim = 2 ** n_sites
    dtype = complex if complex_atoms else float
    out = np.empty((count, dim), dtype=dtype)
    which = rng.integers(0, len(parts), size=count)
    for k in range(count):
        part = parts[which[k]]
        da = 2 ** len(part.subset)
        a = rng.standard_normal(da).astype(dtype)
        b = rng.standard_normal(dim // da).astype(dtype)
        if complex_atoms:
            a = a + 1j * rng.standard_normal(da)
            b = b + 1j * rng.standard_normal(dim // da)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        # tensor factors of `a` sit on the subset sites, `b` on the rest
        order = list(part.subset) + [i for i in range(n_sites)
                                     if i not in part.subset]
        inverse = np.argsort(order)
        out[k] = np.outer(a, b).reshape((2,) * n_sites).transpose(inverse).ravel()
    return out, which


def _seesaw_improve(psi: np.ndarray, target: np.ndarray, part: Bipartition,
                    n_sites: int, rounds: int) -> np.ndarray:
    """Alternating maximization of <psi|target|psi> over the two factors.

    Keeps psi an exact product state across ``part`` while climbing to a
    locally optimal candidate.
    """
    order = list(part.subset) + [i for i in range(n_sites)
                                 if i not in part.subset]
    inverse = np.argsort(order)
    da = 2 ** len(part.subset)
    db = 2 ** (n_sites - len(part.subset))
    t = target.reshape((2,) * (2 * n_sites))
    t = t.transpose(tuple(order) + tuple(o + n_sites for o in order))
    t = t.reshape(da, db, da, db)
    mat = psi.reshape((2,) * n_sites).transpose(order).reshape(da, db)
    u, _, vt = np.linalg.svd(mat)
    a, b = u[:, 0], vt[0].conj()
    for _ in range(rounds):
        mb = np.einsum("i,ibjd,j->bd", a.conj(), t, a)
        _, v = np.linalg.eigh(0.5 * (mb + mb.conj().T))
        b = v[:, -1]
        ma = np.einsum("b,ibjd,d->ij", b.conj(), t, b)
        _, v = np.linalg.eigh(0.5 * (ma + ma.conj().T))
        a = v[:, -1]
    return np.outer(a, b).reshape((2,) * n_sites).transpose(inverse).ravel()


# ----------------------------------------------------------------------
# certification
# ----------------------------------------------------------------------

def _reoptimize_weights(atoms: np.ndarray, c: np.ndarray, r0: np.ndarray,
                        q0: float, radius: float, d: int):
    """Convex re-fit of all subtraction weights over the current atoms.

    Minimizes ||rho - sum_j c_j A_j - s I/d||_F - radius*s over c >= 0 with
    s = 1 - sum(c); A_j is the real part of the atom projector.  Gram and
    cross terms have closed forms in the atom vectors.
    """
    gram = 0.5 * (np.abs(atoms.conj() @ atoms.T) ** 2
                  + np.abs(atoms @ atoms.T) ** 2) - 1.0 / d
    lin = np.einsum("ja,ab,jb->j", atoms.conj(), r0, atoms).real

    def fg(cv):
        mm = max(q0 - 2.0 * cv @ lin + cv @ gram @ cv, 1e-18)
        f = np.sqrt(mm) - radius * (1.0 - cv.sum())
        g = (gram @ cv - lin) / np.sqrt(mm) + radius
        return f, g

    cons = ({"type": "ineq",
             "fun": lambda cv: 1.0 - 1e-6 - cv.sum(),
             "jac": lambda cv: -np.ones_like(cv)},)
    res = minimize(fg, np.clip(c, 0.0, None), jac=True, method="SLSQP",
                   bounds=[(0.0, None)] * len(c), constraints=cons,
                   options={"maxiter": 400, "ftol": 1e-15})
    return np.clip(res.x, 0.0, None), float(res.fun)


def certify_biseparable(rho, max_iter: int = 10_000, seed: int = 0,
                        trials_per_iter: int = DEFAULT_TRIALS,
                        use_filtering: bool | None = None,
                        improve_rounds: int = 8,
                        improve_starts: int = 4,
                        reweight_every: int = 5,
                        complex_atoms: bool = True):
    """Attempt an explicit biseparable decomposition of a 3- or 4-qubit state.

    Returns a `SeparabilityCertificate` on success, `Inconclusive`
    otherwise (never a proof of entanglement).  Deterministic for a fixed
    ``seed``.  ``use_filtering=None`` applies the local-filter normal form
    automatically when the smallest eigenvalue is below 1e-3.
    """
    if max_iter < 1:
        raise ValueError("need at least one iteration")
    m = np.array(rho.matrix if isinstance(rho, DensityMatrix) else rho,
                 dtype=float)
    n = int(round(np.log2(m.shape[0])))
    d = 2 ** n
    parts = bipartitions(n)
    rng = np.random.default_rng(seed)

    filters = None
    eig_min = float(np.linalg.eigvalsh(m)[0])
    if use_filtering is None:
        use_filtering = eig_min < FILTER_THRESHOLD
    if use_filtering:
        try:
            filt = filter_normal_form(clip_to_psd(m) if eig_min < 1e-12 else m)
        except FilterError:
            return Inconclusive(0, float(np.sum(m * m)),
                                reason="state cannot be filtered (pure marginal)")
        m = filt.filtered_state
        filters = filt.filters

    radius = np.sqrt(1.0 / (d - 1.0) - 1.0 / d)
    eyed = np.eye(d) / d
    r0 = m - eyed
    q0 = float(np.sum(r0 * r0))
    atoms: list[np.ndarray] = []
    aparts: list[Bipartition] = []
    c = np.zeros(0)
    gap = np.inf

    for it in range(max_iter):
        if atoms:
            proj = np.array([np.real(np.outer(p, p.conj())) for p in atoms])
            residual = r0 - np.einsum("j,jab->ab", c, proj) + c.sum() * eyed
        else:
            residual = r0.copy()
        s = 1.0 - float(c.sum())
        if s > 1e-12:
            tail = (residual + s * eyed) / s
            if (float(np.sum(tail * tail)) < 1.0 / (d - 1)
                    and np.linalg.eigvalsh(tail)[0] >= 0.0):
                return _assemble_certificate(m, atoms, aparts, c, s, tail,
                                             it, filters)

        batch, which = _sample_product_states(rng, parts, n, trials_per_iter,
                                              complex_atoms)
        scores = np.einsum("ki,ij,kj->k", batch.conj(), residual, batch).real
        best_psi, best_part, best_score = None, None, -np.inf
        for k in np.argsort(scores)[::-1][:improve_starts]:
            cand = _seesaw_improve(batch[k], residual, parts[which[k]],
                                   n, improve_rounds)
            val = float(np.real(cand.conj() @ residual @ cand))
            if val > best_score:
                best_score, best_psi, best_part = val, cand, parts[which[k]]
        atoms.append(best_psi)
        aparts.append(best_part)
        c = np.append(c, 0.0)

        if it % reweight_every == 0 or it < 10:
            c, gap = _reoptimize_weights(np.array(atoms), c, r0, q0, radius, d)
            keep = c > 1e-14
            keep[-1] = True
            atoms = [a for a, k in zip(atoms, keep) if k]
            aparts = [p for p, k in zip(aparts, keep) if k]
            c = c[keep]

    s = 1.0 - float(c.sum())
    purity = float(np.sum(((residual + s * eyed) / max(s, 1e-12)) ** 2))
    return Inconclusive(max_iter, purity, gap=gap)


def _assemble_certificate(state, atoms, aparts, c, s, tail, it, filters):
    """Expand complex atoms into explicit conjugate component pairs."""
    weights: list[float] = []
    vectors: list[np.ndarray] = []
    parts: list[Bipartition] = []
    for psi, part, w in zip(atoms, aparts, c):
        if w <= 0.0:
            continue
        if np.max(np.abs(psi.imag)) < 1e-14:
            weights.append(float(w))
            vectors.append(psi.real.copy())
            parts.append(part)
        else:
            for component in (psi, psi.conj()):
                weights.append(0.5 * float(w))
                vectors.append(component.copy())
                parts.append(part)
    return SeparabilityCertificate(
        state=state,
        weights=tuple(weights),
        vectors=tuple(vectors),
        parts=tuple(parts),
        tail_weight=s,
        tail=tail,
        iterations=it,
        filters=filters,
    )
