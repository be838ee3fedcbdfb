"""Primal-dual interior-point solver for the decomposable-witness program.

Solves, over real symmetric d x d matrices (d = 8 or 16),

    minimize    tr(W rho)
    subject to  W = P_m + pt_m(Q_m),   0 <= P_m <= 1,  0 <= Q_m <= 1

for every bipartition m, where pt_m is the partial transpose.  Witness and
P_m blocks are the free variables (Q_m is eliminated through the
decomposition), so the semidefinite constraints form 4M blocks

    P_m >= 0,   1 - P_m >= 0,   pt_m(W - P_m) >= 0,   1 - pt_m(W - P_m) >= 0.

The solver is a Mehrotra-style predictor-corrector with Nesterov-Todd
scaling.  The Schur complement has an arrow sparsity pattern (the witness
couples to every bipartition, bipartitions never couple to each other) and
is eliminated blockwise, so one Newton step costs O(M t^3) with
t = d(d+1)/2 instead of ((M+1) t)^3.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["SolverFailure", "WitnessSolution", "solve_witness_sdp"]

MAX_ITER = 200
_STEP_FRAC = 0.98
_MIN_SIGMA, _MAX_SIGMA = 1e-8, 0.999


class SolverFailure(RuntimeError):
    """The interior-point iteration broke down before reaching the target."""


# ----------------------------------------------------------------------
# symmetric vectorization and partial-transpose permutations
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _svec_indices(d: int):
    rows, cols = np.tril_indices(d)
    weights = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return rows, cols, weights


def svec(m: np.ndarray) -> np.ndarray:
    rows, cols, w = _svec_indices(m.shape[0])
    return m[rows, cols] * w


def smat(v: np.ndarray, d: int) -> np.ndarray:
    rows, cols, w = _svec_indices(d)
    vals = v / w
    m = np.zeros((d, d))
    m[rows, cols] = vals
    m[cols, rows] = vals
    return m


def symkron(w: np.ndarray) -> np.ndarray:
    """Matrix of Z -> W Z W in svec coordinates (symmetric Kronecker square)."""
    rows, cols, wt = _svec_indices(w.shape[0])
    wi = w[np.ix_(rows, rows)]
    wj = w[np.ix_(cols, cols)]
    wij = w[np.ix_(rows, cols)]
    wji = w[np.ix_(cols, rows)]
    k = 0.5 * (wi * wj + wij * wji)
    return k * np.outer(wt, wt)


def pt_bit_mask(subset: tuple[int, ...], n_sites: int) -> int:
    mask = 0
    for s in subset:
        mask |= 1 << (n_sites - 1 - s)
    return mask


@lru_cache(maxsize=None)
def pt_svec_permutation(subset: tuple[int, ...], n_sites: int) -> np.ndarray:
    """svec-coordinate permutation realizing the partial transpose."""
    d = 2 ** n_sites
    rows, cols, _ = _svec_indices(d)
    mask = pt_bit_mask(subset, n_sites)
    pos = {}
    for p, (i, j) in enumerate(zip(rows, cols)):
        pos[(int(i), int(j))] = p
    perm = np.empty(len(rows), dtype=np.intp)
    for p, (i, j) in enumerate(zip(rows, cols)):
        ii = (int(i) & ~mask) | (int(j) & mask)
        jj = (int(j) & ~mask) | (int(i) & mask)
        if ii < jj:
            ii, jj = jj, ii
        perm[p] = pos[(ii, jj)]
    return perm


def partial_transpose_matrix(m: np.ndarray, subset: tuple[int, ...],
                             n_sites: int) -> np.ndarray:
    """Partial transpose over the qubits in ``subset`` (matrix form)."""
    dims = (2,) * n_sites
    t = np.asarray(m).reshape(dims + dims)
    axes = list(range(2 * n_sites))
    for s in subset:
        axes[s], axes[s + n_sites] = axes[s + n_sites], axes[s]
    return np.transpose(t, axes).reshape(m.shape)


# ----------------------------------------------------------------------
# solver state helpers
# ----------------------------------------------------------------------

def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _max_step(blocks: np.ndarray, deltas: np.ndarray) -> float:
    """Largest alpha with blocks + alpha*deltas >= 0 (blockwise, exact)."""
    from scipy.linalg import solve_triangular

    alpha = np.inf
    for x, dx in zip(blocks, deltas):
        l = _chol(x)
        half = solve_triangular(l, dx, lower=True, check_finite=False)
        scaled = solve_triangular(l, half.T, lower=True, check_finite=False)
        lam_min = np.linalg.eigvalsh(_sym(scaled))[0]
        if lam_min < 0:
            alpha = min(alpha, -1.0 / lam_min)
    return alpha


@dataclass
class WitnessSolution:
    witness: np.ndarray
    p_blocks: list[np.ndarray]
    q_blocks: list[np.ndarray]
    objective: float          # tr(W rho) at the returned witness
    gap: float                # complementarity <X, S> at termination
    primal_residual: float
    dual_residual: float
    iterations: int
    status: str               # "optimal" or "inaccurate"


def solve_witness_sdp(rho: np.ndarray, subsets: list[tuple[int, ...]],
                      n_sites: int, tol: float = 1e-9,
                      max_iter: int = MAX_ITER) -> WitnessSolution:
    """Run the predictor-corrector iteration for one density matrix.

    Each solve is kept single-threaded: the blocks are far too small for
    BLAS threading to pay off, and grids of solves parallelize across
    processes instead.
    """
    with _single_threaded_blas():
        return _solve_witness_sdp(rho, subsets, n_sites, tol, max_iter)


def _single_threaded_blas():
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=1)
    except ImportError:  # fall back to whatever the environment provides
        import contextlib

        return contextlib.nullcontext()


def _solve_witness_sdp(rho: np.ndarray, subsets: list[tuple[int, ...]],
                       n_sites: int, tol: float = 1e-9,
                       max_iter: int = MAX_ITER) -> WitnessSolution:
    d = 2 ** n_sites
    if rho.shape != (d, d):
        raise ValueError(f"state has shape {rho.shape}, expected {(d, d)}")
    t = d * (d + 1) // 2
    m_parts = len(subsets)
    n_blocks = 4 * m_parts
    perms = [pt_svec_permutation(tuple(s), n_sites) for s in subsets]

    rho_vec = svec(rho)
    eye = np.eye(d)

    # C blocks: identity on the capped blocks, zero elsewhere
    c_blocks = np.zeros((n_blocks, d, d))
    for m in range(m_parts):
        c_blocks[4 * m + 1] = eye
        c_blocks[4 * m + 3] = eye

    def adjoint_a(w_vec, p_vecs):
        """Blocks of A*(y) for y = (w, p_1..p_M)."""
        out = np.empty((n_blocks, d, d))
        w_mat = smat(w_vec, d)
        for m in range(m_parts):
            p_mat = smat(p_vecs[m], d)
            qt = smat((w_vec - p_vecs[m])[perms[m]], d)
            out[4 * m + 0] = -p_mat
            out[4 * m + 1] = p_mat
            out[4 * m + 2] = -qt
            out[4 * m + 3] = qt
        return out, w_mat

    def apply_a(x_blocks):
        """Adjoint map: block matrices -> vector over (w, p_1..p_M)."""
        w_row = np.zeros(t)
        p_rows = np.empty((m_parts, t))
        for m in range(m_parts):
            q_diff = svec(x_blocks[4 * m + 2] - x_blocks[4 * m + 3])[perms[m]]
            w_row -= q_diff
            p_rows[m] = (-svec(x_blocks[4 * m + 0])
                         + svec(x_blocks[4 * m + 1]) + q_diff)
        return w_row, p_rows

    # starting point: scaled identity blocks
    scale = max(1.0, float(np.linalg.norm(rho_vec))) * np.sqrt(d)
    x = np.tile(eye * scale, (n_blocks, 1, 1))
    s = np.tile(eye * scale, (n_blocks, 1, 1))
    w_vec = np.zeros(t)
    p_vecs = np.zeros((m_parts, t))

    b_norm = 1.0 + float(np.max(np.abs(rho_vec)))
    status = "inaccurate"
    it = 0
    gap = np.inf
    pres = dres = np.inf
    best = None
    best_metric = np.inf
    stall = 0

    for it in range(1, max_iter + 1):
        ast, w_mat = adjoint_a(w_vec, p_vecs)
        rd = c_blocks - ast - s
        aw_row, ap_rows = apply_a(x)
        rp_w = -rho_vec - aw_row
        rp_p = -ap_rows
        mu = float(np.einsum("bij,bij->", x, s)) / (n_blocks * d)
        pres = max(float(np.max(np.abs(rp_w))), float(np.max(np.abs(rp_p))))
        dres = float(np.max(np.abs(rd)))
        # objective duality gap: dual objective b'y certifies the witness,
        # the primal objective bounds the optimum from the other side
        dobj = float(-rho_vec @ w_vec)
        pobj = float(sum(np.trace(x[4 * m + 1]) + np.trace(x[4 * m + 3])
                         for m in range(m_parts)))
        gap = abs(pobj - dobj)

        metric = max(pres / (tol * b_norm), dres / tol,
                     gap / (tol * (1.0 + abs(pobj) + abs(dobj))))
        if metric < 0.9 * best_metric:
            best_metric = min(best_metric, metric)
            best = (w_vec.copy(), p_vecs.copy(), gap, pres, dres)
            stall = 0
        else:
            best_metric = min(best_metric, metric)
            if metric == best_metric:
                best = (w_vec.copy(), p_vecs.copy(), gap, pres, dres)
            stall += 1
        if metric <= 1.0:
            status = "optimal"
            break
        if stall >= 3:
            # round-off floor reached; keep the best iterate seen
            break

        # Nesterov-Todd scaling point per block
        g_mats = np.empty_like(x)
        g_invs = np.empty_like(x)
        v_eigs = np.empty((n_blocks, d))
        v_vecs = np.empty_like(x)
        s_invs = np.empty_like(x)
        for b in range(n_blocks):
            ws, vs = np.linalg.eigh(s[b])
            ws = np.maximum(ws, 1e-300)
            s_half = (vs * np.sqrt(ws)) @ vs.T
            s_mhalf = (vs / np.sqrt(ws)) @ vs.T
            s_invs[b] = (vs / ws) @ vs.T
            mid = _sym(s_half @ x[b] @ s_half)
            wm, vm = np.linalg.eigh(mid)
            wm = np.maximum(wm, 1e-300)
            w_nt = _sym(s_mhalf @ ((vm * np.sqrt(wm)) @ vm.T) @ s_mhalf)
            wg, vg = np.linalg.eigh(w_nt)
            wg = np.maximum(wg, 1e-300)
            g_mats[b] = (vg * np.sqrt(wg)) @ vg.T
            g_invs[b] = (vg / np.sqrt(wg)) @ vg.T
            v_nt = _sym(g_mats[b] @ s[b] @ g_mats[b])
            v_eigs[b], v_vecs[b] = np.linalg.eigh(v_nt)

        # Schur complement in arrow form
        d_blocks = np.empty((m_parts, t, t))
        h_chols = []
        for m in range(m_parts):
            kq = symkron(_sym(g_mats[4 * m + 2] @ g_mats[4 * m + 2]))
            kq1 = symkron(_sym(g_mats[4 * m + 3] @ g_mats[4 * m + 3]))
            kp = symkron(_sym(g_mats[4 * m + 0] @ g_mats[4 * m + 0]))
            kp1 = symkron(_sym(g_mats[4 * m + 1] @ g_mats[4 * m + 1]))
            dq = kq + kq1
            d_blocks[m] = dq[np.ix_(perms[m], perms[m])]
            h_chols.append(_chol(kp + kp1 + d_blocks[m]))

        ydm = np.empty_like(d_blocks)       # H_m^{-1} D_m
        schur_w = np.zeros((t, t))
        for m in range(m_parts):
            ydm[m] = _chol_solve(h_chols[m], d_blocks[m])
            schur_w += d_blocks[m] - d_blocks[m] @ ydm[m]
        schur_chol = _chol(schur_w)

        def arrow_solve(v_w, v_p):
            rhs_w = v_w.copy()
            hp = np.empty_like(v_p)
            for m in range(m_parts):
                hp[m] = _chol_solve_vec(h_chols[m], v_p[m])
                rhs_w += d_blocks[m] @ hp[m]
            dw = _chol_solve_vec(schur_chol, rhs_w)
            dp = np.empty_like(v_p)
            for m in range(m_parts):
                dp[m] = hp[m] + ydm[m] @ dw
            return dw, dp

        def newton(rc_blocks):
            """Solve the reduced system for (dy, dS, dX) given the center term."""
            # right-hand side: rp + A(W Rd W) - A(Rc)
            wrdw = _sandwich(g_mats, rd)
            diff = wrdw - rc_blocks
            aw_row_d, ap_rows_d = apply_a(diff)
            v_w = rp_w + aw_row_d
            v_p = rp_p + ap_rows_d
            dw, dp = arrow_solve(v_w, v_p)
            # iterative refinement against the exactly applied operator
            # A(W A*(.) W) keeps the equality residual near round-off even
            # when the Schur system turns ill-conditioned
            for _ in range(3):
                ast_d, _ = adjoint_a(dw, dp)
                m_w, m_p = apply_a(_sandwich(g_mats, ast_d))
                res_w = v_w - m_w
                res_p = v_p - m_p
                if max(np.max(np.abs(res_w)), np.max(np.abs(res_p))) < 1e-13:
                    break
                cw, cp = arrow_solve(res_w, res_p)
                dw = dw + cw
                dp = dp + cp
            dst, _ = adjoint_a(dw, dp)
            ds = rd - dst
            dx = _sym(rc_blocks - _sandwich(g_mats, ds))
            return dw, dp, ds, dx

        # predictor (affine direction)
        frac = _STEP_FRAC if mu > 1e-8 else 0.995
        rc_aff = -x
        dw_a, dp_a, ds_a, dx_a = newton(rc_aff)
        ap = min(1.0, frac * _max_step(x, dx_a))
        ad = min(1.0, frac * _max_step(s, ds_a))
        mu_aff = float(np.einsum("bij,bij->", x + ap * dx_a, s + ad * ds_a)) \
            / (n_blocks * d)
        sigma = float(np.clip((mu_aff / mu) ** 3, _MIN_SIGMA, _MAX_SIGMA))

        # corrector: second-order term in the scaled space
        rc = np.empty_like(x)
        for b in range(n_blocks):
            dxb = _sym(g_invs[b] @ dx_a[b] @ g_invs[b])
            dsb = _sym(g_mats[b] @ ds_a[b] @ g_mats[b])
            cross = _sym(dxb @ dsb)
            q, lam = v_vecs[b], v_eigs[b]
            r_tilde = q.T @ cross @ q
            denom = lam[:, None] + lam[None, :]
            term = g_mats[b] @ (q @ (2.0 * r_tilde / denom) @ q.T) @ g_mats[b]
            rc[b] = sigma * mu * s_invs[b] - x[b] - _sym(term)

        dw, dp, ds, dx = newton(rc)
        ap = min(1.0, frac * _max_step(x, dx))
        ad = min(1.0, frac * _max_step(s, ds))
        if ap < 1e-10 and ad < 1e-10:
            if mu > 1e-6:
                raise SolverFailure(f"no progress at iteration {it} (mu={mu:.2e})")
            break  # round-off floor; fall back to the best iterate

        x = _sym(x + ap * dx)
        s = _sym(s + ad * ds)
        w_vec = w_vec + ad * dw
        p_vecs = p_vecs + ad * dp

    if status != "optimal" and best is not None:
        w_vec, p_vecs, gap, pres, dres = best

    witness = smat(w_vec, d)
    p_mats = [smat(p_vecs[m], d) for m in range(m_parts)]
    q_mats = [partial_transpose_matrix(witness - p_mats[m], tuple(subsets[m]),
                                       n_sites) for m in range(m_parts)]
    return WitnessSolution(
        witness=witness,
        p_blocks=p_mats,
        q_blocks=q_mats,
        objective=float(np.sum(witness * rho)),
        gap=gap,
        primal_residual=pres,
        dual_residual=dres,
        iterations=it,
        status=status,
    )


# ----------------------------------------------------------------------
# small linear-algebra utilities
# ----------------------------------------------------------------------

def _chol(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * max(1.0, float(np.trace(a)) / a.shape[0])
        for _ in range(8):
            try:
                return np.linalg.cholesky(a + jitter * np.eye(a.shape[0]))
            except np.linalg.LinAlgError:
                jitter *= 100.0
        raise SolverFailure("Schur block lost positive definiteness")


def _chol_solve(l: np.ndarray, b: np.ndarray) -> np.ndarray:
    from scipy.linalg import solve_triangular

    y = solve_triangular(l, b, lower=True, check_finite=False)
    return solve_triangular(l.T, y, lower=False, check_finite=False)


def _chol_solve_vec(l: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _chol_solve(l, b.reshape(-1, 1)).ravel()


def _sandwich(g_mats: np.ndarray, blocks: np.ndarray) -> np.ndarray:
    """W_b Z_b W_b for every block, with W_b = G_b G_b."""
    w = np.einsum("bij,bjk->bik", g_mats, g_mats)
    return _sym(np.einsum("bij,bjk,bkl->bil", w, blocks, w))
