"""Closed-form determinants for four-site Pauli expectations.

Second, independent evaluation route used to cross-check the general
reduction engine in `wick`.  Each nonvanishing four-site pattern (even
number of X's and of Y's; 72 of the 256 label tuples) has a closed-form
determinant in the contractions G_r whose rows and columns are explicit
integer windows:

* pure-Z strings on sites ``s_1..s_k``:  (-1)^k det[ G_{s_v - s_u} ]
* one X (or Y) pair at sites ``p < q``, with optional Z's: a Toeplitz-like
  block spanning the pair, rows/columns shifted one differently for X and
  for Y; Z's inside the pair delete their row and column, Z's outside
  append one and flip the sign;
* two X/Y pairs: one block window per pair.

Values carry the same site-parity string factors as the engine, so both
routes match the exact-diagonalization oracle.  Three-site expectations are
the four-site ones with one label set to identity.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from .correlators import CorrelatorTable

__all__ = ["parity_allowed", "nonvanishing_patterns", "template_expectation"]


def parity_allowed(labels) -> bool:
    """True unless the pattern vanishes identically (odd X or Y count)."""
    seq = tuple(labels)
    return seq.count("X") % 2 == 0 and seq.count("Y") % 2 == 0


def nonvanishing_patterns(n_sites: int = 4):
    """All label tuples with even X and Y counts, identity-only excluded."""
    out = []
    for labels in product("XYZI", repeat=n_sites):
        if parity_allowed(labels) and set(labels) != {"I"}:
            out.append(labels)
    return out


def _det(g: CorrelatorTable, rows, cols) -> float:
    k = len(rows)
    if k == 0:
        return 1.0
    mat = np.empty((k, k))
    for u, a in enumerate(rows):
        for v, b in enumerate(cols):
            mat[u, v] = g[b - a]
    return float(np.linalg.det(mat))


def _pair_window(kind_lo: str, kind_hi: str, lo: int, hi: int):
    """Row/column index windows of one X/Y pair block on sites lo < hi."""
    if (kind_lo, kind_hi) == ("X", "X"):
        return list(range(lo + 1, hi + 1)), list(range(lo, hi))
    if (kind_lo, kind_hi) == ("Y", "Y"):
        return list(range(lo, hi)), list(range(lo + 1, hi + 1))
    if (kind_lo, kind_hi) == ("X", "Y"):
        return list(range(lo + 1, hi)), list(range(lo, hi + 1))
    # ("Y", "X")
    return list(range(lo, hi + 1)), list(range(lo + 1, hi))


def template_expectation(labels, arr, g: CorrelatorTable) -> float:
    """Closed-form value of a four-site Pauli expectation.

    Parameters
    ----------
    labels : sequence of four labels over {X, Y, Z, I}
    arr : (alpha, beta, delta) spacings, all >= 1
    g : CorrelatorTable covering offsets up to the total span

    Forbidden-parity patterns return 0.0 (see `parity_allowed`).
    """
    labels = tuple(labels)
    if len(labels) != 4:
        raise ValueError(f"expected four labels, got {labels}")
    alpha, beta, delta = arr
    if min(alpha, beta, delta) < 1:
        raise ValueError(f"spacings must be positive, got {arr}")
    if not parity_allowed(labels):
        return 0.0

    offsets = (0, alpha, alpha + beta, alpha + beta + delta)
    z_sites = [s for s, l in zip(offsets, labels) if l == "Z"]
    xy = [(s, l) for s, l in zip(offsets, labels) if l in ("X", "Y")]

    # string-convention parity factor shared with the reduction engine
    conv = -1 if sum(s for s, _ in xy) % 2 else 1

    if not xy:
        sign = -1 if len(z_sites) % 2 else 1
        return sign * _det(g, z_sites, z_sites)

    if len(xy) == 2:
        (lo, kl), (hi, kh) = xy
        rows, cols = _pair_window(kl, kh, lo, hi)
        z_in = [s for s in z_sites if lo < s < hi]
        z_out = [s for s in z_sites if not lo < s < hi]
        rows = sorted([s for s in rows if s not in z_in] + z_out)
        cols = sorted([s for s in cols if s not in z_in] + z_out)
        sign = -1 if ((hi - lo) + len(z_out)) % 2 else 1
        return conv * sign * _det(g, rows, cols)

    # two pairs: consecutive X/Y sites pair up, no room for Z's
    (s1, k1), (s2, k2), (s3, k3), (s4, k4) = xy
    r1, c1 = _pair_window(k1, k2, s1, s2)
    r2, c2 = _pair_window(k3, k4, s3, s4)
    rows, cols = r1 + r2, c1 + c2
    if len(rows) != len(cols):
        # two mixed pairs of the same orientation (XYXY, YXYX): the A/B
        # counts cannot balance and the expectation vanishes identically
        return 0.0
    sign = -1 if ((s2 - s1) + (s4 - s3)) % 2 else 1
    return conv * sign * _det(g, rows, cols)
