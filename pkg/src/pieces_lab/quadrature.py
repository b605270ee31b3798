"""Quadrature for interaction integrals against Dirichlet sine modes.

Everything here reduces to integrals of the form

    g[a,b,c,d] = int_A int_B U(x - y - offset) sA_a(x) sA_b(x)
                                               sB_c(y) sB_d(y) dy dx

with sA, sB normalized sine modes on intervals A = [0, lA], B = [0, lB]
(B placed so that x - y_global = x - y - offset).  The difference variable
u = x - y - offset is integrated numerically over panels adapted to the
kinks and support of U; for each u-node the inner integral is a product of
two cosine expansions and is evaluated in closed form.  Only the frequency
table

    J[m, n] = int du U(u) int dx cos(m pi x / lA) cos(n pi (x-u-offset) / lB)

is accumulated (m <= 2 mA, n <= 2 mB); every g entry is a signed combination
of four J entries.  Sharply supported potentials cost nothing extra, and
accuracy is governed by the u-panel rule alone.
"""

import numpy as np

__all__ = [
    "sine_modes",
    "frequency_table",
    "interaction_g_tensor",
    "cross_g_tensor",
    "pair_reduced_matrix",
    "cross_density_integral",
]


_leggauss_cache = {}


def _gl(a, b, n):
    if n not in _leggauss_cache:
        _leggauss_cache[n] = np.polynomial.legendre.leggauss(n)
    x, w = _leggauss_cache[n]
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def sine_modes(m, ell, x):
    """Normalized Dirichlet modes sqrt(2/l) sin(pi k x / l), k = 1..m.

    Returns an (m, len(x)) array.
    """
    x = np.asarray(x, dtype=np.float64)
    k = np.arange(1, m + 1)[:, None]
    return np.sqrt(2.0 / ell) * np.sin(np.pi * k * x[None, :] / ell)


def _u_panels(U, lo, hi, extra_edges=(), max_cycles=6.0, dens=1.0):
    """(a, b) u-panels covering [lo, hi] clipped to U's effective support,
    split at kinks of U and at the supplied edges, and subdivided so no
    panel spans more than max_cycles oscillation cycles (density dens)."""
    if lo >= hi:
        return []
    edges = {lo, hi}
    cand = [0.0]
    for b in U.breakpoints():
        cand.extend((b, -b))
    cand.extend(extra_edges)
    for c in cand:
        if lo < c < hi:
            edges.add(c)
    R = U.effective_radius(1e-13 * (U.moment(0) + 1e-300))
    lo_c, hi_c = max(lo, -R), min(hi, R)
    if lo_c >= hi_c:
        return []
    edges = sorted(e for e in edges if lo_c <= e <= hi_c)
    if not edges or edges[0] > lo_c:
        edges = [lo_c] + edges
    if edges[-1] < hi_c:
        edges = edges + [hi_c]
    out = []
    width_cap = max_cycles / max(dens, 1e-12)
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        n_sub = max(1, int(np.ceil((b - a) / width_cap)))
        sub = np.linspace(a, b, n_sub + 1)
        out.extend(zip(sub[:-1], sub[1:]))
    return out


def _cos_cos_integral(alpha, beta, shift, x_lo, x_hi):
    """int_{x_lo}^{x_hi} cos(alpha x) cos(beta (x - shift)) dx, vectorized
    over broadcast arrays alpha, beta."""
    xm = 0.5 * (x_hi + x_lo)
    dx2 = 0.5 * (x_hi - x_lo)

    def half(omega, phase):
        return 2.0 * np.cos(omega * xm + phase) * dx2 * np.sinc(omega * dx2 / np.pi)

    return 0.5 * (half(alpha + beta, -beta * shift)
                  + half(alpha - beta, beta * shift))


def frequency_table(U, ellA, mA, ellB, mB, offset, nodes_per_panel=32):
    """Accumulate J[m, n], 0 <= m <= 2 mA, 0 <= n <= 2 mB (see module doc)."""
    u_lo = -offset - ellB
    u_hi = ellA - offset
    dens = mA / ellA + mB / ellB
    panels = _u_panels(U, u_lo, u_hi,
                       extra_edges=(-offset, ellA - ellB - offset),
                       dens=dens)
    alpha = (np.pi / ellA) * np.arange(2 * mA + 1)[:, None]
    beta = (np.pi / ellB) * np.arange(2 * mB + 1)[None, :]
    J = np.zeros((2 * mA + 1, 2 * mB + 1))
    for a, b in panels:
        uq, wu = _gl(a, b, nodes_per_panel)
        Uu = np.asarray(U(uq), dtype=np.float64) * wu
        for u, cu in zip(uq, Uu):
            if cu == 0.0:
                continue
            x_lo = max(0.0, u + offset)
            x_hi = min(ellA, u + offset + ellB)
            if x_hi <= x_lo:
                continue
            J += cu * _cos_cos_integral(alpha, beta, u + offset, x_lo, x_hi)
    return J


def _gather_g(J, ellA, ellB, a, b, c, d):
    """g[a,b,c,d] from the frequency table (0-based mode indices)."""
    i, j = a + 1, b + 1
    k, l = c + 1, d + 1
    return (J[np.abs(i - j), np.abs(k - l)] - J[np.abs(i - j), k + l]
            - J[i + j, np.abs(k - l)] + J[i + j, k + l]) / (ellA * ellB)


def interaction_g_tensor(U, ell, m, **kw):
    """g[a,b,c,d] = int int U(x-y) s_a(x)s_b(x) s_c(y)s_d(y) on [0,ell]^2.

    Indices are 0-based (mode k = index + 1).  Symmetric under a<->b, c<->d
    and (a,b)<->(c,d).
    """
    J = frequency_table(U, ell, m, ell, m, 0.0, **kw)
    idx = np.arange(m)
    a, b, c, d = np.ix_(idx, idx, idx, idx)
    return _gather_g(J, ell, ell, a, b, c, d)


def cross_g_tensor(U, ellA, mA, ellB, mB, gap, **kw):
    """Same integral with x on a piece [0, ellA] and y on a piece of length
    ellB lying 'gap' to the RIGHT of A."""
    offset = ellA + gap
    J = frequency_table(U, ellA, mA, ellB, mB, offset, **kw)
    a, b = np.ix_(np.arange(mA), np.arange(mA))
    c, d = np.ix_(np.arange(mB), np.arange(mB))
    return _gather_g(J, ellA, ellB, a[:, :, None, None], b[:, :, None, None],
                     c[None, None, :, :], d[None, None, :, :])


def pair_reduced_matrix(U, ell, pairs, row_chunk=512, **kw):
    """Interaction matrix over antisymmetric pair states phi_(i,j).

    pairs: list of (i, j), 1 <= i < j.  Entry [(ij),(kl)] equals
    <U(x-y) phi_ij, phi_kl> = g[i,k,j,l] - g[i,l,j,k].  Rows are gathered
    from the frequency table in chunks to bound peak memory.
    """
    m = max(j for _, j in pairs)
    J = frequency_table(U, ell, m, ell, m, 0.0, **kw)
    i = np.array([p[0] - 1 for p in pairs])
    j = np.array([p[1] - 1 for p in pairs])
    n = len(pairs)
    V = np.empty((n, n))
    for lo in range(0, n, row_chunk):
        hi = min(lo + row_chunk, n)
        a, c = np.ix_(i[lo:hi], i)
        b, d = np.ix_(j[lo:hi], j)
        V[lo:hi] = (_gather_g(J, ell, ell, a, c, b, d)
                    - _gather_g(J, ell, ell, a, d, b, c))
    return V


def cross_density_integral(U, dens_a, ell_a, dens_b, ell_b, gap, n_inner=96):
    """int int U(x - y) rho_a(x) rho_b(y) for densities on two pieces at
    distance gap (piece b to the right of piece a).

    dens_a, dens_b are callables on local coordinates [0, ell].
    """
    offset = ell_a + gap
    u_lo, u_hi = -offset - ell_b, ell_a - offset
    panels = _u_panels(U, u_lo, u_hi,
                       extra_edges=(-offset, ell_a - ell_b - offset),
                       dens=0.25)
    total = 0.0
    for (a, b) in panels:
        n_u = max(24, int(2.0 * (b - a)) + 8)
        uq, wu = _gl(a, b, n_u)
        Uu = np.asarray(U(uq), dtype=np.float64) * wu
        for u, cu in zip(uq, Uu):
            if cu == 0.0:
                continue
            x_lo = max(0.0, u + offset)
            x_hi = min(ell_a, u + offset + ell_b)
            if x_hi <= x_lo:
                continue
            xs, wx = _gl(x_lo, x_hi, n_inner)
            total += cu * np.sum(wx * dens_a(xs) * dens_b(xs - u - offset))
    return total
