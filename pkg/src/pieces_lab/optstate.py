"""Trial many-fermion states over a disordered piece configuration.

Two plans are built here: the non-interacting ground state (fill the n
globally lowest levels) and the near-optimal interacting trial state whose
per-piece assignment depends only on the piece length through three
thresholds derived from the Fermi length and the two-body interaction
constant gamma:

    empty                length < l_rho - rho x*      or >= 3 l_rho
    one ground particle  [l_rho - rho x*, 2 l_rho + A*)
    interacting pair     [2 l_rho + A*,   3 l_rho)

with A* = mu gamma / 8 pi^2 and x* = 1 - exp(-A*).  The particle deficit is
completed by free levels in long pieces (preferring lengths in
[3 l_rho (1+rho), 4 l_rho)).  The plan energy adds closed-form kinetic
terms, cached interacting pair energies, and density-density cross terms
between pieces within interaction range.
"""

import heapq

import numpy as np
from scipy.interpolate import CubicSpline

from .spectrum import (enumerate_levels_below, fermi_energy, fermi_length,
                       free_energy_per_particle_empirical)
from .twobody import astar_xstar, gamma_star, solve_two_body
from .potential import tail_Z
from .quadrature import cross_density_integral
from .manybody import exact_ground_state_small, free_occupation_energy

__all__ = [
    "StatePlan",
    "fill_free_ground_state",
    "build_psi_opt",
    "energy_of_plan",
    "banded_particle_count",
    "banded_fraction_prediction",
    "second_order_prediction",
    "asymptotics_check",
    "subadditivity_check",
    "cross_piece_bound_check",
    "neighbor_energy_ladder",
]

EMPTY, SINGLE, PAIR, FILLED = "empty", "single", "pair", "filled"


class StatePlan:
    """Per-piece assignment produced by a filling rule.

    occupation[j] particles in piece j; tags[j] in {empty, single, pair,
    filled} where 'filled' means the lowest occupation[j] free levels.
    """

    def __init__(self, occupation, tags, thresholds=None):
        self.occupation = np.asarray(occupation, dtype=np.int64)
        self.tags = list(tags)
        self.thresholds = dict(thresholds or {})
        if len(self.tags) != len(self.occupation):
            raise ValueError("tags/occupation length mismatch")

    @property
    def n(self):
        return int(self.occupation.sum())

    def occupied(self):
        return np.nonzero(self.occupation)[0]


def fill_free_ground_state(cfg, n):
    """Occupy the n globally lowest one-particle levels."""
    if n < 1:
        raise ValueError("n must be >= 1")
    E = fermi_energy(n / cfg.L, 1.0)
    table = enumerate_levels_below(cfg, E)
    while len(table) < n:
        E *= 2.0
        table = enumerate_levels_below(cfg, E)
    occ = np.zeros(cfg.n_pieces, dtype=np.int64)
    for j in table.piece_index[:n]:
        occ[j] += 1
    tags = [EMPTY if q == 0 else FILLED for q in occ]
    return StatePlan(occ, tags, {"n": n, "cutoff": float(table.energies[n - 1])})


def build_psi_opt(cfg, rho, gamma, mu=1.0):
    """The banded trial plan for density rho and interaction constant gamma."""
    ell_rho = fermi_length(rho, mu)
    A, x = astar_xstar(gamma, mu)
    lo = ell_rho - rho * x
    mid = 2.0 * ell_rho + A
    hi = 3.0 * ell_rho
    lengths = cfg.lengths
    occ = np.zeros(cfg.n_pieces, dtype=np.int64)
    tags = [EMPTY] * cfg.n_pieces
    occ[(lengths >= lo) & (lengths < mid)] = 1
    occ[(lengths >= mid) & (lengths < hi)] = 2
    for j in np.nonzero(occ)[0]:
        tags[j] = SINGLE if occ[j] == 1 else PAIR
    n = int(round(rho * cfg.L))
    deficit = n - int(occ.sum())
    if deficit < 0:
        # finite-size overshoot: both the band count and n fluctuate by
        # O(sqrt(n)), so the bands can exceed n.  Trim deterministically by
        # dropping the most expensive particles: singles in the shortest
        # occupied pieces, then pair demotions.
        singles = sorted((j for j in np.nonzero(occ)[0] if occ[j] == 1),
                         key=lambda j: lengths[j])
        while deficit < 0 and singles:
            j = singles.pop(0)
            occ[j], tags[j] = 0, EMPTY
            deficit += 1
        pairs = sorted((j for j in np.nonzero(occ)[0] if occ[j] == 2),
                       key=lambda j: lengths[j])
        while deficit < 0 and pairs:
            j = pairs.pop(0)
            occ[j], tags[j] = 1, SINGLE
            deficit += 1
        if deficit < 0:
            raise ValueError("band assignment exceeds n; rho too large for this rule")
    # completion: lowest free levels in long pieces, preferred band first with
    # a soft per-piece cap of 3; any remainder goes uncapped into the long
    # pieces (at desk scale the capped capacity ~equals the mean deficit, so
    # the cap alone is exceeded on a finite fraction of realizations)
    preferred = np.nonzero((lengths >= hi * (1.0 + rho)) & (lengths < 4.0 * ell_rho))[0]
    fallback = np.setdiff1d(np.nonzero(lengths >= hi)[0], preferred)
    for pool in (preferred, fallback):
        if deficit == 0:
            break
        fill = dict.fromkeys(pool.tolist(), 0)
        while deficit > 0 and fill:
            j = min(fill, key=lambda i: (np.pi * (fill[i] + 1) / lengths[i]) ** 2)
            fill[j] += 1
            occ[j] += 1
            tags[j] = FILLED
            deficit -= 1
            if fill[j] >= 3:
                del fill[j]
    if deficit > 0:
        # the capped long-piece capacity ~equals the mean deficit at desk
        # scale, so about half of all realizations spill over.  Place the
        # remainder on the globally lowest free marginal levels among pieces
        # the bands left empty (mostly pieces just below the single band,
        # whose first level sits just above the Fermi energy).
        pool = ((occ > 0) & (lengths >= hi)) | (occ == 0)
        heap = [((np.pi * (occ[j] + 1) / lengths[j]) ** 2, int(j))
                for j in np.nonzero(pool)[0]]
        heapq.heapify(heap)
        while deficit > 0 and heap:
            _, j = heapq.heappop(heap)
            occ[j] += 1
            tags[j] = FILLED
            deficit -= 1
            heapq.heappush(heap, ((np.pi * (occ[j] + 1) / lengths[j]) ** 2, j))
    if deficit > 0:
        raise ValueError("not enough pieces to complete the particle count")
    return StatePlan(occ, tags, {
        "ell_rho": ell_rho, "A_star": A, "x_star": x,
        "lo": lo, "mid": mid, "hi": hi, "n": n, "rho": rho, "mu": mu,
    })


# ---------------------------------------------------------------------------
# plan energy

_pair_energy_splines = {}
_pair_density_cache = {}


def _pair_energy_spline(U, lmin, lmax, n_nodes=12, M=16, rtol=1e-6):
    from .twobody import _potential_key
    key = (_potential_key(U), round(lmin, 6), round(lmax, 6), n_nodes, M)
    if key not in _pair_energy_splines:
        grid = np.linspace(lmin, lmax, n_nodes)
        vals = [solve_two_body(U, l, M=M, rtol=rtol).energy for l in grid]
        _pair_energy_splines[key] = CubicSpline(grid, vals)
    return _pair_energy_splines[key]


def _pair_density(U, ell, M=12, rtol=1e-4):
    from .twobody import _potential_key
    ell_r = round(ell * 20.0) / 20.0  # 0.05 resolution; reused across samples
    key = (_potential_key(U), ell_r, M)
    if key not in _pair_density_cache:
        sol = solve_two_body(U, ell_r, M=M, rtol=rtol)
        _pair_density_cache[key] = sol
    sol = _pair_density_cache[key]
    # rescale so the density stays normalized (trace 2) on [0, ell]
    return lambda x: sol.density(np.asarray(x) * sol.ell / ell) * sol.ell / ell


def _piece_density(U, tag, q, ell):
    if tag == PAIR:
        return _pair_density(U, ell)
    ks = np.arange(1, q + 1)
    return lambda x: np.sum(2.0 / ell * np.sin(np.pi * np.outer(ks, np.atleast_1d(x)) / ell) ** 2, axis=0)


def energy_of_plan(cfg, plan, U, include_cross=True, pair_spline=True):
    """Total energy of the plan state.

    Per-piece terms: closed form pi^2 k^2/l^2 sums for singles and free
    fills, interacting two-body ground energies for pairs (cubic-spline
    cache over the pair band).  Cross terms: density-density integrals
    between occupied pieces within interaction range.
    """
    lengths = cfg.lengths
    occ_idx = plan.occupied()
    total = 0.0
    pair_lengths = [lengths[j] for j in occ_idx if plan.tags[j] == PAIR]
    spline = None
    if pair_lengths and U is not None:
        if pair_spline and len(pair_lengths) > 3:
            # key the spline by the plan's pair band (not per-sample extremes)
            # so the cache is shared across disorder realizations
            if "mid" in plan.thresholds and "hi" in plan.thresholds:
                lmin, lmax = plan.thresholds["mid"], plan.thresholds["hi"]
            else:
                lmin, lmax = min(pair_lengths), max(pair_lengths)
            pad = max(1e-3, 0.01 * (lmax - lmin))
            spline = _pair_energy_spline(U, lmin - pad, lmax + pad)
    for j in occ_idx:
        q, tag, l = plan.occupation[j], plan.tags[j], lengths[j]
        if tag == PAIR and U is not None:
            total += float(spline(l)) if spline is not None else solve_two_body(U, l, M=16).energy
        else:
            total += free_occupation_energy([l], [q])
    if include_cross and U is not None:
        rng = U.support_radius if U.support_radius is not None else U.effective_radius(1e-10)
        lefts, rights = cfg.lefts, cfg.rights
        dens = {}
        for a_pos, j in enumerate(occ_idx):
            for k in occ_idx[a_pos + 1:]:
                gap = lefts[k] - rights[j]
                if gap >= rng:
                    break  # occupied pieces are ordered; gaps only grow
                for idx in (j, k):
                    if idx not in dens:
                        dens[idx] = _piece_density(U, plan.tags[idx], plan.occupation[idx], lengths[idx])
                total += cross_density_integral(U, dens[j], lengths[j], dens[k], lengths[k], gap)
    return total


def banded_particle_count(cfg, rho, gamma, mu=1.0):
    """Particles placed by the length bands alone (no completion):
    singles + 2 x pairs."""
    ell_rho = fermi_length(rho, mu)
    A, x = astar_xstar(gamma, mu)
    lo, mid, hi = ell_rho - rho * x, 2.0 * ell_rho + A, 3.0 * ell_rho
    lengths = cfg.lengths
    singles = int(((lengths >= lo) & (lengths < mid)).sum())
    pairs = int(((lengths >= mid) & (lengths < hi)).sum())
    return singles + 2 * pairs


def banded_fraction_prediction(rho, gamma, mu=1.0):
    """Predicted banded-count fraction 1 - r^2 (3 - x* - x*^2/2) with
    r = rho/(mu+rho) = e^{-mu l_rho}; accurate to O(rho^3) with a small
    constant (the literal rho^2 arrangement carries a ~7 rho^3 remainder)."""
    _, x = astar_xstar(gamma, mu)
    r = rho / (mu + rho)
    return 1.0 - r ** 2 * (3.0 - x - 0.5 * x ** 2)


def second_order_prediction(rho, mu, gamma):
    """Closed-form second-order energy correction per particle:
    pi^2 gamma*^mu mu^-1 rho_mu l_rho^-3, rho_mu = rho/mu."""
    if rho <= 0 or mu <= 0 or gamma < 0:
        raise ValueError("positive rho, mu and gamma >= 0 required")
    if gamma == 0:
        return 0.0
    gs = gamma_star(gamma, mu)
    ell_rho = fermi_length(rho, mu)
    return float(np.pi ** 2 * gs * (rho / mu ** 2) / ell_rho ** 3)


def asymptotics_check(cfg, rho, U, gamma, mu=1.0):
    """Measured excess energy of the trial plan against the second-order
    prediction: r = (E(plan)/n - free energy per particle) / prediction."""
    if gamma == 0 or U is None:
        return {"ratio": None, "note": "no interaction"}
    plan = build_psi_opt(cfg, rho, gamma, mu=mu)
    n = plan.n
    e_plan = energy_of_plan(cfg, plan, U) / n
    e_free = free_energy_per_particle_empirical(cfg, n)
    pred = second_order_prediction(rho, mu, gamma)
    return {
        "ratio": (e_plan - e_free) / pred,
        "plan_energy_per_particle": e_plan,
        "free_energy_per_particle": e_free,
        "prediction": pred,
        "n": n,
    }


# ---------------------------------------------------------------------------
# sub-additivity and cross-piece bounds


def _ground_density(state):
    """One-particle density evaluator (global coordinate) of a CIState."""
    from .rdm import rdm1
    g = rdm1(state)
    intervals = state.basis.intervals

    def rho(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for a, (jp, kp) in enumerate(g.modes):
            left, l = intervals[jp]
            fa = np.where((x >= left) & (x <= left + l),
                          np.sqrt(2.0 / l) * np.sin(kp * np.pi * (x - left) / l), 0.0)
            for b, (jq, kq) in enumerate(g.modes):
                if jq != jp:
                    continue
                fb = np.where((x >= left) & (x <= left + l),
                              np.sqrt(2.0 / l) * np.sin(kq * np.pi * (x - left) / l), 0.0)
                out += g.matrix[a, b] * fa * fb
        return out

    return rho


def subadditivity_check(intervals1, n1, intervals2, n2, U, M=8):
    """E(union, n1+n2) <= E(1, n1) + E(2, n2) + density-density slack.

    The two interval lists must be disjoint regions of the line (global
    coordinates).  Returns the three energies and the slack integral.
    """
    E1, _, st1, _ = exact_ground_state_small(intervals1, n1, U, M=M)
    E2, _, st2, _ = exact_ground_state_small(intervals2, n2, U, M=M)
    Eu, _, _, _ = exact_ground_state_small(list(intervals1) + list(intervals2),
                                           n1 + n2, U, M=M)
    rho1, rho2 = _ground_density(st1), _ground_density(st2)
    rng = U.support_radius if U.support_radius is not None else U.effective_radius(1e-12)
    slack = 0.0
    for a1, l1 in intervals1:
        for a2, l2 in intervals2:
            if a1 + l1 <= a2:
                gap = a2 - (a1 + l1)
                da = lambda x, a=a1: rho1(x + a)
                db = lambda y, a=a2: rho2(y + a)
                la, lb = l1, l2
            else:
                gap = a1 - (a2 + l2)
                da = lambda x, a=a2: rho2(x + a)
                db = lambda y, a=a1: rho1(y + a)
                la, lb = l2, l1
            if gap < rng:
                slack += cross_density_integral(U, da, la, db, lb, gap)
    return {
        "E_union": Eu, "E_1": E1, "E_2": E2, "slack": slack,
        "upper_ok": Eu <= E1 + E2 + slack + 1e-8,
    }


def _one_particle_density(ell, i):
    return lambda x: 2.0 / ell * np.sin(i * np.pi * np.asarray(x) / ell) ** 2


# upper constants for the cross-piece bound shapes: the '11far' and '12'
# constants are explicit; the big-O shapes carry constants fitted once on an
# exponential potential over (l1, l2) in [8, 16]^2, a in [1.5, 4], with at
# least 2x margin over the measured maximum ratio
BOUND_CONSTANTS = {"11far": 1.0, "11close": 4.0, "12": 1.0,
                   "12close": 10.0, "22": 1.0}


def cross_piece_bound_check(U, ell1, ell2, a, which, i=1, j=1):
    """Quadrature check of one cross-piece interaction bound.

    which:
      '11far'    LHS <= 2 a^-3 Z(a) / max(l1, l2)
      '11close'  LHS = O(Z(a) / (max^2 min^2))           (fitted constant)
      '12'       LHS <= 4 a^-3 Z(a) / l1
      '12close'  LHS = O(Z(a) / (l1^3 sqrt(l2)))         (fitted constant)
      '22'       LHS = O(min(1, a^-2 Z(a)) / sqrt(l1 l2)) (fitted constant)
    LHS is the density-density interaction integral between eigenstates of
    the two pieces at distance a (one-particle level i resp. j; '12'/'22'
    use the two-body ground-state density, trace 2).
    Returns dict with lhs, rhs_shape and ratio = lhs / rhs_shape.
    """
    Z = lambda x: tail_Z(U, x)
    if which in ("11far", "11close"):
        da, db = _one_particle_density(ell1, i), _one_particle_density(ell2, j)
    elif which in ("12", "12close"):
        da = _one_particle_density(ell1, i)
        sol = solve_two_body(U, ell2, M=12, rtol=1e-4)
        db = lambda y: 2.0 * sol.density(y)  # trace-2 two-body diagonal
    elif which == "22":
        s1 = solve_two_body(U, ell1, M=12, rtol=1e-4)
        s2 = solve_two_body(U, ell2, M=12, rtol=1e-4)
        da = lambda x: 2.0 * s1.density(x)
        db = lambda y: 2.0 * s2.density(y)
    else:
        raise ValueError("unknown bound check %r" % which)
    lhs = cross_density_integral(U, da, ell1, db, ell2, a)
    Za = Z(a) if a > 0 else None
    if which == "11far":
        rhs = 2.0 * a ** -3 * Za / max(ell1, ell2)
    elif which == "11close":
        rhs = Za / (max(ell1, ell2) ** 2 * min(ell1, ell2) ** 2)
    elif which == "12":
        rhs = 4.0 * a ** -3 * Za / ell1
    elif which == "12close":
        rhs = Za / (ell1 ** 3 * np.sqrt(ell2))
    else:
        rhs = min(1.0, a ** -2 * Za) / np.sqrt(ell1 * ell2) if a > 0 else 1.0 / np.sqrt(ell1 * ell2)
    if rhs > 0:
        ratio = lhs / rhs
    else:
        ratio = 0.0 if abs(lhs) < 1e-14 else np.inf
    C = BOUND_CONSTANTS[which]
    return {"which": which, "lhs": lhs, "rhs_shape": rhs, "ratio": ratio,
            "constant": C, "ok": ratio <= C}


def neighbor_energy_ladder(U, gap=0.5, ells=(5.0, 10.0, 20.0, 40.0), M=10):
    """Two electrons in neighboring pieces [0, l] and [l+gap, 2l+gap]:
    deviation of the exact ground energy from pi^2/l1^2 + pi^2/l2^2, with
    the fitted decay order in l over a doubling ladder."""
    devs = []
    for l in ells:
        iv = [(0.0, l), (l + gap, l)]
        E, Q, _, _ = exact_ground_state_small(iv, 2, U, M=M)
        devs.append(E - 2.0 * np.pi ** 2 / l ** 2)
    devs = np.array(devs)
    mask = devs > 0
    order = np.polyfit(np.log(np.array(ells)[mask]), np.log(devs[mask]), 1)[0] if mask.sum() >= 2 else np.nan
    return {"ells": list(ells), "deviations": devs.tolist(), "fitted_order": float(order)}
