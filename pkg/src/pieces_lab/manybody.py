"""Few-fermion states over a piece configuration.

The n-particle Hamiltonian with a repulsive pair potential U is block
diagonal over occupation vectors Q (particles per piece): orbitals in
distinct pieces have disjoint supports, so any matrix element moving a
particle between pieces vanishes identically.  This module provides the
occupation bookkeeping, determinant (CI) bases within a block, the
Slater-Condon matrix elements built on the quadrature g-tensors, exact
ground states for tiny n, and pointwise wedge evaluators for states
living on disjoint pieces.
"""

import itertools
import math

import numpy as np
from scipy.linalg import eigh

from .quadrature import cross_g_tensor, interaction_g_tensor, sine_modes

__all__ = [
    "dist1",
    "dist0",
    "restrict_occupation",
    "enumerate_occupations",
    "kinetic_lower_bound",
    "free_filling_bound",
    "wedge",
    "TwoElectronIntegrals",
    "BlockBasis",
    "CIState",
    "solve_piece_qbody",
    "occupation_block_energy",
    "solve_block",
    "block_overlap",
    "exact_ground_state_small",
    "DIMENSION_CAP",
]

DIMENSION_CAP = 200_000


# ---------------------------------------------------------------------------
# occupation vectors


def dist1(Q1, Q2):
    """l^1 distance sum |Q1_i - Q2_i|."""
    Q1, Q2 = np.asarray(Q1), np.asarray(Q2)
    if Q1.shape != Q2.shape:
        raise ValueError("occupation length mismatch")
    return int(np.abs(Q1 - Q2).sum())


def dist0(Q1, Q2):
    """Hamming distance: number of pieces with different occupation."""
    Q1, Q2 = np.asarray(Q1), np.asarray(Q2)
    if Q1.shape != Q2.shape:
        raise ValueError("occupation length mismatch")
    return int((Q1 != Q2).sum())


def restrict_occupation(Q, keep):
    """Sub-occupation over the pieces selected by the boolean mask/predicate.

    `keep` is either a boolean array over pieces or a callable applied to
    piece indices.
    """
    Q = np.asarray(Q)
    if callable(keep):
        mask = np.array([bool(keep(i)) for i in range(len(Q))])
    else:
        mask = np.asarray(keep, dtype=bool)
    return Q[mask].copy()


def enumerate_occupations(n_pieces, n, cap=None):
    """All occupation vectors of total n over n_pieces with per-piece cap."""
    if cap is None:
        cap = n
    out = []

    def rec(prefix, remaining):
        i = len(prefix)
        if i == n_pieces:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for q in range(min(cap, remaining) + 1):
            rec(prefix + [q], remaining - q)

    rec([], n)
    return out


def free_occupation_energy(lengths, Q):
    """Kinetic energy of filling the Q_j lowest levels in each piece."""
    lengths = np.asarray(lengths, dtype=float)
    Q = np.asarray(Q)
    P = (2 * Q + 1) * (Q + 1) * Q / 6.0  # sum of k^2, k = 1..Q
    return float(np.pi ** 2 * np.sum(P / lengths ** 2))


def free_filling_bound(lengths, Q):
    """Lower bound sum_j pi^2 P(Q_j)/l_j^2 with P(X)=(2X+1)(X+1)X/6.

    For U >= 0 this free-filling energy bounds the interacting block
    energy from below.
    """
    return free_occupation_energy(lengths, Q)


def kinetic_lower_bound(lengths, nu):
    """pi^2 nu^3 / (3 l_k^2 k^2) for nu particles on k pieces, lengths
    sorted ascending (l_k the largest)."""
    lengths = np.asarray(lengths, dtype=float)
    if np.any(np.diff(lengths) < 0):
        raise ValueError("lengths must be sorted ascending")
    if nu < 1:
        raise ValueError("nu must be >= 1")
    k = len(lengths)
    return float(np.pi ** 2 * nu ** 3 / (3.0 * lengths[-1] ** 2 * k ** 2))


# ---------------------------------------------------------------------------
# wedge evaluator


def wedge(states):
    """Pointwise evaluator of the normalized wedge of local states.

    `states` is a list of (interval, q, psi) with interval = (left, right),
    q the particle count and psi an antisymmetric local wavefunction of q
    coordinates (in local coordinates on [0, right-left]).  Supports must
    be pairwise disjoint.  The returned callable takes an array of n global
    coordinates.  Normalization carries the combinatorial factor
    c(Q) = sqrt(prod q_j! / n!); evaluation routes each coordinate to the
    piece containing it, with the unshuffle sign.
    """
    ivals = [s[0] for s in states]
    for (a1, b1), (a2, b2) in itertools.combinations(ivals, 2):
        if max(a1, a2) < min(b1, b2):
            raise ValueError("overlapping supports in wedge()")
    qs = [s[1] for s in states]
    n = sum(qs)
    cQ = math.sqrt(np.prod([math.factorial(q) for q in qs]) / math.factorial(n))

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        if x.shape != (n,):
            raise ValueError("expected %d coordinates" % n)
        groups = [[] for _ in states]
        for idx, xi in enumerate(x):
            for j, (a, b) in enumerate(ivals):
                if a <= xi <= b:
                    groups[j].append(idx)
                    break
            else:
                return 0.0
        if any(len(g) != q for g, q in zip(groups, qs)):
            return 0.0
        # sign of the unshuffle sorting indices into piece-ordered blocks
        perm = [i for g in groups for i in g]
        sign = 1
        seen = [False] * n
        for start in range(n):
            if seen[start]:
                continue
            j, clen = start, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                clen += 1
            if clen % 2 == 0:
                sign = -sign
        val = cQ * sign
        for (a, _), q, psi, g in zip(ivals, qs, [s[2] for s in states], groups):
            val *= psi(x[g] - a)
        return val

    evaluate.n = n
    evaluate.c_Q = cQ
    return evaluate


# ---------------------------------------------------------------------------
# two-electron integrals over piece-tagged orbitals


class TwoElectronIntegrals:
    """g(p, q, r, s) = int int phi_p(x) phi_q(y) U(x-y) phi_r(x) phi_s(y)
    for orbitals p = (piece, k) of a configuration.

    Nonzero only when piece(p) == piece(r) and piece(q) == piece(s):
    orbitals of different pieces have disjoint supports, so the x (or y)
    integrand vanishes pointwise.  Same-piece and neighboring-piece tables
    are built lazily from the quadrature module; piece pairs farther apart
    than the interaction range give exact zeros.
    """

    def __init__(self, intervals, U, M, range_tol=1e-12):
        # intervals: list of (left, length)
        self.intervals = [(float(a), float(l)) for a, l in intervals]
        self.U = U
        self.M = int(M)
        if U is None:
            self.range = 0.0
        elif U.support_radius is not None:
            self.range = U.support_radius
        else:
            self.range = U.effective_radius(range_tol)
        self._same = {}
        self._cross = {}

    def gap(self, j1, j2):
        """Distance between pieces j1 < j2 (0 for adjacent pieces)."""
        a1, l1 = self.intervals[j1]
        a2, _ = self.intervals[j2]
        return a2 - (a1 + l1)

    def _same_table(self, j):
        if j not in self._same:
            self._same[j] = interaction_g_tensor(self.U, self.intervals[j][1], self.M)
        return self._same[j]

    def _cross_table(self, j1, j2):
        key = (j1, j2)
        if key not in self._cross:
            g = self.gap(j1, j2)
            if g >= self.range:
                self._cross[key] = None
            else:
                l1, l2 = self.intervals[j1][1], self.intervals[j2][1]
                self._cross[key] = cross_g_tensor(self.U, l1, self.M, l2, self.M, g)
        return self._cross[key]

    def __call__(self, p, q, r, s):
        if self.U is None:
            return 0.0
        (jp, kp), (jq, kq), (jr, kr), (js, ks) = p, q, r, s
        if jp != jr or jq != js:
            return 0.0
        if jp == jq:
            # table layout: [a, b, c, d] = s_a s_b in x, s_c s_d in y
            return float(self._same_table(jp)[kp - 1, kr - 1, kq - 1, ks - 1])
        a, b = (jp, jq) if jp < jq else (jq, jp)
        t = self._cross_table(a, b)
        if t is None:
            return 0.0
        if jp < jq:
            return float(t[kp - 1, kr - 1, kq - 1, ks - 1])
        return float(t[kq - 1, ks - 1, kp - 1, kr - 1])


def _slater_condon(D1, D2, g, lengths):
    """Matrix element of sum_{i<j} U(x_i - x_j) between sorted determinants
    D1, D2 (tuples of (piece, k) orbitals), plus kinetic diagonal."""
    set1, set2 = set(D1), set(D2)
    only1 = sorted(set1 - set2, key=D1.index)
    only2 = sorted(set2 - set1, key=D2.index)
    nd = len(only1)
    if nd > 2:
        return 0.0
    if nd == 0:
        val = sum(np.pi ** 2 * k ** 2 / lengths[j] ** 2 for (j, k) in D1)
        for a, b in itertools.combinations(D1, 2):
            val += g(a, b, a, b) - g(a, b, b, a)
        return val
    if nd == 1:
        p, r = only1[0], only2[0]
        sign = (-1) ** (D1.index(p) + D2.index(r))
        val = 0.0
        for q in D1:
            if q == p:
                continue
            val += g(p, q, r, q) - g(p, q, q, r)
        return sign * val
    p, q = only1
    r, s = only2
    sign = (-1) ** (D1.index(p) + D1.index(q) + D2.index(r) + D2.index(s))
    return sign * (g(p, q, r, s) - g(p, q, s, r))


class BlockBasis:
    """Determinant basis of a fixed-occupation block.

    Determinants are tuples of orbitals (piece, k) sorted by (piece, k);
    the basis is the product over pieces of the k-subsets of the first M
    local levels.
    """

    def __init__(self, intervals, Q, M):
        self.intervals = [(float(a), float(l)) for a, l in intervals]
        self.Q = tuple(int(q) for q in Q)
        self.M = int(M)
        if len(self.Q) != len(self.intervals):
            raise ValueError("occupation length != piece count")
        dim = 1
        for q in self.Q:
            if q > self.M:
                raise ValueError("occupation exceeds local truncation")
            dim *= math.comb(self.M, q)
        if dim > DIMENSION_CAP:
            raise ValueError(
                "block dimension %d exceeds cap %d for Q=%s" % (dim, DIMENSION_CAP, self.Q)
            )
        per_piece = [
            [tuple((j, k) for k in combo)
             for combo in itertools.combinations(range(1, self.M + 1), q)]
            for j, q in enumerate(self.Q)
        ]
        self.determinants = [
            tuple(o for part in prod for o in part)
            for prod in itertools.product(*per_piece)
        ]
        self.lengths = np.array([l for _, l in self.intervals])

    @property
    def dim(self):
        return len(self.determinants)

    def hamiltonian(self, g):
        dets = self.determinants
        H = np.zeros((len(dets), len(dets)))
        for i, D1 in enumerate(dets):
            for j in range(i, len(dets)):
                H[i, j] = H[j, i] = _slater_condon(D1, dets[j], g, self.lengths)
        return H


class CIState:
    """Normalized eigenstate in a BlockBasis: determinant coefficients."""

    def __init__(self, basis, coeffs, energy):
        self.basis = basis
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.energy = float(energy)
        nrm = np.linalg.norm(self.coeffs)
        if abs(nrm - 1.0) > 1e-9:
            self.coeffs = self.coeffs / nrm

    @property
    def occupation(self):
        return self.basis.Q

    @property
    def n(self):
        return sum(self.basis.Q)

    def orbital_list(self):
        """Orbitals (piece, k), k <= M, of the occupied pieces."""
        return [(j, k) for j in range(len(self.basis.intervals))
                if self.basis.Q[j] > 0 for k in range(1, self.basis.M + 1)]


def solve_piece_qbody(U, ell, q, M=16, n_states=4):
    """Eigenpairs of q interacting fermions on a single piece of length ell.

    q = 1 is the closed form (pi k / ell)^2; q in {2, 3} is a dense solve in
    the q-fold antisymmetric sine basis.
    """
    if q == 1:
        k = np.arange(1, n_states + 1)
        return (np.pi * k / ell) ** 2, [("orbital", int(kk)) for kk in k]
    if q not in (2, 3):
        raise ValueError("q must be in {1, 2, 3}")
    if M < q + 2:
        raise ValueError("M must be >= q + 2")
    basis = BlockBasis([(0.0, ell)], (q,), M)
    g = TwoElectronIntegrals([(0.0, ell)], U, M)
    H = basis.hamiltonian(g)
    w, v = eigh(H)
    states = [CIState(basis, v[:, i], w[i]) for i in range(min(n_states, len(w)))]
    return w[: n_states], states


def solve_block(intervals, Q, U, M=12, n_states=2):
    """Lowest eigenpairs of the Hamiltonian restricted to occupation Q."""
    basis = BlockBasis(intervals, Q, M)
    g = TwoElectronIntegrals(intervals, U, M)
    H = basis.hamiltonian(g)
    if basis.dim == 1:
        w = np.array([H[0, 0]])
        v = np.ones((1, 1))
    else:
        w, v = eigh(H, subset_by_index=[0, min(n_states, basis.dim) - 1])
    return w, [CIState(basis, v[:, i], w[i]) for i in range(v.shape[1])]


def occupation_block_energy(intervals_or_cfg, Q, U, mode="exact", M=12):
    """Ground energy of the occupation-Q block.

    mode='decoupled': sum of per-piece q-body ground energies (no cross-piece
    interaction).  mode='exact': lowest eigenvalue of the full block
    Hamiltonian including cross-piece terms.
    """
    intervals = _as_intervals(intervals_or_cfg)
    if mode == "decoupled":
        total = 0.0
        for (a, l), q in zip(intervals, Q):
            if q == 0:
                continue
            if q == 1:
                total += np.pi ** 2 / l ** 2
            else:
                w, _ = solve_piece_qbody(U, l, q, M=max(M, q + 2), n_states=1)
                total += w[0]
        return total
    if mode != "exact":
        raise ValueError("mode must be 'decoupled' or 'exact'")
    w, _ = solve_block(intervals, Q, U, M=M, n_states=1)
    return float(w[0])


def _as_intervals(obj):
    if hasattr(obj, "lefts") and hasattr(obj, "lengths"):
        return list(zip(obj.lefts, obj.lengths))
    return [(float(a), float(l)) for a, l in obj]


def block_overlap(intervals_or_cfg, state_a, U, state_b, M=None):
    """<Psi_a, W Psi_b> with W = sum_{i<j} U(x_i - x_j), by Slater-Condon
    over the quadrature g integrals (kinetic part excluded).

    The states may belong to different occupation blocks of the same
    configuration; cross-occupation values vanish (each contributing
    integral has a pointwise-zero integrand), which this computes rather
    than assumes.
    """
    intervals = _as_intervals(intervals_or_cfg)
    if state_a.n != state_b.n:
        raise ValueError("particle numbers differ")
    M = M or max(state_a.basis.M, state_b.basis.M)
    g = TwoElectronIntegrals(intervals, U, M)
    lengths = np.array([l for _, l in intervals])
    total = 0.0
    for i, D1 in enumerate(state_a.basis.determinants):
        ci = state_a.coeffs[i]
        if ci == 0.0:
            continue
        for j, D2 in enumerate(state_b.basis.determinants):
            cj = state_b.coeffs[j]
            if cj == 0.0:
                continue
            elem = _slater_condon(D1, D2, g, lengths)
            if D1 == D2:
                elem -= sum(np.pi ** 2 * k ** 2 / lengths[p] ** 2 for (p, k) in D1)
            total += ci * cj * elem
    return total


def exact_ground_state_small(intervals_or_cfg, n, U, M=10, cap=None):
    """Exact ground state over all occupations, for n <= 4, few pieces.

    Enumerates occupation blocks (pruned by the free-filling lower bound),
    solves each exactly, and returns (energy, Q, CIState, gap) with the gap
    to the winning block's second level.  Ties at 1e-10 go to the
    lexicographically smallest occupation.
    """
    intervals = _as_intervals(intervals_or_cfg)
    if n > 4:
        raise ValueError("exact solver limited to n <= 4")
    if len(intervals) > 8:
        raise ValueError("too many pieces; prune first")
    lengths = np.array([l for _, l in intervals])
    best = None
    for Q in enumerate_occupations(len(intervals), n, cap=cap or min(n, 3)):
        if best is not None and free_filling_bound(lengths, Q) > best[0] + 1e-12:
            continue
        w, states = solve_block(intervals, Q, U, M=M, n_states=2)
        gap = float(w[1] - w[0]) if len(w) > 1 else np.inf
        cand = (float(w[0]), Q, states[0], gap)
        if best is None or cand[0] < best[0] - 1e-10:
            best = cand
        elif abs(cand[0] - best[0]) <= 1e-10 and Q < best[1]:
            best = cand
    return best
