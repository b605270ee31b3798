"""Poisson-cut configurations of [0, L] and piece-counting statistics.

A configuration is the interval [0, L] cut at the points of a Poisson process
of intensity mu.  The maximal open sub-intervals between consecutive cut
points are the "pieces"; everything downstream (spectra, ground states) is a
function of the sorted piece lengths.
"""

import numpy as np

from ._accel import maybe_njit

__all__ = [
    "PieceConfiguration",
    "sample_pieces",
    "sample_pieces_conditioned",
    "count_pieces_in_range",
    "count_pair_clusters",
    "count_neighbor_pairs",
    "count_triplets",
    "max_piece_length",
]


class PieceConfiguration:
    """Immutable Poisson-cut configuration of [0, L].

    Attributes:
        L: total length (rescaled units).
        mu: cut intensity (cuts per unit length).
        seed: seed used to generate the cuts (None for hand-built configs).
        cut_points: strictly increasing array of interior cut positions.
        lefts, rights, lengths: piece endpoints and lengths, left to right.
    """

    def __init__(self, L, mu, cut_points, seed=None):
        if L <= 0:
            raise ValueError("L must be positive")
        if mu <= 0:
            raise ValueError("mu must be positive")
        cut_points = np.asarray(cut_points, dtype=np.float64)
        if cut_points.size and (np.any(np.diff(cut_points) <= 0)
                                or cut_points[0] <= 0 or cut_points[-1] >= L):
            raise ValueError("cut points must be strictly increasing in (0, L)")
        self.L = float(L)
        self.mu = float(mu)
        self.seed = seed
        self.cut_points = cut_points
        edges = np.concatenate(([0.0], cut_points, [L]))
        self.lefts = edges[:-1]
        self.rights = edges[1:]
        self.lengths = self.rights - self.lefts
        self.lefts.flags.writeable = False
        self.rights.flags.writeable = False
        self.lengths.flags.writeable = False
        self.cut_points.flags.writeable = False

    @property
    def n_pieces(self):
        return len(self.lengths)

    def pieces(self):
        """List of (left, right, length) triples, left to right."""
        return list(zip(self.lefts, self.rights, self.lengths))

    def __repr__(self):
        return (f"PieceConfiguration(L={self.L}, mu={self.mu}, "
                f"pieces={self.n_pieces}, seed={self.seed})")


def from_lengths(lengths, mu=1.0):
    """Build a configuration directly from a list of piece lengths."""
    lengths = np.asarray(lengths, dtype=np.float64)
    cuts = np.cumsum(lengths)[:-1]
    return PieceConfiguration(float(lengths.sum()), mu, cuts)


def _rng(seed):
    # Counter-based generator: cheap to seed, streams are independent per
    # seed, and output is reproducible bit-for-bit across runs/platforms.
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def sample_pieces(seed, L, mu):
    """Cut [0, L] at a Poisson(mu) process; return the configuration.

    Cut positions are generated by inversion: cumulative sums of
    exponential(mu) gaps, truncated at L.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    if mu <= 0:
        raise ValueError("mu must be positive")
    rng = _rng(seed)
    pts = []
    pos = 0.0
    # draw gaps in blocks; expected count is mu*L
    block = max(64, int(1.2 * mu * L) + 16)
    while True:
        gaps = rng.exponential(1.0 / mu, size=block)
        cum = pos + np.cumsum(gaps)
        inside = cum[cum < L]
        pts.append(inside)
        if inside.size < block:
            break
        pos = cum[-1]
        block = max(64, block // 4)
    cuts = np.concatenate(pts) if pts else np.empty(0)
    return PieceConfiguration(L, mu, cuts, seed=seed)


def sample_pieces_conditioned(seed, L, m):
    """Configuration of [0, L] conditioned on having exactly m pieces.

    Conditioned on m-1 interior cuts, the length vector has the law of
    (L*eta_1/S, ..., L*eta_m/S) with eta_i i.i.d. exponential(1) and
    S = sum eta_i; equivalently the cuts are m-1 i.i.d. uniform order
    statistics.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if L <= 0:
        raise ValueError("L must be positive")
    rng = _rng(seed)
    eta = rng.exponential(1.0, size=m)
    lengths = L * eta / eta.sum()
    cuts = np.cumsum(lengths)[:-1]
    return PieceConfiguration(L, 1.0, cuts, seed=seed)


def count_pieces_in_range(cfg, a, b):
    """Number of pieces with length in [a, a+b]."""
    if a < 0 or b < 0:
        raise ValueError("window parameters must be non-negative")
    x = cfg.lengths
    return int(np.count_nonzero((x >= a) & (x <= a + b)))


@maybe_njit
def _pair_cluster_scan(lengths, a, b, c, d, g, f):
    count = 0
    m = lengths.shape[0]
    for i in range(m):
        li = lengths[i]
        if li < a or li > a + b:
            continue
        gap = 0.0
        for j in range(i + 2, m):
            gap += lengths[j - 1]
            if gap > g + f:
                break
            lj = lengths[j]
            if gap >= g and c <= lj <= c + d:
                count += 1
    return count


def count_pair_clusters(cfg, a, b, c, d, g, f):
    """Pairs of pieces with left length in [a,a+b], right length in [c,c+d],
    and distance (total length of pieces strictly in between) in [g, g+f].

    Only non-adjacent pairs qualify: the distance of an adjacent pair is an
    atom at zero while the counted law is atomless in the gap variable.
    Ordered pairs, each counted once; O(m * window) sliding scan.
    """
    if min(a, b, c, d, g, f) < 0:
        raise ValueError("parameters must be non-negative")
    if a <= 0 or c <= 0:
        raise ValueError("length thresholds a, c must be positive")
    return int(_pair_cluster_scan(cfg.lengths, a, b, c, d, g, f))


@maybe_njit
def _neighbor_pair_scan(lengths, ell, ellp, d):
    count = 0
    m = lengths.shape[0]
    for i in range(m):
        if lengths[i] < ell:
            continue
        gap = 0.0
        for j in range(i + 2, m):
            gap += lengths[j - 1]
            if gap > d:
                break
            if lengths[j] >= ellp:
                count += 1
    return count


def count_neighbor_pairs(cfg, ell, ell_prime, d):
    """Non-adjacent pairs of pieces at distance <= d with lengths >= ell
    (left) and >= ell_prime (right)."""
    if ell <= 0 or ell_prime <= 0 or d < 0:
        raise ValueError("thresholds must be positive, d non-negative")
    return int(_neighbor_pair_scan(cfg.lengths, ell, ell_prime, d))


@maybe_njit
def _triplet_scan(lengths, ell, ellp, ellpp, d):
    count = 0
    m = lengths.shape[0]
    for i in range(m):
        if lengths[i] < ell:
            continue
        gap1 = 0.0
        for j in range(i + 2, m):
            gap1 += lengths[j - 1]
            if gap1 > d:
                break
            if lengths[j] >= ellp:
                gap2 = 0.0
                for k in range(j + 2, m):
                    gap2 += lengths[k - 1]
                    if gap2 > d:
                        break
                    if lengths[k] >= ellpp:
                        count += 1
    return count


def count_triplets(cfg, ell, ell_prime, ell_second, d):
    """Triplets of pieces, consecutive distances <= d, lengths >= the three
    thresholds (left to right)."""
    if min(ell, ell_prime, ell_second) <= 0 or d < 0:
        raise ValueError("thresholds must be positive, d non-negative")
    return int(_triplet_scan(cfg.lengths, ell, ell_prime, ell_second, d))


def max_piece_length(cfg):
    if cfg.n_pieces == 0:
        raise ValueError("empty configuration")
    return float(cfg.lengths.max())
