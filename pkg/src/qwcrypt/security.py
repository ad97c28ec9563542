"""Information-theoretic and attack analysis of the rotation-key scheme.

All entropies are in bits. Density matrices here live on the m-qubit
polarisation space (one qubit per photon, H = |0>, V = |1> in the
computational ordering used by ``np.kron``).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ResourceError, ValidationError
from .protocol import as_bits, rotation_matrix

MAX_BRUTEFORCE_QUBITS = 12
EIGEN_CLAMP = 1e-14
NEGATIVE_EIGEN_TOL = 1e-10

_H = np.array([1.0, 0.0])
_V = np.array([0.0, 1.0])


def _require_m(m: int):
    if m < 1:
        raise ValidationError(f"need at least one photon, got m={m}")


def _require_d(d: int):
    if d < 1:
        raise ValidationError(f"division count must be >= 1, got {d}")


def polarization_pattern(i: int, m: int) -> list[int]:
    """Bit ``j`` of ``i`` (least significant first); 0 means H, 1 means V."""
    return [(i >> j) & 1 for j in range(m)]


def rho_i_bruteforce(i: int, m: int, d: int) -> np.ndarray:
    """Key-averaged density matrix of the product state indexed by ``i``.

    Built directly on the full ``2^m``-dimensional space by averaging the
    ``d`` rotated projectors.
    """
    _require_m(m)
    _require_d(d)
    if m > MAX_BRUTEFORCE_QUBITS:
        raise ResourceError(f"m={m} exceeds the brute-force cap of {MAX_BRUTEFORCE_QUBITS} photons")
    if not 0 <= i < 2 ** m:
        raise ValidationError(f"index {i} out of range for m={m}")
    pattern = polarization_pattern(i, m)
    vecs = np.empty((d, 2 ** m))
    for k in range(d):
        R = rotation_matrix(k * np.pi / d)
        v = np.ones(1)
        for bit in pattern:
            v = np.kron(v, R @ (_V if bit else _H))
        vecs[k] = v
    return vecs.T @ vecs / d


def rho0_symmetric(m: int, d: int) -> np.ndarray:
    """All-H ensemble in the symmetric basis |l>_m, l = 0..m.

    Uses the circular basis |0> = (H + iV)/sqrt2, |1> = (H - iV)/sqrt2, in
    which R(theta) is diag(e^{-i theta}, e^{i theta}). The element (a, b)
    therefore picks up the phase e^{2i(a-b)theta}.
    """
    _require_m(m)
    _require_d(d)
    ell = np.arange(m + 1)
    weights = np.sqrt(np.array([math.comb(m, a) for a in ell], dtype=float) / 2.0 ** m)
    diff = ell[:, None] - ell[None, :]
    k = np.arange(d)
    phases = np.exp(2j * np.pi * diff[..., None] * k / d).mean(axis=-1)
    return np.outer(weights, weights) * phases


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits; eigenvalues below 1e-14 count as zero."""
    rho = np.asarray(rho)
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if evals.min() < -NEGATIVE_EIGEN_TOL:
        raise NumericalError(f"density matrix has eigenvalue {evals.min():.3e}")
    evals = evals[evals > EIGEN_CLAMP]
    return float(-np.sum(evals * np.log2(evals)))


def holevo_exact(m: int, d: int, max_m: int = 10, check: bool = True) -> float:
    """Holevo quantity of the encrypted ensemble, from brute-force matrices.

    The average state is maximally mixed, so its entropy is ``m`` bits, and
    every member has the same entropy, so only ``rho_0`` is diagonalised.
    With ``check`` both facts are re-verified numerically (the average state
    in full for m <= 5, member entropies by spot check otherwise).
    """
    _require_m(m)
    _require_d(d)
    if m > max_m:
        raise ResourceError(f"exact Holevo computation capped at m={max_m}, got m={m}")
    s0 = von_neumann_entropy(rho_i_bruteforce(0, m, d))
    if check:
        if m <= 5:
            avg = sum(rho_i_bruteforce(i, m, d) for i in range(2 ** m)) / 2 ** m
            if np.max(np.abs(avg - np.eye(2 ** m) / 2 ** m)) > 1e-10:
                raise NumericalError("average ensemble state is not maximally mixed")
        for i in {2 ** m - 1, (2 ** m - 1) // 3}:
            if abs(von_neumann_entropy(rho_i_bruteforce(i, m, d)) - s0) > 1e-8:
                raise NumericalError(f"member entropy for i={i} differs from i=0")
    return m - s0


def binomial_entropy(m: int) -> float:
    _require_m(m)
    log_p = np.array([math.lgamma(m + 1) - math.lgamma(a + 1) - math.lgamma(m - a + 1)
                      for a in range(m + 1)]) - m * math.log(2)
    return float(-np.sum(np.exp(log_p) * log_p) / math.log(2))


def binomial_entropy_asymptotic(m: float) -> float:
    return 0.5 * math.log2(0.5 * math.pi * math.e * m)


def holevo_asymptotic(m: float) -> float:
    """Large-m form ``m - log2(pi e m / 2) / 2``; not accurate for small m."""
    if m <= 0:
        raise ValidationError("m must be positive")
    return m - binomial_entropy_asymptotic(m)


def max_eigenvalue_rho(m: int) -> float:
    """Largest eigenvalue of the large-d ensemble member, C(m, m//2) / 2^m."""
    _require_m(m)
    return math.comb(m, m // 2) / 2 ** m


def max_eigenvalue_asymptotic(m: float) -> float:
    return math.sqrt(2 / (math.pi * m))


def guess_probability_bound(m: float) -> float:
    """Upper bound sqrt(8 / (pi m)) on Bob's guessing probability.

    Exceeds 1 (and says nothing) for m < 8/pi.
    """
    if m <= 0:
        raise ValidationError("m must be positive")
    return math.sqrt(8 / (math.pi * m))


def grid_angles(d: int) -> np.ndarray:
    _require_d(d)
    return np.arange(d) * np.pi / d


def p_av(m: int, d: int) -> float:
    _require_m(m)
    return float(np.mean(np.cos(grid_angles(d)) ** (2 * m)))


def p_av_limit_d(m: int) -> float:
    """d -> infinity limit Gamma(m + 1/2) / (sqrt(pi) m!), via log-gamma."""
    _require_m(m)
    return math.exp(math.lgamma(m + 0.5) - math.lgamma(m + 1) - 0.5 * math.log(math.pi))


def average_overlap(h: int, m: int, d: int) -> float:
    """Key-averaged squared overlap of two encodings at Hamming distance ``h``."""
    _require_m(m)
    if not 0 <= h <= m:
        raise ValidationError(f"Hamming distance {h} outside 0..{m}")
    theta = grid_angles(d)
    return float(np.mean(np.sin(theta) ** (2 * h) * np.cos(theta) ** (2 * (m - h))))


def overlap_grid(m_max: int, d: int, log2: bool = False) -> list[tuple[int, int, float]]:
    """Rows ``(m, h, log overlap)`` for 1 <= m <= m_max, 0 <= h <= m.

    An exactly-zero overlap gives ``-inf``.
    """
    if not 1 <= m_max <= 64:
        raise ValidationError(f"m_max must be in 1..64, got {m_max}")
    log = np.log2 if log2 else np.log
    rows = []
    with np.errstate(divide="ignore"):
        for m in range(1, m_max + 1):
            for h in range(m + 1):
                rows.append((m, h, float(log(average_overlap(h, m, d)))))
    return rows


@dataclass
class RegionCell:
    d: int
    m: int
    p_av: float
    epsilon: float | None  # tightest threshold with p_av < epsilon


def confidence_regions(d_range, m_range, epsilons) -> list[RegionCell]:
    """Classify each (d, m) by the smallest epsilon with p_av < epsilon."""
    d_range, m_range = list(d_range), list(m_range)
    epsilons = sorted(float(e) for e in epsilons)
    if not d_range or not m_range or not epsilons:
        raise ValidationError("d range, m range and epsilon list must be non-empty")
    if any(not 0 < e < 1 for e in epsilons):
        raise ValidationError(f"epsilons must lie in (0, 1), got {epsilons}")
    cells = []
    for d in d_range:
        for m in m_range:
            p = p_av(m, d)
            eps = next((e for e in epsilons if p < e), None)
            cells.append(RegionCell(d, m, p, eps))
    return cells


@dataclass
class AttackResult:
    m: int
    d: int
    trials: int
    exact_hits: int
    complement_hits: int

    @property
    def exact_rate(self) -> float:
        return self.exact_hits / self.trials

    @property
    def complement_rate(self) -> float:
        """Rate at which Bob's string equals the input or its complement."""
        return self.complement_hits / self.trials

    @staticmethod
    def _se(rate: float, n: int) -> float:
        return math.sqrt(rate * (1 - rate) / n)

    @property
    def exact_se(self) -> float:
        return self._se(self.exact_rate, self.trials)

    @property
    def complement_se(self) -> float:
        return self._se(self.complement_rate, self.trials)


ATTACK_SHARD = 1 << 17


def _attack_shard(bits: np.ndarray, d: int, n: int, seed_seq) -> tuple[int, int]:
    rng = np.random.default_rng(seed_seq)
    m = len(bits)
    k = rng.integers(d, size=n)
    j = rng.integers(d, size=n)
    # photon prepared in R(k pi/d)|P>, measured in the R(j pi/d) basis:
    # P(reads P) = |<P|R(-j pi/d) R(k pi/d)|P>|^2 = R((k-j) pi/d)[0, 0]^2
    keep = rotation_matrix((k - j) * np.pi / d)[0, 0] ** 2
    flipped = rng.random((n, m)) >= keep[:, None]
    read = bits[None, :] ^ flipped
    exact = np.all(read == bits, axis=1)
    comp = exact | np.all(read != bits, axis=1)
    return int(exact.sum()), int(comp.sum())


def random_attack_mc(m: int, d: int, bits, trials: int, rng=None, seed=None, threads: int = 1) -> AttackResult:
    """Monte Carlo of Bob guessing with a uniformly random basis from the grid.

    Trials are split into fixed-size shards with seeds spawned from one
    SeedSequence, so the result does not depend on ``threads``.
    """
    _require_m(m)
    _require_d(d)
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    bits = np.array(as_bits(bits), dtype=bool)
    if len(bits) != m:
        raise ValidationError(f"input has {len(bits)} bits, expected {m}")
    if seed is None:
        seed = rng.integers(2 ** 63) if rng is not None else None
    sizes = [ATTACK_SHARD] * (trials // ATTACK_SHARD)
    if trials % ATTACK_SHARD:
        sizes.append(trials % ATTACK_SHARD)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(bits, d, n, s) for n, s in zip(sizes, seqs)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            counts = list(pool.map(lambda a: _attack_shard(*a), jobs))
    else:
        counts = [_attack_shard(*a) for a in jobs]
    return AttackResult(m, d, trials, sum(c[0] for c in counts), sum(c[1] for c in counts))
