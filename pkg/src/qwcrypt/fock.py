"""Exact simulation of non-interacting photons in linear-optical networks.

Convention: a unitary ``U`` sends a photon entering mode ``j`` to output mode
``i`` with amplitude ``U[i, j]`` (column-vector action, so that a single
photon's state evolves as ``psi_out = U @ psi_in``). The amplitude for input
configuration ``s`` to produce output configuration ``t`` is

    per(U[rows(t), cols(s)]) / sqrt(prod(s!) * prod(t!))

where ``rows(t)`` repeats output mode ``i`` ``t_i`` times and ``cols(s)``
repeats input mode ``j`` ``s_j`` times.

Fock bases are enumerated in ascending lexicographic order of occupation
vectors, e.g. ``(0, 2), (1, 1), (2, 0)`` for two photons in two modes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ConservationError, DimensionError, ResourceError, ValidationError

DEFAULT_MAX_CONFIGS = 2_000_000
UNITARY_TOL = 1e-10
# largest basis for which evolve() builds and caches the full transfer matrix
TRANSFER_CACHE_LIMIT = 4096

_BLOCK_ELEMENTS = 1 << 22


# ---------------------------------------------------------------------------
# Fock states


@dataclass(frozen=True)
class FockState:
    """Occupation-number basis state over ``len(occupations)`` modes."""

    occupations: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupations)
        if any(n < 0 for n in occ):
            raise ValidationError(f"negative occupation in {occ}")
        object.__setattr__(self, "occupations", occ)

    @classmethod
    def parse(cls, text: str) -> "FockState":
        """Parse ``"0110"`` (one digit per mode) or ``"0,1,12,0"``."""
        text = text.strip()
        if not text:
            raise ValidationError("empty Fock state")
        parts = text.split(",") if "," in text else list(text)
        try:
            return cls(tuple(int(p) for p in parts))
        except ValueError as exc:
            raise ValidationError(f"cannot parse Fock state {text!r}") from exc

    @property
    def n_modes(self) -> int:
        return len(self.occupations)

    @property
    def total_photons(self) -> int:
        return sum(self.occupations)

    def label(self) -> str:
        return format_occupations(self.occupations)

    def to_json(self) -> list[int]:
        return list(self.occupations)

    def __iter__(self):
        return iter(self.occupations)

    def __len__(self):
        return len(self.occupations)


def format_occupations(occ: Iterable[int]) -> str:
    occ = [int(n) for n in occ]
    if all(n < 10 for n in occ):
        return "".join(str(n) for n in occ)
    return ",".join(str(n) for n in occ)


def as_occupations(state, n_modes: int | None = None) -> tuple[int, ...]:
    if isinstance(state, FockState):
        occ = state.occupations
    elif isinstance(state, str):
        occ = FockState.parse(state).occupations
    else:
        occ = FockState(tuple(state)).occupations
    if n_modes is not None and len(occ) != n_modes:
        raise DimensionError(f"state {occ} has {len(occ)} modes, expected {n_modes}")
    return occ


def count_configs(n_modes: int, n_photons: int) -> int:
    """Number of ways to place ``n_photons`` bosons in ``n_modes`` modes."""
    if n_modes == 0:
        return 1 if n_photons == 0 else 0
    return math.comb(n_modes + n_photons - 1, n_photons)


def check_cap(n_modes: int, n_photons: int, max_configs: int = DEFAULT_MAX_CONFIGS) -> int:
    n = count_configs(n_modes, n_photons)
    if n > max_configs:
        raise ResourceError(
            f"{n_photons} photons in {n_modes} modes gives {n} configurations, "
            f"above the cap max_configs={max_configs}"
        )
    return n


@functools.lru_cache(maxsize=32)
def _basis(n_modes: int, n_photons: int) -> tuple[np.ndarray, np.ndarray]:
    combos = list(combinations_with_replacement(range(n_modes), n_photons))
    combos.reverse()  # descending mode lists <=> ascending occupation vectors
    mode_lists = np.array(combos, dtype=np.intp).reshape(len(combos), n_photons)
    occ = np.zeros((len(combos), n_modes), dtype=np.int64)
    rows = np.repeat(np.arange(len(combos)), n_photons)
    np.add.at(occ, (rows, mode_lists.ravel()), 1)
    occ.setflags(write=False)
    mode_lists.setflags(write=False)
    return occ, mode_lists


def fock_basis(n_modes: int, n_photons: int, max_configs: int = DEFAULT_MAX_CONFIGS) -> np.ndarray:
    """All occupation vectors with ``n_photons`` total, ascending lexicographic.

    Returns a read-only ``(N, n_modes)`` integer array.
    """
    check_cap(n_modes, n_photons, max_configs)
    return _basis(n_modes, n_photons)[0]


def _mode_lists(n_modes: int, n_photons: int) -> np.ndarray:
    return _basis(n_modes, n_photons)[1]


@functools.lru_cache(maxsize=32)
def _index_map(n_modes: int, n_photons: int) -> dict[tuple[int, ...], int]:
    occ = _basis(n_modes, n_photons)[0]
    return {tuple(int(x) for x in row): i for i, row in enumerate(occ)}


def basis_index(occupations: Sequence[int]) -> int:
    occ = tuple(int(n) for n in occupations)
    return _index_map(len(occ), sum(occ))[occ]


def _sqrt_factorial_products(occ: np.ndarray) -> np.ndarray:
    top = int(occ.max(initial=0))
    fact = np.array([math.factorial(k) for k in range(top + 1)], dtype=float)
    return np.sqrt(np.prod(fact[occ], axis=-1))


# ---------------------------------------------------------------------------
# Permanents


def permanent(A) -> complex:
    """Permanent of a square matrix by Ryser's formula with Gray-code updates.

    Runs in O(2^n n). The 0x0 permanent is 1.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"permanent needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n == 0:
        return 1 + 0j
    cols = [A[:, j].copy() for j in range(n)]
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    subset = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        subset ^= 1 << j
        if subset >> j & 1:
            row_sums += cols[j]
        else:
            row_sums -= cols[j]
        term = np.prod(row_sums)
        total += -term if bin(subset).count("1") & 1 else term
    return complex(total if n % 2 == 0 else -total)


@functools.lru_cache(maxsize=32)
def _ryser_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    subsets = np.arange(1, 1 << n)
    masks = ((subsets[:, None] >> np.arange(n)) & 1).astype(float)
    sizes = masks.sum(axis=1).astype(int)
    signs = np.where((n - sizes) % 2 == 0, 1.0, -1.0)
    return masks.T.copy(), signs


def permanents(mats) -> np.ndarray:
    """Batched Ryser permanents of a stack of square matrices ``(B, n, n)``."""
    mats = np.asarray(mats, dtype=complex)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise DimensionError(f"expected a (B, n, n) stack, got shape {mats.shape}")
    batch, n = mats.shape[0], mats.shape[1]
    if n == 0:
        return np.ones(batch, dtype=complex)
    masks, signs = _ryser_tables(n)
    out = np.empty(batch, dtype=complex)
    chunk = max(1, _BLOCK_ELEMENTS // (n * masks.shape[1]))
    for start in range(0, batch, chunk):
        row_sums = mats[start:start + chunk] @ masks
        out[start:start + chunk] = np.prod(row_sums, axis=1) @ signs
    return out


# ---------------------------------------------------------------------------
# Unitaries


def check_unitary(U, tol: float = UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionError(f"unitary must be square, got shape {U.shape}")
    if U.shape[0] == 0:
        raise ValidationError("empty interferometer")
    if not np.all(np.isfinite(U)):
        raise ValidationError("unitary has non-finite entries")
    err = unitarity_error(U)
    if err > tol:
        raise ValidationError(f"matrix is not unitary: max|U^dag U - I| = {err:.3e} > {tol:g}")
    return U


def unitarity_error(U) -> float:
    U = np.asarray(U, dtype=complex)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def haar_unitary(m: int, seed=None) -> np.ndarray:
    """Haar-random ``m x m`` unitary.

    QR of a complex Ginibre matrix, with the phases of R's diagonal pushed back
    into Q so the result is Haar rather than QR-biased.
    """
    if m < 1:
        raise ValidationError("haar_unitary needs at least one mode")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def beamsplitter_50_50() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def matrix_to_json(U) -> list[list[list[float]]]:
    U = np.asarray(U, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in U]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValidationError("matrix JSON must be rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


# ---------------------------------------------------------------------------
# Reck network


class Mixer(NamedTuple):
    """Two-mode element on (mode, mode + 1): [[e^{i phi} c, -s], [e^{i phi} s, c]]."""

    mode: int
    theta: float
    phi: float

    def matrix(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        e = np.exp(1j * self.phi)
        return np.array([[e * c, -s], [e * s, c]], dtype=complex)


class PhaseShift(NamedTuple):
    mode: int
    phi: float


@dataclass
class ReckNetwork:
    """Ordered element list whose left-to-right matrix product is the unitary."""

    n_modes: int
    elements: list = field(default_factory=list)

    @property
    def mixers(self) -> list[Mixer]:
        return [e for e in self.elements if isinstance(e, Mixer)]


def reck_decompose(U, tol: float = UNITARY_TOL) -> ReckNetwork:
    """Triangular decomposition into nearest-neighbour mixers and output phases.

    Rows are nulled from the bottom up by mixers acting on adjacent columns,
    leaving a diagonal of phases: ``U = D T_K ... T_1``.
    """
    U = check_unitary(U, tol)
    m = U.shape[0]
    W = U.copy()
    nulling = []
    for r in range(m - 1, 0, -1):
        for c in range(r):
            x, y = W[r, c], W[r, c + 1]
            theta = float(np.arctan2(abs(x), abs(y)))
            phi = float(np.angle(x) - np.angle(y)) if abs(x) > 0 and abs(y) > 0 else 0.0
            el = Mixer(c, theta, phi)
            W[:, c:c + 2] = W[:, c:c + 2] @ el.matrix().conj().T
            nulling.append(el)
    phases = [PhaseShift(i, float(np.angle(W[i, i]))) for i in range(m)]
    return ReckNetwork(m, phases + nulling[::-1])


def reck_recompose(net: ReckNetwork, m: int | None = None) -> np.ndarray:
    m = net.n_modes if m is None else m
    M = np.eye(m, dtype=complex)
    for el in net.elements:
        if isinstance(el, Mixer):
            if not 0 <= el.mode < m - 1:
                raise ValidationError(f"mixer on modes ({el.mode}, {el.mode + 1}) out of range for {m} modes")
            M[:, el.mode:el.mode + 2] = M[:, el.mode:el.mode + 2] @ el.matrix()
        elif isinstance(el, PhaseShift):
            if not 0 <= el.mode < m:
                raise ValidationError(f"phase shift on mode {el.mode} out of range for {m} modes")
            M[:, el.mode] *= np.exp(1j * el.phi)
        else:
            raise ValidationError(f"unknown network element {el!r}")
    return M


# ---------------------------------------------------------------------------
# Amplitudes and distributions


def _amplitude_block(U: np.ndarray, out_ml, out_occ, in_ml, in_occ) -> np.ndarray:
    """Amplitudes ``G[t, s]`` for output mode lists ``out_ml`` and inputs ``in_ml``."""
    n_out, p = out_ml.shape
    n_in = in_ml.shape[0]
    if p == 0:
        return np.ones((n_out, n_in), dtype=complex)
    G = np.empty((n_out, n_in), dtype=complex)
    norm_in = _sqrt_factorial_products(in_occ)
    norm_out = _sqrt_factorial_products(out_occ)
    rows_per_chunk = max(1, _BLOCK_ELEMENTS // max(1, n_in * p * p))
    for start in range(0, n_out, rows_per_chunk):
        stop = min(n_out, start + rows_per_chunk)
        sub = U[out_ml[start:stop, None, :, None], in_ml[None, :, None, :]]
        G[start:stop] = permanents(sub.reshape(-1, p, p)).reshape(stop - start, n_in)
    return G / np.outer(norm_out, norm_in)


def output_amplitude(U, input_state, output_state) -> complex:
    """Transition amplitude between two Fock configurations."""
    U = np.asarray(U, dtype=complex)
    m = U.shape[0]
    s = as_occupations(input_state, m)
    t = as_occupations(output_state, m)
    if sum(s) != sum(t):
        raise ConservationError(f"input has {sum(s)} photons but output has {sum(t)}")
    rows = np.repeat(np.arange(m), t)
    cols = np.repeat(np.arange(m), s)
    norm = math.sqrt(math.prod(math.factorial(n) for n in s) * math.prod(math.factorial(n) for n in t))
    return permanent(U[np.ix_(rows, cols)]) / norm


@dataclass
class OutputDistribution:
    """Probabilities (and amplitudes when coherent) over Fock configurations."""

    states: np.ndarray
    probabilities: np.ndarray
    amplitudes: np.ndarray | None = None

    @property
    def n_modes(self) -> int:
        return self.states.shape[1]

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(x) for x in s): float(p) for s, p in zip(self.states, self.probabilities)}

    def probability(self, state) -> float:
        occ = as_occupations(state, self.n_modes)
        return self.as_dict().get(occ, 0.0)

    def __getitem__(self, state) -> float:
        return self.probability(state)

    def total(self) -> float:
        return float(np.sum(self.probabilities))

    def total_variation(self, other: "OutputDistribution") -> float:
        return total_variation(self.as_dict(), other.as_dict())

    def sample(self, rng, size=None):
        """Inverse-CDF draws; returns occupation tuples."""
        cdf = np.cumsum(self.probabilities)
        u = rng.random(size) * cdf[-1]
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
        if size is None:
            return tuple(int(x) for x in self.states[idx])
        return [tuple(int(x) for x in self.states[i]) for i in np.atleast_1d(idx)]

    def rows(self) -> list[tuple[str, float]]:
        return [(format_occupations(s), float(p)) for s, p in zip(self.states, self.probabilities)]


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def output_distribution(U, input_state, max_configs: int = DEFAULT_MAX_CONFIGS) -> OutputDistribution:
    U = np.asarray(U, dtype=complex)
    m = U.shape[0]
    s = as_occupations(input_state, m)
    p = sum(s)
    out_occ = fock_basis(m, p, max_configs)
    out_ml = _mode_lists(m, p)
    in_occ = np.array([s], dtype=np.int64)
    in_ml = np.repeat(np.arange(m), s)[None, :]
    amps = _amplitude_block(U, out_ml, out_occ, in_ml, in_occ)[:, 0]
    return OutputDistribution(out_occ, np.abs(amps) ** 2, amps)


def sample_output(U, input_state, rng, size=None, max_configs: int = DEFAULT_MAX_CONFIGS):
    """Draw output configurations from the exact distribution."""
    return output_distribution(U, input_state, max_configs).sample(rng, size)


def transfer_matrix(U, n_photons: int) -> np.ndarray:
    """Full ``N x N`` amplitude matrix of ``U`` on the ``n_photons`` sector.

    Entry ``[t, s]`` is the amplitude from basis state ``s`` to ``t``. Results
    are cached by matrix contents and returned read-only.
    """
    U = np.ascontiguousarray(U, dtype=complex)
    return _transfer_cached(U.tobytes(), U.shape[0], n_photons)


@functools.lru_cache(maxsize=128)
def _transfer_cached(buf: bytes, m: int, p: int) -> np.ndarray:
    U = np.frombuffer(buf, dtype=complex).reshape(m, m)
    occ, ml = _basis(m, p)
    G = _amplitude_block(U, ml, occ, ml, occ)
    G.setflags(write=False)
    return G


@dataclass
class FockSuperposition:
    """Pure state with a fixed photon number, as a dense amplitude vector
    over ``fock_basis(n_modes, n_photons)``."""

    n_modes: int
    n_photons: int
    amplitudes: np.ndarray

    @classmethod
    def basis_state(cls, occupations, max_configs: int = DEFAULT_MAX_CONFIGS) -> "FockSuperposition":
        occ = as_occupations(occupations)
        m, p = len(occ), sum(occ)
        amps = np.zeros(check_cap(m, p, max_configs), dtype=complex)
        amps[basis_index(occ)] = 1.0
        return cls(m, p, amps)

    @property
    def basis(self) -> np.ndarray:
        return _basis(self.n_modes, self.n_photons)[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def evolve(self, U) -> "FockSuperposition":
        U = np.asarray(U, dtype=complex)
        if U.shape != (self.n_modes, self.n_modes):
            raise DimensionError(f"unitary of shape {U.shape} does not act on {self.n_modes} modes")
        if len(self.amplitudes) <= TRANSFER_CACHE_LIMIT:
            new = transfer_matrix(U, self.n_photons) @ self.amplitudes
        else:
            occ, ml = _basis(self.n_modes, self.n_photons)
            support = np.flatnonzero(self.amplitudes)
            G = _amplitude_block(U, ml, occ, ml[support], occ[support])
            new = G @ self.amplitudes[support]
        return FockSuperposition(self.n_modes, self.n_photons, new)

    def distribution(self) -> OutputDistribution:
        return OutputDistribution(self.basis, self.probabilities(), self.amplitudes.copy())

    def to_json(self, atol: float = 0.0) -> dict:
        keep = np.flatnonzero(np.abs(self.amplitudes) > atol)
        return {
            "modes": self.n_modes,
            "photons": self.n_photons,
            "components": [
                {"occupations": [int(x) for x in self.basis[i]],
                 "amplitude": [float(self.amplitudes[i].real), float(self.amplitudes[i].imag)]}
                for i in keep
            ],
        }
