"""Polarisation-key encryption of boson sampling inputs.

Logical mode ``j`` is carried by the physical mode pair ``(2j, 2j + 1)`` =
``(H_j, V_j)``. A logical 1 is a photon in ``H_j``, a logical 0 a photon in
``V_j``, so every encoded state holds exactly ``m`` photons. Alice rotates
every photon's polarisation by ``k pi / d``; Bob runs his network on both
polarisations alike; Alice undoes the rotation and counts only H photons.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError
from .fock import (
    DEFAULT_MAX_CONFIGS,
    FockSuperposition,
    OutputDistribution,
    check_unitary,
    output_distribution,
)


@dataclass(frozen=True)
class PolarizationKey:
    k: int
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError(f"division count must be >= 1, got {self.d}")
        if not 0 <= self.k < self.d:
            raise ValidationError(f"key index {self.k} outside 0..{self.d - 1}")

    @property
    def angle(self) -> float:
        return self.k * np.pi / self.d


def as_bits(bits) -> tuple[int, ...]:
    """Logical input as a tuple of 0/1; accepts ``"011"`` or any int sequence."""
    if isinstance(bits, str):
        bits = bits.strip()
        if not bits or set(bits) - {"0", "1"}:
            raise ValidationError(f"logical input must be a non-empty 0/1 string, got {bits!r}")
        return tuple(int(b) for b in bits)
    out = tuple(int(b) for b in bits)
    if not out or any(b not in (0, 1) for b in out):
        raise ValidationError(f"logical input must be non-empty 0/1 values, got {out}")
    return out


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def polarization_layer(theta: float, m: int) -> np.ndarray:
    """``R(theta)`` on every (H_j, V_j) pair of a 2m-mode layout."""
    return np.kron(np.eye(m), rotation_matrix(theta)).astype(complex)


def lift_network(U) -> np.ndarray:
    """Polarisation-blind version of an m-mode network on the 2m-mode layout."""
    U = check_unitary(U)
    return np.kron(U, np.eye(2))


def encode_input(bits) -> FockSuperposition:
    bits = as_bits(bits)
    occ = []
    for b in bits:
        occ.extend((1, 0) if b else (0, 1))
    return FockSuperposition.basis_state(occ)


def keygen(d: int, rng) -> PolarizationKey:
    if d < 1:
        raise ValidationError(f"division count must be >= 1, got {d}")
    return PolarizationKey(int(rng.integers(d)), d)


def _check_state(state: FockSuperposition) -> int:
    if state.n_modes % 2 or state.n_photons * 2 != state.n_modes:
        raise DimensionError(
            f"expected m photons in 2m modes, got {state.n_photons} photons in {state.n_modes} modes")
    return state.n_photons


def encrypt(state: FockSuperposition, key: PolarizationKey) -> FockSuperposition:
    m = _check_state(state)
    return state.evolve(polarization_layer(key.angle, m))


def bob_evaluate(state: FockSuperposition, U) -> FockSuperposition:
    """Bob's whole role: run his network on whatever he received."""
    m = _check_state(state)
    U = np.asarray(U, dtype=complex)
    if U.shape != (m, m):
        raise DimensionError(f"network acts on {U.shape[0]} modes, state encodes {m}")
    return state.evolve(lift_network(U))


def measure_h_pattern(state: FockSuperposition, theta: float) -> OutputDistribution:
    """Rotate back by ``theta``, then keep only the H-mode occupations.

    Passing the wrong angle is allowed on purpose: it is what an attacker, or
    Alice with a mismatched key, would observe.
    """
    m = _check_state(state)
    rotated = state.evolve(polarization_layer(-theta, m))
    h_occ = rotated.basis[:, 0::2]
    patterns, inverse = np.unique(h_occ, axis=0, return_inverse=True)
    probs = np.zeros(len(patterns))
    np.add.at(probs, inverse.ravel(), rotated.probabilities())
    return OutputDistribution(patterns, probs)


def decrypt_measure(state: FockSuperposition, key: PolarizationKey) -> OutputDistribution:
    return measure_h_pattern(state, key.angle)


def plain_distribution(U, bits, max_configs: int = DEFAULT_MAX_CONFIGS) -> OutputDistribution:
    """Unencrypted boson sampling of the logical input."""
    return output_distribution(U, as_bits(bits), max_configs)


def decrypted_distribution(bits, key: PolarizationKey, U) -> OutputDistribution:
    returned = bob_evaluate(encrypt(encode_input(bits), key), U)
    return decrypt_measure(returned, key)


def verify_decryption(bits, d: int, U) -> float:
    """Worst total-variation distance from plain boson sampling over all keys."""
    plain = plain_distribution(U, bits)
    return max(decrypted_distribution(bits, PolarizationKey(k, d), U).total_variation(plain)
               for k in range(d))


def ensemble_density_matrix(bits, d: int) -> np.ndarray:
    """What Bob holds before evaluation: the key-averaged encrypted state."""
    base = encode_input(bits)
    vecs = np.array([encrypt(base, PolarizationKey(k, d)).amplitudes for k in range(d)])
    return vecs.T @ vecs.conj() / d


@dataclass
class Transcript:
    alice_in: tuple
    d: int
    key: int
    messages: list = field(default_factory=list)
    result: tuple | None = None

    def to_json(self, redact_key: bool = False) -> dict:
        out = {"alice_in": list(self.alice_in), "d": self.d}
        if not redact_key:
            out["key"] = self.key
        out["messages"] = self.messages
        out["result"] = None if self.result is None else list(self.result)
        return out

    def dumps(self, redact_key: bool = False) -> str:
        return json.dumps(self.to_json(redact_key), sort_keys=True)


def run_round(bits, d: int, U, rng) -> tuple[tuple[int, ...], Transcript]:
    """One protocol round: a single state to Bob, a single state back."""
    bits = as_bits(bits)
    key = keygen(d, rng)
    sent = encrypt(encode_input(bits), key)
    transcript = Transcript(bits, d, key.k)
    transcript.messages.append({"from": "alice", "to": "bob", "state": sent.to_json(atol=1e-15)})

    returned = bob_evaluate(sent, U)
    transcript.messages.append({"from": "bob", "to": "alice", "state": returned.to_json(atol=1e-15)})

    pattern = decrypt_measure(returned, key).sample(rng)
    transcript.result = pattern
    return pattern, transcript
