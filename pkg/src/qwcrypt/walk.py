"""Multi-walker discrete-time quantum walks compiled to interferometers.

Each (vertex, coin direction) slot becomes one optical mode, numbered
lexicographically. One walk step is ``S @ C``: a block-diagonal coin followed
by the permutation that moves each slot to its target slot. Non-interacting
walkers are then just photons in the compiled network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fock import (
    DEFAULT_MAX_CONFIGS,
    OutputDistribution,
    check_unitary,
    matrix_from_json,
    matrix_to_json,
    output_distribution,
)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class WalkGraph:
    """``slots[v][c] = (target_vertex, target_direction)`` for every slot."""

    slots: tuple

    def __post_init__(self):
        slots = tuple(tuple((int(tv), int(tc)) for tv, tc in vertex) for vertex in self.slots)
        object.__setattr__(self, "slots", slots)
        if not slots:
            raise ValidationError("walk graph has no vertices")
        for v, vertex in enumerate(slots):
            if not vertex:
                raise ValidationError(f"vertex {v} has no coin directions")
        targets = set()
        for v, vertex in enumerate(slots):
            for c, (tv, tc) in enumerate(vertex):
                if not (0 <= tv < len(slots) and 0 <= tc < len(slots[tv])):
                    raise ValidationError(f"slot ({v}, {c}) points to missing slot ({tv}, {tc})")
                targets.add((tv, tc))
        if len(targets) != self.n_modes:
            raise ValidationError("step mapping is not a permutation of the slots")

    @property
    def n_vertices(self) -> int:
        return len(self.slots)

    @property
    def degrees(self) -> list[int]:
        return [len(v) for v in self.slots]

    @property
    def n_modes(self) -> int:
        return sum(len(v) for v in self.slots)

    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.degrees)[:-1]]).astype(int)

    def to_json(self) -> dict:
        return {"vertices": self.n_vertices, "slots": [[list(s) for s in v] for v in self.slots]}

    @classmethod
    def from_json(cls, data: dict) -> "WalkGraph":
        graph = cls(tuple(tuple(tuple(s) for s in v) for v in data["slots"]))
        if "vertices" in data and int(data["vertices"]) != graph.n_vertices:
            raise ValidationError("'vertices' does not match the slot table")
        return graph


def line_graph(n: int) -> WalkGraph:
    """Path on ``n`` vertices; direction 0 moves left, 1 moves right, and a
    walker hitting an end reflects into the opposite direction."""
    if n < 1:
        raise ValidationError("line graph needs at least one vertex")
    slots = []
    for v in range(n):
        left = (v - 1, 0) if v > 0 else (v, 1)
        right = (v + 1, 1) if v < n - 1 else (v, 0)
        slots.append((left, right))
    return WalkGraph(tuple(slots))


def cycle_graph(n: int) -> WalkGraph:
    if n < 1:
        raise ValidationError("cycle graph needs at least one vertex")
    return WalkGraph(tuple((((v - 1) % n, 0), ((v + 1) % n, 1)) for v in range(n)))


def mode_index(v: int, c: int, graph: WalkGraph) -> int:
    if not 0 <= v < graph.n_vertices:
        raise ValidationError(f"vertex {v} out of range")
    if not 0 <= c < graph.degrees[v]:
        raise ValidationError(f"direction {c} out of range for vertex {v} of degree {graph.degrees[v]}")
    return int(graph.offsets()[v]) + c


def slot_of_mode(mode: int, graph: WalkGraph) -> tuple[int, int]:
    if not 0 <= mode < graph.n_modes:
        raise ValidationError(f"mode {mode} out of range")
    offsets = graph.offsets()
    v = int(np.searchsorted(offsets, mode, side="right") - 1)
    return v, mode - int(offsets[v])


def step_matrix(graph: WalkGraph) -> np.ndarray:
    M = graph.n_modes
    S = np.zeros((M, M), dtype=complex)
    for v, vertex in enumerate(graph.slots):
        for c, (tv, tc) in enumerate(vertex):
            S[mode_index(tv, tc, graph), mode_index(v, c, graph)] = 1.0
    return S


@dataclass
class WalkSpec:
    graph: WalkGraph
    coins: list
    steps: int

    def __post_init__(self):
        if self.steps < 0:
            raise ValidationError("step count must be non-negative")
        if len(self.coins) != self.graph.n_vertices:
            raise ValidationError("need one coin block per vertex")
        blocks = []
        for v, (block, deg) in enumerate(zip(self.coins, self.graph.degrees)):
            block = np.asarray(block, dtype=complex)
            if block.shape != (deg, deg):
                raise ValidationError(f"coin for vertex {v} has shape {block.shape}, degree is {deg}")
            blocks.append(check_unitary(block, tol=1e-12))
        self.coins = blocks

    @classmethod
    def uniform(cls, graph: WalkGraph, coin, steps: int) -> "WalkSpec":
        """Same coin on every vertex (all vertices must share its degree)."""
        return cls(graph, [coin] * graph.n_vertices, steps)

    def coin_matrix(self) -> np.ndarray:
        M = self.graph.n_modes
        C = np.zeros((M, M), dtype=complex)
        for off, block in zip(self.graph.offsets(), self.coins):
            d = block.shape[0]
            C[off:off + d, off:off + d] = block
        return C

    def to_json(self) -> dict:
        return {"graph": self.graph.to_json(), "coins": [matrix_to_json(b) for b in self.coins], "steps": self.steps}

    @classmethod
    def from_json(cls, data: dict) -> "WalkSpec":
        return cls(WalkGraph.from_json(data["graph"]),
                   [matrix_from_json(b) for b in data["coins"]], int(data.get("steps", 0)))


def walk_unitary(spec: WalkSpec) -> np.ndarray:
    """``(S C)^t`` on the slot-mode labelling."""
    one_step = step_matrix(spec.graph) @ spec.coin_matrix()
    return np.linalg.matrix_power(one_step, spec.steps)


def walk_distribution(spec: WalkSpec, walkers, max_configs: int = DEFAULT_MAX_CONFIGS) -> OutputDistribution:
    return output_distribution(walk_unitary(spec), walkers, max_configs)


def vertex_marginal(dist: OutputDistribution, graph: WalkGraph) -> np.ndarray:
    """Expected walker number per vertex, summed over coin directions."""
    per_mode = dist.probabilities @ dist.states
    return np.add.reduceat(per_mode, graph.offsets())
