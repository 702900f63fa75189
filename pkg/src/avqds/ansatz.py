"""Ordered Pauli-rotation ansatz and its packing into disjoint-support layers.

The ansatz state is ``U_{N-1}···U_1 U_0 |ref>`` with ``U_k = exp(-i·angle_k·
generator_k)``; generator index order is circuit time order. Layering is
as-soon-as-possible: a unitary lands in the earliest layer after every
earlier-indexed unitary that shares a qubit with it, so the layer assignment
of a prefix of the ansatz never depends on what comes later.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliString
from .statevector import StateVector, _pauli_rows, _rotation_rows


@dataclass(frozen=True, eq=False)
class Ansatz:
    reference: StateVector
    generators: tuple[PauliString, ...] = ()
    angles: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", tuple(self.generators))
        angles = np.array(self.angles, dtype=float)
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        if len(self.generators) != angles.shape[0]:
            raise ValueError("generator and angle counts differ")
        for g in self.generators:
            if g.n_qubits != self.reference.n_qubits:
                raise ValueError("generator qubit count differs from reference state")

    @property
    def n_qubits(self) -> int:
        return self.reference.n_qubits

    @property
    def n_params(self) -> int:
        return len(self.generators)

    def with_angles(self, angles: np.ndarray) -> "Ansatz":
        return Ansatz(self.reference, self.generators, angles)

    def extended(self, new_generators) -> "Ansatz":
        """Append generators with angle 0; the prepared state is unchanged."""
        new_generators = tuple(new_generators)
        angles = np.concatenate([self.angles, np.zeros(len(new_generators))])
        return Ansatz(self.reference, self.generators + new_generators, angles)


def prepare_state(a: Ansatz) -> StateVector:
    """Apply the rotations in index order to the reference state."""
    amps = a.reference.amplitudes
    for p, theta in zip(a.generators, a.angles):
        amps = _rotation_rows(p, theta, amps)
    return StateVector(a.n_qubits, amps)


def tangent_states(a: Ansatz) -> np.ndarray:
    """All derivative states d|psi>/d(angle_k), one per row, each unit norm.

    Row k is built as soon as rotation k has been applied in the forward
    pass, and later rotations are applied to all finished rows in one block
    operation each, so the sweep costs O(n_params) rotations per state.
    """
    n = a.n_params
    rows = np.empty((n, 1 << a.n_qubits), dtype=np.complex128)
    phi = a.reference.amplitudes
    for k, (p, theta) in enumerate(zip(a.generators, a.angles)):
        if k:
            rows[:k] = _rotation_rows(p, theta, rows[:k])
        phi = _rotation_rows(p, theta, phi)
        rows[k] = -1j * _pauli_rows(p, phi)
    return rows


def cnot_cost(p: PauliString) -> int:
    """Staircase-decomposition two-qubit gate count: 2(weight-1), 0 for weight<2."""
    w = p.weight
    return 2 * (w - 1) if w >= 2 else 0


@dataclass(frozen=True)
class CircuitLayout:
    """ASAP layer assignment of an ordered set of unitaries."""

    n_qubits: int
    layers: tuple[tuple[int, ...], ...]
    layer_masks: tuple[int, ...]
    layer_of: tuple[int, ...]
    cnot_count: int

    @property
    def depth(self) -> int:
        return len(self.layers)

    def prefix_depth(self, last_index: int) -> int:
        """Depth of the circuit truncated after unitary ``last_index``.

        Valid because ASAP placement of a prefix equals the prefix of the
        full placement.
        """
        if not 0 <= last_index < len(self.layer_of):
            raise IndexError(f"unitary index {last_index} out of range")
        return max(self.layer_of[: last_index + 1]) + 1

    def idle_qubits_in_last_layer(self) -> int:
        """Bit mask of qubits untouched by the final layer (0 if no layers)."""
        if not self.layers:
            return 0
        full = (1 << self.n_qubits) - 1
        return full & ~self.layer_masks[-1]


def layout(generators, n_qubits: int) -> CircuitLayout:
    """Pack generators into disjoint-support layers by the ASAP rule."""
    next_free = [0] * n_qubits
    layers: list[list[int]] = []
    masks: list[int] = []
    layer_of: list[int] = []
    cnots = 0
    for idx, g in enumerate(generators):
        support = g.support
        level = max((next_free[q] for q in support), default=0)
        if level == len(layers):
            layers.append([])
            masks.append(0)
        layers[level].append(idx)
        masks[level] |= g.support_mask
        layer_of.append(level)
        for q in support:
            next_free[q] = level + 1
        cnots += cnot_cost(g)
    return CircuitLayout(
        n_qubits=n_qubits,
        layers=tuple(tuple(l) for l in layers),
        layer_masks=tuple(masks),
        layer_of=tuple(layer_of),
        cnot_count=cnots,
    )


def ansatz_layout(a: Ansatz) -> CircuitLayout:
    return layout(a.generators, a.n_qubits)
