"""Product-formula evolution and the layered fixed ansatz.

Both share one grouping convention: Hamiltonian terms are packed first-fit
(in construction order) into sub-layers of pairwise-disjoint support. For
the periodic chain models built by this package that reproduces the usual
brick-wall pattern, e.g. even bonds / odd bonds / transverse fields for the
transverse-field Ising chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import Ansatz, cnot_cost
from .engine import run_fixed_ansatz  # re-exported as the fixed-ansatz runner
from .pauli import WeightedPauliSum
from .statevector import StateVector, _rotation_rows

vqds_fixed_run = run_fixed_ansatz


def greedy_sublayers(h: WeightedPauliSum) -> tuple[tuple[int, ...], ...]:
    """First-fit partition of term indices into disjoint-support groups."""
    groups: list[list[int]] = []
    masks: list[int] = []
    for idx, (_, p) in enumerate(h.terms):
        for g_idx, mask in enumerate(masks):
            if mask & p.support_mask == 0:
                groups[g_idx].append(idx)
                masks[g_idx] |= p.support_mask
                break
        else:
            groups.append([idx])
            masks.append(p.support_mask)
    return tuple(tuple(g) for g in groups)


@dataclass(frozen=True)
class HvaSpec:
    """Layer count plus the ordered sub-layer grouping of Hamiltonian terms."""

    layers: int
    sublayers: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise ValueError("layered ansatz needs at least one layer")

    @classmethod
    def for_hamiltonian(cls, h: WeightedPauliSum, layers: int) -> "HvaSpec":
        return cls(layers=layers, sublayers=greedy_sublayers(h))


def _validate_sublayers(h: WeightedPauliSum, sublayers) -> None:
    seen: set[int] = set()
    for group in sublayers:
        mask = 0
        for idx in group:
            if idx in seen:
                raise ValueError(f"term {idx} appears in more than one sub-layer")
            seen.add(idx)
            support = h.terms[idx][1].support_mask
            if mask & support:
                raise ValueError("sub-layer contains overlapping supports")
            mask |= support
    if len(seen) != len(h.terms):
        raise ValueError("every Hamiltonian term must appear in exactly one sub-layer")


def build_hva(
    h: WeightedPauliSum,
    reference: StateVector,
    layers: int,
    sublayers: tuple[tuple[int, ...], ...] | None = None,
) -> Ansatz:
    """Layered ansatz with one rotation per Hamiltonian term per layer.

    Angles start at zero, so the prepared state is the reference state. With
    ``layers=0`` this degenerates to the empty ansatz.
    """
    if layers < 0:
        raise ValueError("layer count must be non-negative")
    if sublayers is None:
        sublayers = greedy_sublayers(h)
    _validate_sublayers(h, sublayers)
    order = [idx for group in sublayers for idx in group]
    generators = tuple(h.terms[idx][1] for _ in range(layers) for idx in order)
    return Ansatz(reference, generators, np.zeros(len(generators)))


@dataclass(frozen=True, eq=False)
class TrotterResult:
    times: np.ndarray
    states: tuple[StateVector, ...]
    depths: np.ndarray  # cumulative gate-layer count at each boundary
    cnot_counts: np.ndarray


def trotter_run(
    h: WeightedPauliSum,
    psi0: StateVector,
    dt: float,
    t_final: float,
    sublayers: tuple[tuple[int, ...], ...] | None = None,
) -> TrotterResult:
    """First-order product-formula evolution with per-step resource counts.

    Each step applies exp(-i·dt·c·P) for every term, sub-layer by sub-layer;
    depth grows by the sub-layer count per step and the two-qubit gate count
    by the staircase cost of all terms.
    """
    if not dt > 0:
        raise ValueError("trotter step must be positive")
    if not t_final > 0:
        raise ValueError("final time must be positive")
    if h.n_qubits != psi0.n_qubits:
        raise ValueError("qubit-count mismatch")
    if sublayers is None:
        sublayers = greedy_sublayers(h)
    _validate_sublayers(h, sublayers)
    order = [idx for group in sublayers for idx in group]
    n_steps = max(1, int(np.ceil(t_final / dt - 1e-9)))
    depth_per_step = len(sublayers)
    cnots_per_step = sum(cnot_cost(p) for _, p in h.terms)

    amps = psi0.amplitudes
    states = [StateVector(psi0.n_qubits, amps.copy())]
    for _ in range(n_steps):
        for idx in order:
            coeff, p = h.terms[idx]
            amps = _rotation_rows(p, dt * coeff, amps)
        states.append(StateVector(psi0.n_qubits, amps))
    steps = np.arange(n_steps + 1)
    return TrotterResult(
        times=steps * dt,
        states=tuple(states),
        depths=steps * depth_per_step,
        cnot_counts=steps * cnots_per_step,
    )
