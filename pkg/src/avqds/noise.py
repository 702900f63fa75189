"""Shot noise on the metric, gated by circuit-fragment depth.

An element (mu, nu) of the metric only involves the ansatz circuit up to the
later of the two unitaries, so elements whose fragment depth stays at or
below the threshold ``d_c`` are kept exact (classically evaluated); the rest
are replaced by Gaussian draws whose standard deviation follows from the
ancilla-measurement convention m = (2p-1)/4 at a finite shot count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ansatz import CircuitLayout
from .mclachlan import McLachlanSystem


@dataclass(frozen=True)
class NoiseConfig:
    n_shots: float = math.inf
    d_c: int = 0
    noisy_v: bool = False
    truncate_sigmas: float | None = 5.0

    def __post_init__(self) -> None:
        if not (self.n_shots >= 1):
            raise ValueError(f"noise.n_shots must be >= 1 (or inf), got {self.n_shots}")
        if self.d_c < 0:
            raise ValueError(f"noise.d_c must be non-negative, got {self.d_c}")
        if self.truncate_sigmas is not None and not self.truncate_sigmas > 0:
            raise ValueError("noise.truncate_sigmas must be positive or None")


def shot_sigma(m_element: float, n_shots: float) -> float:
    """Standard deviation of a metric element measured with n_shots samples.

    The ancilla probability is clamped to [0, 1]; elements at or beyond the
    representable range therefore come back noiseless.
    """
    if math.isinf(n_shots):
        return 0.0
    p = min(max((4.0 * m_element + 1.0) / 2.0, 0.0), 1.0)
    return math.sqrt(p * (1.0 - p) / (4.0 * n_shots))


def _sigma_array(values: np.ndarray, n_shots: float) -> np.ndarray:
    p = np.clip((4.0 * values + 1.0) / 2.0, 0.0, 1.0)
    return np.sqrt(p * (1.0 - p) / (4.0 * n_shots))


def fragment_depth(layout: CircuitLayout, mu: int, nu: int) -> int:
    """Depth of the circuit restricted to unitaries up to max(mu, nu)."""
    return layout.prefix_depth(max(mu, nu))


def noisy_system(
    s: McLachlanSystem,
    layout: CircuitLayout,
    cfg: NoiseConfig,
    rng: np.random.Generator,
) -> McLachlanSystem:
    """Replace deep-fragment elements of M (and optionally V) by shot draws.

    Draw order is fixed (row-major upper triangle, then V), one Gaussian per
    noisy element, so a given seed always produces the same perturbation.
    When nothing qualifies as noisy the input system is returned untouched
    and the random stream is not consumed.
    """
    n = s.n_params
    if len(layout.layer_of) != n:
        raise ValueError(
            f"layout has {len(layout.layer_of)} unitaries, system has {n} parameters"
        )
    if math.isinf(cfg.n_shots) or n == 0:
        return s
    prefix_depths = np.array([layout.prefix_depth(k) for k in range(n)])
    deep = prefix_depths > cfg.d_c  # fragment depth of (mu, nu) depends on max index only
    rows, cols = np.triu_indices(n)
    noisy = deep[cols]
    if not np.any(noisy) and not cfg.noisy_v:
        return s
    m = s.m.copy()
    if np.any(noisy):
        r, c = rows[noisy], cols[noisy]
        means = m[r, c]
        sigmas = _sigma_array(means, cfg.n_shots)
        draws = rng.normal(means, sigmas)
        if cfg.truncate_sigmas is not None:
            half_width = cfg.truncate_sigmas * sigmas
            draws = np.clip(draws, means - half_width, means + half_width)
        m[r, c] = draws
        m[c, r] = draws
    v = s.v
    if cfg.noisy_v and np.any(deep):
        v = v.copy()
        means = v[deep]
        sigmas = _sigma_array(means, cfg.n_shots)
        draws = rng.normal(means, sigmas)
        if cfg.truncate_sigmas is not None:
            half_width = cfg.truncate_sigmas * sigmas
            draws = np.clip(draws, means - half_width, means + half_width)
        v[deep] = draws
    return McLachlanSystem(m=m, v=v, var_h=s.var_h)
