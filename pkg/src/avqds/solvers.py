"""Solvers for M·theta_dot = V under singular or ill-conditioned M.

The metric is positive semi-definite with V orthogonal to its null space in
the noiseless case, so the system stays solvable; these strategies differ in
how they behave once noise breaks that structure. Truncation zeroes the
components on eigenvalues at or below the threshold, Tikhonov shifts the
whole spectrum, and the two least-squares variants minimize the residual
with and without a box constraint. Unbounded least squares is kept as a
deliberately fragile reference point on singular systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear

from .mclachlan import McLachlanSystem

METHODS = ("lsq_unbounded", "lsq_bounded", "tikhonov", "truncation")


@dataclass(frozen=True)
class SolverConfig:
    method: str = "truncation"
    epsilon: float = 1e-6
    bound: float = 5.0

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"solver.method must be one of {METHODS}, got {self.method!r}")
        if not self.epsilon > 0:
            raise ValueError(f"solver.epsilon must be positive, got {self.epsilon}")
        if not self.bound > 0:
            raise ValueError(f"solver.bound must be positive, got {self.bound}")


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column k pairs with eigenvalue k


@dataclass(frozen=True)
class SolveDiagnostics:
    n_null: int
    min_eigenvalue: float
    max_eigenvalue: float
    residual: float


def symmetric_eig(m: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix, eigenvalues ascending."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.size and np.max(np.abs(m - m.T)) > 1e-10:
        raise ValueError("matrix is not symmetric within 1e-10")
    w, u = np.linalg.eigh(m)
    return EigenDecomposition(eigenvalues=w, eigenvectors=u)


def _cgls(m: np.ndarray, v: np.ndarray, max_iters: int, tol: float) -> np.ndarray:
    """Conjugate-gradient least squares on ||M·x - V||^2, starting from 0."""
    x = np.zeros_like(v)
    r = v.copy()
    s = m.T @ r
    p = s.copy()
    gamma = float(s @ s)
    for _ in range(max_iters):
        if np.sqrt(gamma) < tol:
            break
        q = m @ p
        qq = float(q @ q)
        if qq == 0.0:
            break
        step = gamma / qq
        x += step * p
        r -= step * q
        s = m.T @ r
        gamma_new = float(s @ s)
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    return x


def solve(s: McLachlanSystem, cfg: SolverConfig) -> tuple[np.ndarray, SolveDiagnostics]:
    """Solve the equations of motion with the configured strategy."""
    m, v = s.m, s.v
    n = s.n_params
    if not (np.all(np.isfinite(m)) and np.all(np.isfinite(v))):
        raise ValueError("non-finite entries in the linear system")
    if n == 0:
        return np.zeros(0), SolveDiagnostics(0, np.inf, -np.inf, 0.0)

    eig = symmetric_eig(m)
    w, u = eig.eigenvalues, eig.eigenvectors
    n_null = int(np.sum(w <= cfg.epsilon))

    if cfg.method == "tikhonov":
        theta_dot = u @ ((u.T @ v) / (w + cfg.epsilon))
    elif cfg.method == "truncation":
        y = u.T @ v
        scale = np.zeros(n)
        keep = w > cfg.epsilon
        np.divide(y, w, out=scale, where=keep)
        theta_dot = u @ scale
    elif cfg.method == "lsq_unbounded":
        theta_dot = _cgls(m, v, max_iters=10 * n, tol=1e-12)
    else:  # lsq_bounded
        result = lsq_linear(m, v, bounds=(-cfg.bound, cfg.bound), method="bvls", tol=1e-14)
        theta_dot = np.clip(result.x, -cfg.bound, cfg.bound)

    residual = float(np.linalg.norm(m @ theta_dot - v))
    diag = SolveDiagnostics(
        n_null=n_null,
        min_eigenvalue=float(w[0]),
        max_eigenvalue=float(w[-1]),
        residual=residual,
    )
    return theta_dot, diag


def null_space_diagnostics(s: McLachlanSystem, epsilon: float) -> tuple[int, float]:
    """Size of the sub-threshold eigenspace and its worst overlap with V.

    The overlap defect is reported, never enforced; noiseless assembly keeps
    it at the numerical floor, noise does not.
    """
    if s.n_params == 0:
        return 0, 0.0
    eig = symmetric_eig(s.m)
    null_mask = eig.eigenvalues <= epsilon
    n_null = int(np.sum(null_mask))
    if n_null == 0:
        return 0, 0.0
    defect = float(np.max(np.abs(eig.eigenvectors[:, null_mask].T @ s.v)))
    return n_null, defect
