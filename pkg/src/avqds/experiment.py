"""Experiment harness: drive runs from a config and emit trajectory CSVs.

Every run writes one CSV whose header embeds the full configuration and the
run seed, so files are self-describing and reruns are byte-comparable. With
multiple runs an aggregate file carries across-run mean and sample standard
deviation on the union time grid (each run contributing its latest record
at or before the grid time).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .baselines import build_hva, trotter_run
from .config import ExperimentConfig, serialize_config
from .engine import GrowthConfig, TrajectoryRecord, run_avqds, run_fixed_ansatz
from .models import ModelSpec, build_model, hamiltonian_term_pool, model_pool, model_sublayers
from .noise import NoiseConfig
from .solvers import SolverConfig
from .statevector import ExactPropagator, expectation

CSV_COLUMNS = ("t", "n_params", "l2", "depth", "cnots", "dt", "energy", "infidelity")


def _fmt_float(x: float) -> str:
    return f"{x:.17g}"


def record_rows(records: list[TrajectoryRecord]) -> list[str]:
    rows = []
    for r in records:
        rows.append(
            ",".join(
                (
                    _fmt_float(r.t),
                    str(r.n_params),
                    _fmt_float(r.l2),
                    str(r.depth),
                    str(r.cnot_count),
                    _fmt_float(r.dt),
                    _fmt_float(r.energy),
                    _fmt_float(r.infidelity),
                )
            )
        )
    return rows


def write_trajectory_csv(
    path: Path, cfg: ExperimentConfig, seed: int, records: list[TrajectoryRecord]
) -> None:
    lines = ["# avqds trajectory v1", f"# seed = {seed}"]
    lines += [f"# {line}" for line in serialize_config(cfg).strip().splitlines()]
    lines.append(",".join(CSV_COLUMNS))
    lines += record_rows(records)
    path.write_text("\n".join(lines) + "\n")


def _trotter_records(cfg: ExperimentConfig, seed: int) -> list[TrajectoryRecord]:
    _, h, psi0 = build_model(cfg.model)
    sublayers = model_sublayers(cfg.model)
    result = trotter_run(h, psi0, cfg.trotter_dt, cfg.step.t_final, sublayers)
    oracle = ExactPropagator(h, psi0) if cfg.oracle else None
    records = []
    for k, t in enumerate(result.times):
        state = result.states[k]
        if oracle is not None:
            target = oracle.state_at(float(t)).amplitudes
            infidelity = 1.0 - float(abs(np.vdot(state.amplitudes, target)) ** 2)
        else:
            infidelity = math.nan
        records.append(
            TrajectoryRecord(
                t=float(t),
                n_params=0,
                l2=math.nan,
                depth=int(result.depths[k]),
                cnot_count=int(result.cnot_counts[k]),
                dt=cfg.trotter_dt,
                energy=expectation(h, state),
                infidelity=infidelity,
                seed=seed,
            )
        )
    return records


def run_single(cfg: ExperimentConfig, run_index: int) -> list[TrajectoryRecord]:
    """One seeded run of the configured algorithm."""
    seed = cfg.seed + run_index
    if cfg.algorithm == "trotter":
        return _trotter_records(cfg, seed)

    _, h, psi0 = build_model(cfg.model)
    noise = cfg.noise if cfg.noise_enabled else None
    if cfg.algorithm == "avqds":
        pool = (
            hamiltonian_term_pool(cfg.model)
            if cfg.pool == "hamiltonian"
            else model_pool(cfg.model)
        )
        return run_avqds(
            psi0,
            h,
            pool,
            cfg.growth,
            cfg.step,
            cfg.solver,
            noise_cfg=noise,
            seed=seed,
            compute_infidelity=cfg.oracle,
        )
    hva = build_hva(h, psi0, cfg.hva_layers, model_sublayers(cfg.model))
    return run_fixed_ansatz(
        hva,
        h,
        cfg.step,
        cfg.solver,
        noise_cfg=noise,
        seed=seed,
        compute_infidelity=cfg.oracle,
    )


def _run_and_write(args: tuple[ExperimentConfig, int, str]) -> str:
    cfg, run_index, out_dir = args
    records = run_single(cfg, run_index)
    path = Path(out_dir) / f"run_{run_index:03d}.csv"
    write_trajectory_csv(path, cfg, cfg.seed + run_index, records)
    return str(path)


def _aggregate(per_run: list[list[TrajectoryRecord]]) -> list[str]:
    grid = sorted({r.t for records in per_run for r in records})
    fields = ("n_params", "l2", "depth", "cnot_count", "dt", "energy", "infidelity")
    header = ["t", "n_runs"]
    for f in fields:
        name = "cnots" if f == "cnot_count" else f
        header += [f"{name}_mean", f"{name}_std"]
    lines = [",".join(header)]
    cursors = [0] * len(per_run)
    current = [records[0] for records in per_run]
    for t in grid:
        for i, records in enumerate(per_run):
            while cursors[i] + 1 < len(records) and records[cursors[i] + 1].t <= t + 1e-15:
                cursors[i] += 1
            current[i] = records[cursors[i]]
        row = [_fmt_float(t), str(len(per_run))]
        for f in fields:
            values = np.array([float(getattr(r, f)) for r in current])
            row.append(_fmt_float(float(np.mean(values))))
            row.append(_fmt_float(float(np.std(values, ddof=1)) if len(values) > 1 else 0.0))
        lines.append(",".join(row))
    return lines


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> list[Path]:
    """Execute all runs of a config; returns the written CSV paths."""
    out = Path(out_dir) if out_dir is not None else Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, i, str(out)) for i in range(cfg.runs)]
    if cfg.workers > 1 and cfg.runs > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            paths = [Path(p) for p in pool.map(_run_and_write, jobs)]
    else:
        paths = [Path(_run_and_write(job)) for job in jobs]
    if cfg.runs > 1:
        per_run = [_read_records(p) for p in paths]
        agg_path = out / "aggregate.csv"
        agg_path.write_text("\n".join(_aggregate(per_run)) + "\n")
        paths.append(agg_path)
    return paths


def _read_records(path: Path) -> list[TrajectoryRecord]:
    """Parse a trajectory CSV back into records (aggregation input)."""
    records = []
    seed = 0
    for line in path.read_text().splitlines():
        if line.startswith("# seed = "):
            seed = int(line.removeprefix("# seed = "))
            continue
        if line.startswith("#") or line.startswith("t,") or not line.strip():
            continue
        parts = line.split(",")
        records.append(
            TrajectoryRecord(
                t=float(parts[0]),
                n_params=int(parts[1]),
                l2=float(parts[2]),
                depth=int(parts[3]),
                cnot_count=int(parts[4]),
                dt=float(parts[5]),
                energy=float(parts[6]),
                infidelity=float(parts[7]),
                seed=seed,
            )
        )
    return records


# --- presets ---------------------------------------------------------------

TROTTER_DT = {"tfim": 0.04, "mfim": 0.03, "hm": 0.01}
HVA_LAYERS = {"tfim": 10, "mfim": 30, "hm": 20}


def _base_model(kind: str, n_qubits: int) -> dict:
    if kind == "tfim":
        return dict(kind="tfim", n_qubits=n_qubits, j=1.0, h_x=-2.0)
    if kind == "mfim":
        return dict(kind="mfim", n_qubits=n_qubits, j=1.0, h_x=-2.0, h_z=0.5)
    return dict(kind="hm", n_qubits=n_qubits, j=1.0)


def preset_solver_comparison(n_qubits: int = 8, t_final: float = 5.0) -> list[tuple[str, ExperimentConfig]]:
    """Adaptive layer-packed runs under the four equation-of-motion solvers."""
    model = ModelSpec(**_base_model("tfim", n_qubits))
    out = []
    for method in ("lsq_unbounded", "lsq_bounded", "tikhonov", "truncation"):
        solver = SolverConfig(method, epsilon=1e-6, bound=5.0)
        cfg = ExperimentConfig(
            model=model,
            algorithm="avqds",
            pool="hamiltonian",
            solver=solver,
            step=replace(ExperimentConfig().step, t_final=t_final),
        )
        out.append((f"solver-{method}", cfg))
    return out


def preset_benchmark(kind: str = "tfim", n_qubits: int = 8, t_final: float = 4.0) -> list[tuple[str, ExperimentConfig]]:
    """Adaptive (methods 1 and 3), product-formula and fixed-layer baselines."""
    model = ModelSpec(**_base_model(kind, n_qubits))
    base = ExperimentConfig(model=model)
    step = replace(base.step, t_final=t_final)
    return [
        ("avqds-m1", replace(base, algorithm="avqds", pool="hamiltonian", growth=GrowthConfig(method=1), step=step)),
        ("avqds-t", replace(base, algorithm="avqds", pool="hamiltonian", growth=GrowthConfig(method=3), step=step)),
        ("trotter", replace(base, algorithm="trotter", trotter_dt=TROTTER_DT[kind], step=step)),
        ("hva", replace(base, algorithm="hva", hva_layers=HVA_LAYERS[kind], step=step)),
    ]


def preset_hybrid_noise(
    n_qubits: int = 10,
    t_final: float = 4.0,
    runs: int = 20,
    depth_cap: int = 30,
) -> list[tuple[str, ExperimentConfig]]:
    """Partially-exact metric: threshold depths {21, 27}, shots {1e4, 1e5}.

    Compares the adaptive layer-packed run (depth-capped) against the
    fixed 10-layer ansatz of equal final depth; V stays exact.
    """
    model = ModelSpec(**_base_model("tfim", n_qubits))
    base = ExperimentConfig(
        model=model,
        solver=SolverConfig("truncation", epsilon=1e-3),
        runs=runs,
    )
    step = replace(base.step, t_final=t_final)
    out = []
    for d_c in (21, 27):
        for n_shots in (1e4, 1e5):
            noise = NoiseConfig(n_shots=n_shots, d_c=d_c)
            label = f"dc{d_c}-ns{int(n_shots):.0e}".replace("+0", "")
            out.append(
                (
                    f"avqds-t-{label}",
                    replace(
                        base,
                        algorithm="avqds",
                        pool="hamiltonian",
                        growth=GrowthConfig(method=3, max_depth=depth_cap),
                        step=step,
                        noise_enabled=True,
                        noise=noise,
                    ),
                )
            )
            out.append(
                (
                    f"hva-{label}",
                    replace(
                        base,
                        algorithm="hva",
                        hva_layers=10,
                        step=replace(step, dt_fixed=0.005),
                        noise_enabled=True,
                        noise=noise,
                    ),
                )
            )
    return out


def preset_noisy_regularization(
    n_qubits: int = 6,
    hva_layers: int = 8,
    n_shots: float = 1e4,
    runs: int = 20,
    t_final: float = 2.0,
) -> list[tuple[str, ExperimentConfig]]:
    """Shot-noisy fixed-ansatz runs: eigenvalue truncation vs ridge shift."""
    model = ModelSpec(**_base_model("tfim", n_qubits))
    base = ExperimentConfig(
        model=model,
        algorithm="hva",
        hva_layers=hva_layers,
        noise_enabled=True,
        noise=NoiseConfig(n_shots=n_shots, d_c=0),
        runs=runs,
    )
    step = replace(base.step, dt_fixed=0.005, t_final=t_final)
    return [
        ("truncation", replace(base, solver=SolverConfig("truncation", epsilon=1e-3), step=step)),
        ("tikhonov", replace(base, solver=SolverConfig("tikhonov", epsilon=1e-2), step=step)),
    ]


PRESETS = {
    "solver-comparison": preset_solver_comparison,
    "benchmark": preset_benchmark,
    "hybrid-noise": preset_hybrid_noise,
    "noisy-regularization": preset_noisy_regularization,
}
