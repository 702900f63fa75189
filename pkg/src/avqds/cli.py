"""Command-line entry points: run, preset, validate, oracle."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, config_from_mapping, parse_assignments, serialize_config


def _override_pairs(args: argparse.Namespace) -> dict[str, str]:
    """CLI flags mapped onto their dotted configuration keys."""
    mapping = {
        "seed": "run.seed",
        "runs": "run.runs",
        "out": "run.out",
        "workers": "run.workers",
        "t_final": "step.t_final",
        "method": "growth.method",
        "solver": "solver.method",
        "epsilon": "solver.epsilon",
        "ns": "noise.n_shots",
        "dc": "noise.d_c",
        "l2_cut": "growth.l2_cut",
        "model": "model.kind",
        "nq": "model.n_qubits",
        "pool": "pool.kind",
        "algorithm": "run.algorithm",
        "oracle_flag": "run.oracle",
    }
    out = {}
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = str(value)
    return out


def _merge_overrides(assignments: dict[str, str], overrides: dict[str, str]) -> dict[str, str]:
    """Apply overrides; switching the model kind resets its field values to
    the kind-appropriate defaults unless those are overridden too."""
    merged = dict(assignments)
    if overrides.get("model.kind") not in (None, merged.get("model.kind")):
        for key in ("model.j", "model.h_x", "model.h_z"):
            merged.pop(key, None)
    merged.update(overrides)
    return merged


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int)
    parser.add_argument("--runs", type=int)
    parser.add_argument("--out")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--t-final", dest="t_final", type=float)
    parser.add_argument("--method", type=int, help="growth method 1, 2 or 3")
    parser.add_argument("--solver", help="lsq_unbounded | lsq_bounded | tikhonov | truncation")
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--ns", help="shots per matrix element (number or 'inf')")
    parser.add_argument("--dc", type=int, help="exact-evaluation depth threshold")
    parser.add_argument("--l2-cut", dest="l2_cut", type=float)
    parser.add_argument("--model", help="tfim | mfim | hm")
    parser.add_argument("--nq", type=int)
    parser.add_argument("--pool", help="model | hamiltonian")
    parser.add_argument("--algorithm", help="avqds | hva | trotter")
    parser.add_argument("--oracle", dest="oracle_flag", help="true | false")


def _fail(key: str, message: str) -> int:
    print(f"error key={key} message={message}", file=sys.stderr)
    return 2


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        assignments = parse_assignments(Path(args.config).read_text())
        cfg = config_from_mapping(_merge_overrides(assignments, _override_pairs(args)))
    except ConfigError as exc:
        return _fail(exc.key, str(exc))
    except OSError as exc:
        return _fail("config", str(exc))
    from .experiment import run_experiment

    for path in run_experiment(cfg):
        print(path)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        cfg = config_from_mapping(parse_assignments(Path(args.config).read_text()))
    except ConfigError as exc:
        return _fail(exc.key, str(exc))
    except OSError as exc:
        return _fail("config", str(exc))
    sys.stdout.write(serialize_config(cfg))
    return 0


def _cmd_preset(args: argparse.Namespace) -> int:
    from .config import serialize_config as _ser
    from .experiment import PRESETS, run_experiment

    if args.list:
        for name in PRESETS:
            print(name)
        return 0
    if args.name not in PRESETS:
        return _fail("preset", f"unknown preset {args.name!r}; try --list")
    overrides = _override_pairs(args)
    base_out = Path(overrides.pop("run.out", args.name))
    try:
        labelled = PRESETS[args.name]()
        configs = []
        for label, cfg in labelled:
            assignments = parse_assignments(_ser(cfg))
            configs.append((label, config_from_mapping(_merge_overrides(assignments, overrides))))
    except ConfigError as exc:
        return _fail(exc.key, str(exc))
    for label, cfg in configs:
        for path in run_experiment(cfg, base_out / label):
            print(path)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    import numpy as np

    from .models import ModelSpec, build_model
    from .statevector import ExactPropagator, expectation

    kind = args.model or "tfim"
    h_x = args.hx if args.hx is not None else (0.0 if kind == "hm" else -2.0)
    h_z = args.hz if args.hz is not None else (0.5 if kind == "mfim" else 0.0)
    try:
        spec = ModelSpec(kind=kind, n_qubits=args.nq or 8, j=args.j, h_x=h_x, h_z=h_z)
        _, h, psi0 = build_model(spec)
    except ValueError as exc:
        return _fail("model", str(exc))
    prop = ExactPropagator(h, psi0)
    times = np.arange(0.0, args.t_final + 1e-12, args.dt)
    lines = ["t,energy,return_probability"]
    for t in times:
        state = prop.state_at(float(t))
        ret = float(abs(np.vdot(psi0.amplitudes, state.amplitudes)) ** 2)
        lines.append(f"{t:.17g},{expectation(h, state):.17g},{ret:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avqds",
        description="Adaptive variational quantum dynamics simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run experiments from a config file")
    p_run.add_argument("config", help="path to a key = value config file")
    _add_override_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config file and echo its canonical form")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_pre = sub.add_parser("preset", help="run a named preset")
    p_pre.add_argument("name", nargs="?", default="")
    p_pre.add_argument("--list", action="store_true", help="list preset names")
    _add_override_flags(p_pre)
    p_pre.set_defaults(func=_cmd_preset)

    p_or = sub.add_parser("oracle", help="dump exact-evolution observables for a model")
    p_or.add_argument("--model", default="tfim")
    p_or.add_argument("--nq", type=int, default=8)
    p_or.add_argument("--j", type=float, default=1.0)
    p_or.add_argument("--hx", type=float, default=None, help="defaults per model kind")
    p_or.add_argument("--hz", type=float, default=None, help="defaults per model kind")
    p_or.add_argument("--t-final", dest="t_final", type=float, default=2.0)
    p_or.add_argument("--dt", type=float, default=0.05)
    p_or.add_argument("--out")
    p_or.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
