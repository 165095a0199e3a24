"""Command-line interface: train, sweep, analyze, verify, synth.

Option precedence is CLI flag > ``--config`` JSON file > built-in default;
``HGX_PRECISION`` overrides the resolved precision. All file outputs land
under ``--out-dir`` and are byte-identical across runs with the same flags
and seed.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 verification failure, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

from .data import SyntheticSpec, generate_synthetic, load_dataset, save_dataset
from .errors import ConfigError, DatasetError, VerificationError
from .hypergraph import is_connected, laplacian
from .linalg import EIGEN_SIZE_CAP, Rng
from .nn import (
    ModelConfig,
    VARIANTS,
    init_params,
    load_checkpoint,
    save_checkpoint,
)
from .spectral import (
    min_nonzero_eigenvalue,
    stationary_propagation,
    stationary_transition,
)
from .train import SweepReport, depth_sweep, energy_probe, train
from .verify import run_verification

_MODEL_KEYS = {
    "variant": "deep-hgcn",
    "layers": 2,
    "hidden": 32,
    "alpha": 0.1,
    "lambda_id": 0.5,
    "dropout": 0.5,
    "lr": 0.01,
    "weight_decay": 5e-4,
    "epochs": 300,
    "patience": 100,
    "seed": 0,
    "precision": 64,
}


def _add_model_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--variant", choices=VARIANTS)
    parser.add_argument("--layers", type=int, help="number of propagation layers")
    parser.add_argument("--hidden", type=int, help="hidden feature dimension")
    parser.add_argument("--alpha", type=float, help="initial-residual strength in [0, 1]")
    parser.add_argument("--lambda-id", dest="lambda_id", type=float,
                        help="identity-mapping decay constant (>= 0)")
    parser.add_argument("--dropout", type=float)
    parser.add_argument("--lr", type=float, help="learning rate")
    parser.add_argument("--weight-decay", dest="weight_decay", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--patience", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--precision", type=int, choices=(32, 64))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, help="JSON file supplying any option subset")
    parser.add_argument("--out-dir", dest="out_dir", type=str,
                        help="output directory (default runs/<timestamp>-<seed>)")


def _load_config_file(path: str | None, allowed: set[str]) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p}: malformed JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {p}: top level must be an object")
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(
            f"config file {p}: unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}"
        )
    return doc


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    file_values = _load_config_file(getattr(args, "config", None), set(defaults))
    resolved = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in file_values:
            resolved[key] = file_values[key]
        else:
            resolved[key] = default
    return resolved


def _model_config(values: dict) -> ModelConfig:
    precision = values["precision"]
    env = os.environ.get("HGX_PRECISION")
    if env is not None:
        if env not in ("32", "64"):
            raise ConfigError(f"HGX_PRECISION must be 32 or 64, got {env!r}")
        precision = int(env)
    return ModelConfig(
        variant=values["variant"],
        num_layers=values["layers"],
        hidden_dim=values["hidden"],
        alpha=values["alpha"],
        lambda_id=values["lambda_id"],
        dropout=values["dropout"],
        learning_rate=values["lr"],
        weight_decay=values["weight_decay"],
        epochs=values["epochs"],
        patience=values["patience"],
        seed=values["seed"],
        precision=precision,
    )


def _out_dir(args: argparse.Namespace, seed: int) -> Path:
    if getattr(args, "out_dir", None):
        path = Path(args.out_dir)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        path = Path("runs") / f"{stamp}-{seed}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _cmd_train(args: argparse.Namespace) -> int:
    values = _resolve(args, _MODEL_KEYS)
    config = _model_config(values)
    dataset = load_dataset(args.dataset, ensure_self_edges=args.ensure_self_edges)
    out = _out_dir(args, config.seed)

    params, report = train(dataset, config)
    _write_json(out / "report.json", report.to_json_dict())
    save_checkpoint(out / "model.ckpt", params, config,
                    dataset.feature_dim, dataset.num_classes)
    print(
        f"train variant={config.variant} layers={config.num_layers} "
        f"test_acc={report.test_accuracy:.4f} best_epoch={report.best_epoch} "
        f"({report.wall_clock_seconds:.1f}s) -> {out}"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    values = _resolve(args, _MODEL_KEYS)
    config = _model_config(values)
    try:
        depths = [int(d) for d in args.depths.split(",") if d.strip()]
    except ValueError as exc:
        raise ConfigError(f"--depths must be a comma-separated int list: {exc}") from exc
    if not depths or any(d < 1 for d in depths):
        raise ConfigError(f"--depths must be positive integers, got {args.depths!r}")
    if args.splits < 1:
        raise ConfigError(f"--splits must be >= 1, got {args.splits}")
    dataset = load_dataset(args.dataset, ensure_self_edges=args.ensure_self_edges)
    out = _out_dir(args, config.seed)

    started = time.perf_counter()
    if args.jobs > 1:
        report = SweepReport(variant=config.variant)
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(depth_sweep, dataset, [depth], config, args.splits)
                for depth in depths
            ]
            for future in futures:
                report.rows.extend(future.result().rows)
        report.rows.sort(key=lambda r: (r["depth"], r["split"]))
    else:
        report = depth_sweep(dataset, depths, config, num_splits=args.splits)
    elapsed = time.perf_counter() - started

    _write_json(out / "sweep.json", {
        "variant": report.variant,
        "depths": depths,
        "num_splits": args.splits,
        "config": asdict(config),
        "rows": report.rows,
        "summary": report.summary(),
    })
    (out / "sweep.csv").write_text(report.to_csv())
    line = " ".join(
        f"{s['depth']}:{s['mean_acc']:.4f}+-{s['std_acc']:.4f}" for s in report.summary()
    )
    print(f"sweep variant={config.variant} splits={args.splits} {line} "
          f"({elapsed:.1f}s) -> {out}")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    values = _resolve(args, _MODEL_KEYS)
    config = _model_config(values)
    dataset = load_dataset(args.dataset, ensure_self_edges=args.ensure_self_edges)
    out = _out_dir(args, config.seed)

    doc: dict = {
        "num_nodes": dataset.num_nodes,
        "num_edges": dataset.hypergraph.num_edges,
        "connected": is_connected(dataset.hypergraph),
    }
    if doc["connected"]:
        doc["stationary_transition"] = [float(v) for v in stationary_transition(dataset.hypergraph)]
        doc["stationary_propagation"] = [float(v) for v in stationary_propagation(dataset.hypergraph)]
    else:
        doc["stationary_transition"] = None
        doc["stationary_propagation"] = None
        doc["stationary_skipped"] = "hypergraph is disconnected"

    cap = args.eigen_cap
    if dataset.num_nodes <= cap:
        doc["min_nonzero_eigenvalue"] = min_nonzero_eigenvalue(laplacian(dataset.hypergraph))
    else:
        doc["min_nonzero_eigenvalue"] = None
        doc["eigen_skipped"] = f"n={dataset.num_nodes} exceeds cap {cap}"

    if args.checkpoint:
        ckpt = Path(args.checkpoint)
        if not ckpt.exists():
            raise DatasetError(f"checkpoint not found: {ckpt}")
        params, header = load_checkpoint(ckpt)
        config = replace(
            config,
            variant=header["variant"],
            num_layers=header["num_layers"],
            hidden_dim=header["hidden_dim"],
        )
        doc["params_source"] = str(ckpt)
    else:
        params = init_params(
            config, dataset.feature_dim, dataset.num_classes,
            Rng(config.seed).stream("init"),
        )
        doc["params_source"] = f"random init (seed {config.seed})"

    trace = energy_probe(params, dataset, config)
    (out / "energy_trace.csv").write_text(trace.to_csv())
    doc["energy_layers"] = len(trace.layers)
    doc["energy_final_over_initial"] = (
        trace.energies[-1] / trace.energies[0] if trace.energies[0] > 0 else None
    )
    _write_json(out / "analyze.json", doc)
    print(
        f"analyze n={doc['num_nodes']} connected={doc['connected']} "
        f"layers={doc['energy_layers']} -> {out}"
    )
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    values = _resolve(args, {"trials": None, "seed": 0})
    results = run_verification(
        trials=values["trials"], seed=values["seed"], corrupt=args.self_test_corrupt,
    )
    for result in results:
        print(result.line())
    out = _out_dir(args, values["seed"])
    _write_json(out / "verify.json", [
        {
            "name": r.name,
            "passed": r.passed,
            "trials": r.trials,
            "worst": r.worst,
            "tolerance": r.tolerance,
        }
        for r in results
    ])
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise VerificationError(f"{len(failed)} check(s) failed: {', '.join(failed)}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    defaults = {
        "nodes": 200, "classes": 4, "edges": 120, "mean_edge_size": 4.0,
        "homophily": 0.9, "feature_dim": 16, "separation": 1.0,
        "noise": 1.0, "seed": 0,
    }
    values = _resolve(args, defaults)
    spec = SyntheticSpec(
        num_nodes=values["nodes"],
        num_classes=values["classes"],
        num_hyperedges=values["edges"],
        mean_edge_size=values["mean_edge_size"],
        homophily=values["homophily"],
        feature_dim=values["feature_dim"],
        separation=values["separation"],
        noise_scale=values["noise"],
        seed=values["seed"],
    )
    dataset = generate_synthetic(spec)
    out_path = Path(args.out) if args.out else _out_dir(args, spec.seed) / "synthetic.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, out_path)
    print(
        f"synth n={spec.num_nodes} classes={spec.num_classes} "
        f"edges={dataset.hypergraph.num_edges} -> {out_path}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hgx",
        description="Hypergraph convolution training, diagnostics, and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one model and write report + checkpoint")
    p_train.add_argument("--dataset", required=True)
    p_train.add_argument("--ensure-self-edges", action="store_true",
                         help="give isolated nodes a unit self-edge instead of failing")
    _add_model_options(p_train)
    _add_common(p_train)
    p_train.set_defaults(func=_cmd_train)

    p_sweep = sub.add_parser("sweep", help="train across depths x splits")
    p_sweep.add_argument("--dataset", required=True)
    p_sweep.add_argument("--depths", default="2,4,8,16,32,64")
    p_sweep.add_argument("--splits", type=int, default=1)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--ensure-self-edges", action="store_true")
    _add_model_options(p_sweep)
    _add_common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_analyze = sub.add_parser("analyze", help="stationary/spectral/energy diagnostics")
    p_analyze.add_argument("--dataset", required=True)
    p_analyze.add_argument("--checkpoint", help="probe these weights instead of a random init")
    p_analyze.add_argument("--eigen-cap", dest="eigen_cap", type=int, default=EIGEN_SIZE_CAP)
    p_analyze.add_argument("--ensure-self-edges", action="store_true")
    _add_model_options(p_analyze)
    _add_common(p_analyze)
    p_analyze.set_defaults(func=_cmd_analyze)

    p_verify = sub.add_parser("verify", help="run the numerical verification suite")
    p_verify.add_argument("--trials", type=int,
                          help="override per-check trial counts")
    p_verify.add_argument("--seed", type=int)
    p_verify.add_argument("--self-test-corrupt", action="store_true",
                          help="negative control: corrupt operators so checks must fail")
    _add_common(p_verify)
    p_verify.set_defaults(func=_cmd_verify)

    p_synth = sub.add_parser("synth", help="generate a planted-partition dataset")
    p_synth.add_argument("--out", help="output dataset path")
    p_synth.add_argument("--nodes", type=int)
    p_synth.add_argument("--classes", type=int)
    p_synth.add_argument("--edges", type=int)
    p_synth.add_argument("--mean-edge-size", dest="mean_edge_size", type=float)
    p_synth.add_argument("--homophily", type=float)
    p_synth.add_argument("--feature-dim", dest="feature_dim", type=int)
    p_synth.add_argument("--separation", type=float)
    p_synth.add_argument("--noise", type=float)
    p_synth.add_argument("--seed", type=int)
    _add_common(p_synth)
    p_synth.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
