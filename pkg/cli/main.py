"""
GateLab command-line interface.

Git-like subcommands tying training, gradient checks and probes into
reproducible experiments. Every command that writes files also writes the
resolved config (config.json) next to them.

Usage:
    gatelab gen-data --task phones --num-seq 64 --out data/phones.json
    gatelab train --config exp.json --out runs/lstm
    gatelab gradcheck --cell gru --seed 0
    gatelab probe perturb --model runs/lstm/model.json --out runs/lstm/perturb.csv
    gatelab compare runs/lstm/model.json runs/gru/model.json --out cmp.csv
    gatelab sweep --variants lazy --seeds 0 1 2 3 4 --out runs/sweep
"""

from __future__ import annotations
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from autodiff.gradcheck import grad_check
from autodiff.losses import LossKind
from cells.network import NetworkConfig, run_forward
from cells.state import CellKind, LazyCandidate
from config import settings
from instrumentation.recorder import StateRecorder
from persistence.experiment import (
    DataRef,
    ExperimentConfig,
    ProbeRunConfig,
    write_resolved_config,
)
from persistence.model_file import load_model, save_model
from probes.claims import evaluate_claims, write_claims
from probes.compare import ProbeConfig, collect_traces, compare_models, memory_metrics
from probes.export import (
    write_histogram_csv,
    write_perturbation_csv,
    write_table_csv,
    write_trace_csv,
)
from probes.histogram import activation_histogram
from probes.perturbation import perturbation_probe
from probes.projection import ProjectionMethod, project_trace
from training.tasks import TaskConfig, TaskKind, ToyDataset
from training.trainer import EpochMetrics, train

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ("epoch", "loss", "frame_acc")
MODEL_FILE = "model.json"
METRICS_FILE = "metrics.csv"


def _one_line(e: Exception) -> str:
    if isinstance(e, ValidationError):
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "<input>"
        return f"{where}: {first['msg']}"
    text = str(e).strip()
    return text.splitlines()[0] if text else type(e).__name__


# ============================================================================
# Config assembly
# ============================================================================


def _experiment_from_args(args) -> ExperimentConfig:
    """Config file (or defaults) with command-line overrides applied."""
    base = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    doc = base.model_dump(mode="json")
    net, tr = doc["network"], doc["train"]

    overrides = {
        "cell_kind": args.cell,
        "layers": args.layers,
        "hidden_dim": args.hidden,
        "lazy_candidate": args.lazy_candidate,
    }
    net.update({k: v for k, v in overrides.items() if v is not None})
    if args.residual:
        net["residual"] = True
    if args.lazy_last:
        net["lazy_last_layer_only"] = True
    if args.seed is not None:
        net["seed"] = args.seed
        tr["seed"] = args.seed
    tr.update({k: v for k, v in {"lr": args.lr, "epochs": args.epochs}.items() if v is not None})

    if args.task is not None:
        task = TaskConfig.model_validate({**tr["task"], "kind": args.task})
        tr["task"] = task.model_dump(mode="json")
        net["input_dim"] = task.feature_dim
        net["output_dim"] = task.classes
    return ExperimentConfig.model_validate(doc)


def _probe_config(args) -> ProbeConfig:
    flags = {
        "num_sequences": args.num_sequences,
        "sample_units": args.sample_units,
        "units_per_layer": args.units,
        "bins": args.bins,
        "clip": args.clip,
        "method": args.method,
        "noise_pos": args.noise_pos,
        "noise_len": args.noise_len,
        "noise_std": args.noise_std,
        "epsilon": args.epsilon,
        "sustain": args.sustain,
        "seed": args.probe_seed,
    }
    return ProbeConfig(**{k: v for k, v in flags.items() if v is not None})


def _probe_dataset(
    args, cfg: NetworkConfig, num_seq: int
) -> Tuple[ToyDataset, Optional[TaskConfig]]:
    """Dataset file when --data is given, otherwise a generated task sized to the network."""
    if args.data:
        return ToyDataset.load(args.data), None
    kind = TaskKind(args.task or TaskKind.PHONES.value)
    task = TaskConfig(
        kind=kind,
        num_seq=num_seq,
        seed=args.data_seed,
        seq_len=args.seq_len,
        input_dim=cfg.input_dim,
        num_classes=cfg.output_dim,
        num_symbols=cfg.output_dim,
        delay=args.delay,
    )
    if task.feature_dim != cfg.input_dim:
        raise ValueError(
            f"{kind.value} frames are {task.feature_dim}-dim but the model expects {cfg.input_dim}"
        )
    return task.build(), task


# ============================================================================
# Subcommands
# ============================================================================


def cmd_gen_data(args) -> int:
    """Generate a toy dataset file."""
    fields = {
        "kind": args.task,
        "num_seq": args.num_seq,
        "seed": args.seed,
        "seq_len": args.seq_len,
        "num_classes": args.num_classes,
        "input_dim": args.input_dim,
        "min_dwell": args.min_dwell,
        "max_dwell": args.max_dwell,
        "noise_std": args.noise_std,
        "delay": args.delay,
        "num_symbols": args.num_symbols,
    }
    task = TaskConfig(**{k: v for k, v in fields.items() if v is not None})
    dataset = task.build()
    out = dataset.save(args.out)
    write_resolved_config(task, out.parent)

    print(f"✅ {dataset.task}: {len(dataset)} sequences, {dataset.num_frames()} labelled frames")
    print(f"   input_dim={dataset.input_dim} classes={dataset.num_classes}")
    print(f"   Output: {out}")
    return 0


def cmd_train(args) -> int:
    """Train a network and write model.json, metrics.csv and config.json."""
    exp = _experiment_from_args(args)
    if args.data:
        exp = exp.model_copy(update={"data": DataRef.from_file(args.data)})
    out_dir = Path(args.out)
    dataset = exp.dataset()

    def show(m: EpochMetrics) -> None:
        print(f"   epoch {m.epoch:3d}  loss={m.loss:.4f}  frame_acc={m.frame_acc:.3f}")

    params, history = train(
        exp.train, exp.network, dataset=dataset, workers=args.workers, on_epoch=show
    )

    write_resolved_config(exp, out_dir)
    model_path = save_model(
        params,
        exp.network,
        out_dir / MODEL_FILE,
        metadata={
            "train_seed": exp.train.seed,
            "experiment_digest": exp.digest(),
            "epochs": len(history),
            "data_sha256": exp.data.sha256 if exp.data else None,
        },
    )
    metrics_path = write_table_csv([m.to_row() for m in history], out_dir / METRICS_FILE, METRICS_COLUMNS)

    final = history[-1] if history else None
    print(f"✅ Trained {exp.network.cell_kind.value} x{exp.network.layers} "
          f"(hidden={exp.network.hidden_dim}, residual={exp.network.residual})")
    if final is not None:
        print(f"   Final: loss={final.loss:.4f} frame_acc={final.frame_acc:.3f}")
    print(f"   Model:   {model_path}")
    print(f"   Metrics: {metrics_path}")
    return 0


def cmd_gradcheck(args) -> int:
    """Finite-difference check of the analytic gradients on a small seeded net."""
    cfg = NetworkConfig(
        cell_kind=args.cell,
        layers=args.layers,
        input_dim=args.input_dim,
        hidden_dim=args.hidden,
        output_dim=args.output_dim,
        residual=args.residual,
        lazy_last_layer_only=args.lazy_last,
        lazy_candidate=args.lazy_candidate,
        seed=args.seed,
    )
    report = grad_check(cfg, args.seed, eps=args.eps, tol=args.tol, seq_len=args.frames, loss=LossKind(args.loss))

    status = "✅ PASS" if report.passed else "❌ FAIL"
    print(f"{status} {cfg.cell_kind.value} x{cfg.layers} seed={args.seed} residual={cfg.residual}")
    print(f"   max_rel_err={report.max_rel_err:.3e} (tol {report.tol:g}, eps {report.eps:g})")
    print(f"   worst: {report.offending_param} over {report.checked} scalars")
    return 0 if report.passed else 1


def _select_sequence(dataset: ToyDataset, index: int) -> np.ndarray:
    if not (0 <= index < len(dataset)):
        raise ValueError(f"--seq {index} out of range for {len(dataset)} sequences")
    return dataset.sequences[index][0]


def _layers(args, cfg: NetworkConfig) -> List[int]:
    if args.layer is None:
        return list(range(cfg.layers))
    if not (0 <= args.layer < cfg.layers):
        raise ValueError(f"--layer {args.layer} out of range for a {cfg.layers}-layer model")
    return [args.layer]


def cmd_probe(args) -> int:
    """Run one probe (hist, trace or perturb) on a saved model and write its CSVs."""
    params, cfg = load_model(args.model)
    probe = _probe_config(args)
    dataset, task = _probe_dataset(args, cfg, max(probe.num_sequences, args.seq + 1))
    out = Path(args.out)
    layers = _layers(args, cfg)

    if args.probe == "hist":
        traces = collect_traces(cfg, params, dataset, probe)
        reports = [
            activation_histogram(traces, layer, probe.units_per_layer, probe.bins, probe.clip, probe.seed)
            for layer in layers
        ]
        written = [write_histogram_csv(reports, out)]
        print(f"✅ Histograms over {min(probe.num_sequences, len(dataset))} sequences")
        for rep in reports:
            print(f"   layer {rep.layer} ({rep.kind}): near-zero {rep.near_zero_fraction:.3f}, "
                  f"near-bound {rep.near_bound_fraction:.3f}, range [{rep.bounds[0]:g}, {rep.bounds[1]:g}]")
    elif args.probe == "trace":
        frames = _select_sequence(dataset, args.seq)
        recorder = StateRecorder(sample_units=probe.sample_units, seed=probe.seed)
        recorder.begin_sequence(args.seq)
        run_forward(cfg, params, frames, recorder=recorder)
        projections = [project_trace(recorder.traces_for_layer(layer)[0], probe.method, probe.seed) for layer in layers]
        written = write_trace_csv(projections, out)
        print(f"✅ Traces of sequence {args.seq} ({probe.method.value})")
        for proj in projections:
            print(f"   layer {proj.layer}: {len(proj)} frames, smoothness {proj.smoothness:.4f}")
    else:
        frames = _select_sequence(dataset, args.seq)
        report = perturbation_probe(
            params,
            cfg,
            frames,
            noise_pos=probe.noise_pos,
            noise_len=probe.noise_len,
            noise_std=probe.noise_std,
            epsilon=probe.epsilon,
            seed=probe.seed,
            sustain=probe.sustain,
        )
        report.layers = [lp for lp in report.layers if lp.layer in layers]
        written = write_perturbation_csv(report, out)
        print(f"✅ Noise insertion at frame {probe.noise_pos} (+{probe.noise_len} frames, std {probe.noise_std:g})")
        for lp in report.layers:
            print(f"   layer {lp.layer}: decay length {lp.decay_len}, median unit decay {lp.median_unit_decay:g}")

    run = ProbeRunConfig(
        probe=args.probe,
        model=str(args.model),
        network=cfg,
        data=str(args.data) if args.data else None,
        task=task,
        sequence=args.seq,
        probes=probe,
    )
    write_resolved_config(run, out.parent)
    for path in written:
        print(f"   Output: {path}")
    return 0


def cmd_compare(args) -> int:
    """Side-by-side probe summary of several models."""
    names = args.names or [Path(m).parent.name or Path(m).stem for m in args.models]
    if len(names) != len(args.models):
        raise ValueError(f"{len(names)} names for {len(args.models)} models")
    models = []
    for name, path in zip(names, args.models):
        params, cfg = load_model(path)
        models.append((name, cfg, params))
    probe = _probe_config(args)
    dataset, task = _probe_dataset(args, models[0][1], probe.num_sequences)

    rows = compare_models(models, dataset, probe)
    out = write_table_csv(rows, args.out)
    write_resolved_config(
        {
            "models": dict(zip(names, map(str, args.models))),
            "data": str(args.data) if args.data else None,
            "task": task.model_dump(mode="json") if task else None,
            "probes": probe.model_dump(mode="json"),
        },
        out.parent,
    )

    print(f"{'model':<16} {'cell':<10} {'layer':>5} {'loss':>8} {'acc':>6} {'smooth':>8} {'decay':>6} {'~0':>6} {'~±1':>6}")
    for r in rows:
        print(
            f"{r['model']:<16} {r['cell']:<10} {r['layer']:>5d} {r['loss']:>8.4f} {r['frame_acc']:>6.3f} "
            f"{r['smoothness']:>8.4f} {r['median_decay']:>6.1f} {r['near_zero']:>6.3f} {r['near_bound']:>6.3f}"
        )
    print(f"✅ Comparison written to {out}")
    return 0


SWEEP_VARIANTS: Dict[str, List[Tuple[str, Dict[str, Any]]]] = {
    "cells": [
        ("lstm", {"cell_kind": "lstm"}),
        ("gru", {"cell_kind": "gru"}),
    ],
    "depth": [(f"lstm-{n}", {"cell_kind": "lstm", "layers": n}) for n in (1, 2, 3, 4)],
    "lazy": [
        ("lstm", {"cell_kind": "lstm"}),
        ("lazy-top", {"cell_kind": "lstm", "lazy_last_layer_only": True}),
        ("lazy-all", {"cell_kind": "lazy_lstm"}),
    ],
    "residual": [
        (f"{cell}-4{'-res' if res else ''}", {"cell_kind": cell, "layers": 4, "residual": res})
        for cell in ("lstm", "gru")
        for res in (False, True)
    ],
}
SWEEP_VARIANTS["claims"] = (
    SWEEP_VARIANTS["cells"] + [SWEEP_VARIANTS["lazy"][1]] + SWEEP_VARIANTS["residual"]
)


def cmd_sweep(args) -> int:
    """Train a grid of variants over several seeds; write sweep.csv, claims and the base config."""
    base = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    out_dir = Path(args.out)
    dataset = base.dataset()
    rows = []
    for variant, update in SWEEP_VARIANTS[args.variants]:
        finals = []
        for seed in args.seeds:
            doc = base.model_dump(mode="json")
            doc["network"] = {**doc["network"], "lazy_last_layer_only": False, **update, "seed": seed}
            doc["train"]["seed"] = seed
            exp = ExperimentConfig.model_validate(doc)
            params, history = train(exp.train, exp.network, dataset=dataset, workers=args.workers)
            final = history[-1] if history else EpochMetrics(0, float("nan"), float("nan"))
            memory = memory_metrics(exp.network, params, dataset, exp.probes)
            finals.append(final)
            rows.append({
                "variant": variant,
                "seed": seed,
                "cell": exp.network.cell_kind.value,
                "layers": exp.network.layers,
                "residual": exp.network.residual,
                "lazy_last": exp.network.lazy_last_layer_only,
                "final_loss": final.loss,
                "final_acc": final.frame_acc,
                "smoothness": memory["smoothness"],
                "median_decay": memory["median_decay"],
            })
        mean_loss = float(np.mean([f.loss for f in finals]))
        mean_acc = float(np.mean([f.frame_acc for f in finals]))
        print(f"   {variant:<12} loss={mean_loss:.4f} acc={mean_acc:.3f} over {len(finals)} seeds")

    path = write_table_csv(rows, out_dir / "sweep.csv")
    verdicts = evaluate_claims(rows)
    if verdicts:
        write_claims(verdicts, out_dir)
        for v in verdicts:
            mark = "✅" if v.majority else "❌"
            print(f"{mark} {v.claim.name}: {v.seeds_holding}/{len(v.outcomes)} seeds ({v.claim.description})")
    write_resolved_config(
        {"base": base.model_dump(mode="json"), "variants": args.variants, "seeds": list(args.seeds)},
        out_dir,
    )
    print(f"✅ Sweep '{args.variants}' written to {path}")
    return 0


# ============================================================================
# Parser
# ============================================================================


def _add_network_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cell", choices=[k.value for k in CellKind], help="Recurrent unit type")
    p.add_argument("--layers", type=int, help="Number of recurrent layers")
    p.add_argument("--hidden", type=int, help="Hidden width")
    p.add_argument("--residual", action="store_true", help="Identity shortcuts around layers")
    p.add_argument("--lazy-last", action="store_true", help="Lazy cell update in the top layer only")
    p.add_argument("--lazy-candidate", choices=[c.value for c in LazyCandidate])


def _add_probe_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="Dataset file (default: generate one sized to the model)")
    p.add_argument("--task", choices=[k.value for k in TaskKind], help="Task to generate without --data")
    p.add_argument("--data-seed", type=int, default=1, help="Seed of the generated dataset")
    p.add_argument("--seq-len", type=int, default=60)
    p.add_argument("--delay", type=int, default=5)
    p.add_argument("--num-sequences", type=int)
    p.add_argument("--sample-units", type=int)
    p.add_argument("--units", type=int, help="Units per layer in histograms")
    p.add_argument("--bins", type=int)
    p.add_argument("--clip", type=float)
    p.add_argument("--method", choices=[m.value for m in ProjectionMethod])
    p.add_argument("--noise-pos", type=int)
    p.add_argument("--noise-len", type=int)
    p.add_argument("--noise-std", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--sustain", type=int)
    p.add_argument("--probe-seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gatelab",
        description="Gated recurrent network lab: train, check and probe LSTM/GRU stacks",
    )
    subparsers = parser.add_subparsers(dest="cmd", help="Command")

    # gen-data
    gen = subparsers.add_parser("gen-data", help="Generate a toy dataset")
    gen.add_argument("--task", choices=[k.value for k in TaskKind], default=TaskKind.PHONES.value)
    gen.add_argument("--out", required=True, help="Dataset JSON file")
    gen.add_argument("--num-seq", type=int)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--seq-len", type=int)
    gen.add_argument("--num-classes", type=int)
    gen.add_argument("--input-dim", type=int)
    gen.add_argument("--min-dwell", type=int)
    gen.add_argument("--max-dwell", type=int)
    gen.add_argument("--noise-std", type=float)
    gen.add_argument("--delay", type=int)
    gen.add_argument("--num-symbols", type=int)

    # train
    tr = subparsers.add_parser("train", help="Train a network")
    tr.add_argument("--config", help="Experiment JSON (default: built-in defaults)")
    tr.add_argument("--out", required=True, help="Output directory")
    tr.add_argument("--data", help="Dataset file instead of the configured task")
    tr.add_argument("--task", choices=[k.value for k in TaskKind], help="Override the task kind")
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--lr", type=float)
    tr.add_argument("--seed", type=int, help="Network and shuffle seed")
    tr.add_argument("--workers", type=int, help=f"Gradient threads (default {settings.WORKERS})")
    _add_network_flags(tr)

    # gradcheck
    gc = subparsers.add_parser("gradcheck", help="Finite-difference gradient check")
    gc.add_argument("--cell", choices=[k.value for k in CellKind], default=CellKind.LSTM.value)
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--residual", action="store_true")
    gc.add_argument("--lazy-last", action="store_true")
    gc.add_argument("--lazy-candidate", choices=[c.value for c in LazyCandidate], default=LazyCandidate.CURRENT.value)
    gc.add_argument("--layers", type=int, default=2)
    gc.add_argument("--hidden", type=int, default=4)
    gc.add_argument("--input-dim", type=int, default=3)
    gc.add_argument("--output-dim", type=int, default=3)
    gc.add_argument("--frames", type=int, default=6)
    gc.add_argument("--loss", choices=[k.value for k in LossKind], default=LossKind.CROSS_ENTROPY.value)
    gc.add_argument("--eps", type=float, default=1e-5)
    gc.add_argument("--tol", type=float, default=1e-5)

    # probe
    pr = subparsers.add_parser("probe", help="Run a memory probe on a saved model")
    pr.add_argument("probe", choices=["hist", "trace", "perturb"])
    pr.add_argument("--model", required=True, help="Model file")
    pr.add_argument("--out", required=True, help="CSV output file")
    pr.add_argument("--layer", type=int, help="Restrict to one layer")
    pr.add_argument("--seq", type=int, default=0, help="Sequence index for trace/perturb")
    _add_probe_flags(pr)

    # compare
    cmp_ = subparsers.add_parser("compare", help="Side-by-side probe summary of models")
    cmp_.add_argument("models", nargs="+", help="Model files")
    cmp_.add_argument("--names", nargs="+", help="Display names, one per model")
    cmp_.add_argument("--out", required=True, help="CSV output file")
    _add_probe_flags(cmp_)

    # sweep
    sw = subparsers.add_parser("sweep", help="Train variant grids over seeds")
    sw.add_argument("--config", help="Base experiment JSON")
    sw.add_argument("--variants", choices=sorted(SWEEP_VARIANTS), default="cells")
    sw.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    sw.add_argument("--workers", type=int)
    sw.add_argument("--out", required=True, help="Output directory")

    return parser


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "gradcheck": cmd_gradcheck,
    "probe": cmd_probe,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=settings.LOG_LEVEL.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    handler = COMMANDS.get(args.cmd)
    if handler is None:
        parser.print_help()
        return 1
    try:
        return handler(args)
    except (ValueError, RuntimeError, OSError) as e:
        print(f"Error: {_one_line(e)}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
