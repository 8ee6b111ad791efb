"""Command-line entry point: train / evaluate / reason / detect / synth / export."""
import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .detection import (PerturbationConfig, detection_metrics, perturb, replay, replay_perturbed)
from .exceptions import InvalidInputError, TaskGraphError
from .metrics import edge_prf, mean_metrics
from .modelio import atomic_write, dumps, file_digest, load_graph, load_model, save_model
from .postprocess import export_graph, graph_document, prune_start_pair
from .reasoner import DEFAULT_ALPHA, ReasonerQuery, binary_scores, weighted_scores
from .synth import random_dag, sample_topological_sorts
from .training import TrainConfig, train_do
from .vocab import (DEFAULT_EXPAND_CAP, KEEP_FIRST, STRATEGIES, dataset_document, load_dataset,
                    parse_dataset, read_json)

log = logging.getLogger("taskgraph")

SEED_ENV = "TGML_SEED"


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, ensure_ascii=False) + "\n")


def _manifest(args, inputs: dict, outputs: list, started: float, **extra) -> dict:
    return {
        "command": args.command,
        "inputs": {name: {"path": str(p), "digest": file_digest(p)} for name, p in inputs.items() if p},
        "outputs": [str(p) for p in outputs],
        "wall_clock_seconds": round(time.time() - started, 3),
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        **extra,
    }


def cmd_train(args) -> int:
    started = time.time()
    seqs = load_dataset(args.dataset, args.repetition, args.expand_cap)
    config = TrainConfig.from_json(args.config) if args.config else TrainConfig()
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            config.seed = int(env_seed)
        except ValueError:
            raise InvalidInputError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from None
    log.info("training on %d sequences over %d key-steps", len(seqs), seqs.vocabulary.n)
    model = train_do(seqs, config)
    provenance = {
        "dataset_digest": file_digest(args.dataset),
        "repetition": args.repetition,
        "expand_cap": args.expand_cap,
        "seed": config.seed,
    }
    save_model(model, args.out, provenance)
    manifest = _manifest(args, {"dataset": args.dataset, "config": args.config}, [args.out], started,
                         config=model.meta["config"], seed=config.seed,
                         loss=model.meta["loss"], sa=model.meta["sa"], epochs_run=model.meta["epochs_run"])
    atomic_write(f"{args.out}.manifest.json", dumps(manifest))
    log.info("wrote %s (epochs %d, SA %.4f)", args.out, model.meta["epochs_run"], model.meta["sa"])
    return 0


def cmd_evaluate(args) -> int:
    if len(args.model) != len(args.truth):
        raise InvalidInputError("--model and --truth need the same number of files")
    results = [edge_prf(load_graph(m), load_graph(t)) for m, t in zip(args.model, args.truth)]
    if len(results) == 1:
        _emit(results[0].to_dict())
    else:
        _emit({"per_procedure": [r.to_dict() for r in results], "mean": mean_metrics(results)})
    return 0


def _label_map(vocab, scores: dict) -> dict:
    return {vocab.label(k): v for k, v in scores.items()}


def cmd_reason(args) -> int:
    model = load_model(args.model)
    vocab = model.vocabulary
    query = ReasonerQuery(vocab.index(args.current), tuple(vocab.index(o) for o in args.observed))
    if args.mode == "weighted":
        scores = weighted_scores(query, model, args.alpha)
        opt = scores["optional"]
        doc = {
            "mode": "weighted",
            "current": args.current,
            "previous": _label_map(vocab, scores["previous"]),
            "optional": {"score": opt.combined, "global": opt.global_score, "local": opt.local_score,
                         "alpha": opt.alpha, "unseen": opt.unseen},
            "mistake": scores["mistake"],
            "missing": _label_map(vocab, scores["missing"]),
            "future": _label_map(vocab, scores["future"]),
        }
    else:
        scores = binary_scores(query, model.graph)
        doc = {
            "mode": "binary",
            "current": args.current,
            "previous": _label_map(vocab, scores["previous"]),
            "optional": None,
            "mistake": scores["mistake"],
            "missing": _label_map(vocab, scores["missing"]),
            "future": _label_map(vocab, scores["future"]),
        }
    _emit(doc)
    return 0


def _read_labels(path) -> dict:
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{path}: labels must map sequence ids to label lists")
    return {str(k): list(v) for k, v in doc.items()}


def cmd_detect(args) -> int:
    model = load_model(args.model)
    graph = prune_start_pair(model.graph) if args.prune_start_pair else model.graph
    vocab, raws, _ = parse_dataset(read_json(args.sequences))
    if vocab != model.vocabulary:
        raise InvalidInputError("sequence file taxonomy differs from the model vocabulary")
    labels = _read_labels(args.labels) if args.labels else None
    all_pred, all_truth = [], []
    for k, raw in enumerate(raws):
        if args.perturb_rate > 0:
            cfg = PerturbationConfig(args.perturb_rate, args.seed + k)
            verdicts = replay_perturbed(perturb(raw.steps, cfg, vocab.n), graph)
        else:
            verdicts = replay(raw.steps, graph)
        truth = None
        if labels is not None:
            truth = labels.get(raw.source_id)
            if truth is None or len(truth) != len(verdicts):
                raise InvalidInputError(f"labels for sequence {raw.source_id!r} missing or wrong length")
            all_truth.extend(truth)
        for t, v in enumerate(verdicts):
            row = {"sequence": raw.source_id, "position": t, "step": vocab.label(v.step),
                   "label": v.label, "missing": [vocab.label(m) for m in v.missing]}
            if truth is not None:
                row["truth"] = truth[t]
            _emit(row)
            all_pred.append(v.label)
    summary = {"steps": len(all_pred), "mistakes": sum(p == "mistake" for p in all_pred)}
    if labels is not None:
        summary["metrics"] = detection_metrics(all_pred, all_truth).to_dict()
    _emit(summary)
    return 0


def cmd_synth(args) -> int:
    started = time.time()
    dag = random_dag(args.nodes, args.density, args.seed)
    seqs = sample_topological_sorts(dag, args.sequences, args.seed + 1)
    out = Path(args.out)
    dataset_path, truth_path = out / "dataset.json", out / "truth.json"
    doc = dataset_document(seqs)
    doc["procedure"] = f"synthetic-n{args.nodes}-d{args.density}-s{args.seed}"
    atomic_write(dataset_path, dumps(doc))
    atomic_write(truth_path, dumps(graph_document(dag.graph)))
    manifest = _manifest(args, {}, [dataset_path, truth_path], started,
                         seed=args.seed, nodes=args.nodes, density=args.density, sequences=args.sequences)
    atomic_write(out / "manifest.json", dumps(manifest))
    _emit({"dataset": str(dataset_path), "truth": str(truth_path)})
    return 0


def cmd_export(args) -> int:
    model = load_model(args.model)
    sys.stdout.write(export_graph(model.graph, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taskgraph", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn a task graph from a dataset file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--config", help="JSON training config; missing fields take defaults")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--repetition", choices=STRATEGIES, default=KEEP_FIRST)
    p.add_argument("--expand-cap", type=int, default=DEFAULT_EXPAND_CAP)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="edge precision/recall/F1 against a reference graph")
    p.add_argument("--model", required=True, nargs="+", help="model or graph JSON file(s)")
    p.add_argument("--truth", required=True, nargs="+", help="reference graph JSON file(s)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("reason", help="procedure-understanding scores for one query")
    p.add_argument("--model", required=True)
    p.add_argument("--current", required=True, help="label of the current key-step")
    p.add_argument("--observed", nargs="*", default=[], help="labels observed so far, in order")
    p.add_argument("--mode", choices=("weighted", "binary"), default="weighted")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.set_defaults(func=cmd_reason)

    p = sub.add_parser("detect", help="online mistake detection over a sequence file")
    p.add_argument("--model", required=True)
    p.add_argument("--sequences", required=True, help="dataset-format file; repetitions are kept")
    p.add_argument("--labels", help="JSON mapping sequence id to per-step correct/mistake labels")
    p.add_argument("--perturb-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prune-start-pair", action="store_true")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("synth", help="random ground-truth graph and sampled sequences")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--sequences", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export", help="print the post-processed graph")
    p.add_argument("--model", required=True)
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (TaskGraphError, OSError) as exc:
        reason = " ".join(str(exc).split())
        print(f"taskgraph: error: {type(exc).__name__}: {reason}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
