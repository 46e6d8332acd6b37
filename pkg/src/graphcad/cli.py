"""Command-line pipeline: synth, inject, train, score, eval, ablate.

All randomness flows from ``--seed``; identical invocations on identical
files produce byte-identical outputs regardless of ``--threads``.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .ablation import run_ablation, summarize_ablation, write_ablation_csv
from .config import Hyperparams, load_hyperparams
from .graph import generate_synthetic, inject_anomalies, load_graph, save_graph
from .metrics import auc, roc_points, write_roc_csv
from .model import load_model, save_model
from .score import read_scores_csv, score_all, write_scores_csv
from .train import train, write_training_log

_TRAIN_OVERRIDES = (
    ("epochs", int), ("batch_size", int), ("hidden_dim", int),
    ("subgraph_size", int), ("rounds", int), ("lr", float),
    ("view_balance", float), ("scale_balance", float), ("ss_weight", float),
    ("edge_mod_ratio", float), ("restart_prob", float),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphcad",
        description="Contrastive anomaly detection on attributed graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_text):
        return sub.add_parser(
            name, help=help_text,
            formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        )

    p = add("synth", "generate a stochastic block model dataset")
    p.add_argument("--nodes", type=int, required=True, help="number of nodes")
    p.add_argument("--dim", type=int, required=True, help="feature dimensions")
    p.add_argument("--blocks", type=int, required=True, help="number of blocks")
    p.add_argument("--p-in", type=float, default=0.05, help="intra-block edge probability")
    p.add_argument("--p-out", type=float, default=0.002, help="inter-block edge probability")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--out", required=True, help="output dataset JSON path")

    p = add("inject", "inject clique and feature-swap anomalies into a dataset")
    p.add_argument("--in", dest="infile", required=True, help="input dataset JSON")
    p.add_argument("--out", required=True, help="output dataset JSON")
    p.add_argument("--structural", type=int, required=True,
                   help="number of structural (clique) anomalies")
    p.add_argument("--feature", type=int, required=True,
                   help="number of feature-swap anomalies")
    p.add_argument("--clique-size", type=int, default=15, help="nodes per clique")
    p.add_argument("--pool", type=int, default=50,
                   help="candidate pool size for the feature swap")
    p.add_argument("--seed", type=int, required=True, help="generator seed")

    p = add("train", "train the contrastive scorer")
    p.add_argument("--data", required=True, help="dataset JSON")
    p.add_argument("--config", required=True, help="hyperparameter config JSON")
    p.add_argument("--out", default=None, help="output model JSON (skip to not save)")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--aug", choices=("em", "gnf", "fm", "gd"), default=None,
                   help="override augmentation method")
    p.add_argument("--log", default=None, help="per-epoch loss CSV path")
    for name, typ in _TRAIN_OVERRIDES:
        p.add_argument(f"--{name.replace('_', '-')}", type=typ, default=None,
                       help=f"override config {name}")

    p = add("score", "compute multi-round anomaly scores with a trained model")
    p.add_argument("--data", required=True, help="dataset JSON")
    p.add_argument("--model", required=True, help="model JSON from train")
    p.add_argument("--rounds", type=int, default=None, help="override scoring rounds")
    p.add_argument("--seed", type=int, default=None, help="override scoring seed")
    p.add_argument("--out", required=True, help="output scores CSV")
    p.add_argument("--threads", type=int, default=None,
                   help="scoring round parallelism (default: all cores)")

    p = add("eval", "evaluate scores against dataset labels")
    p.add_argument("--scores", required=True, help="scores CSV from score")
    p.add_argument("--data", required=True, help="labeled dataset JSON")
    p.add_argument("--roc", default=None, help="optional ROC CSV output path")

    p = add("ablate", "train/score/evaluate contrast and augmentation variants")
    p.add_argument("--data", required=True, help="labeled dataset JSON")
    p.add_argument("--config", required=True, help="hyperparameter config JSON")
    p.add_argument("--variants", required=True,
                   help="comma list, e.g. NS,NS+NN,NS+NN+SS or NS+NN+SS:gnf")
    p.add_argument("--seeds", required=True, help="comma list of seeds, e.g. 0,1,2")
    p.add_argument("--out", required=True, help="output ablation CSV")
    p.add_argument("--threads", type=int, default=None,
                   help="scoring round parallelism (default: all cores)")
    return parser


def _cmd_synth(args) -> int:
    g = generate_synthetic(args.nodes, args.dim, args.blocks, args.p_in,
                           args.p_out, np.random.default_rng(args.seed))
    save_graph(g, args.out)
    print(f"wrote {args.out}: {g.num_nodes} nodes, {g.num_edges} edges, "
          f"{g.num_features} feature dims")
    return 0


def _cmd_inject(args) -> int:
    g = load_graph(args.infile)
    out, marks = inject_anomalies(
        g, args.structural, args.feature,
        clique_size=args.clique_size, candidate_pool=args.pool,
        rng=np.random.default_rng(args.seed),
    )
    save_graph(out, args.out)
    print(f"wrote {args.out}: {len(marks.structural)} structural + "
          f"{len(marks.feature)} feature anomalies, "
          f"{out.num_edges - g.num_edges} edges added")
    return 0


def _cmd_train(args) -> int:
    g = load_graph(args.data)
    hp = load_hyperparams(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.aug is not None:
        overrides["augmentation"] = args.aug
    for name, _ in _TRAIN_OVERRIDES:
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if overrides:
        hp = hp.replace(**overrides)
    params, history = train(g, hp)
    if args.log:
        write_training_log(history, args.log)
    if args.out:
        save_model(params, args.out, hyperparams=hp.to_dict())
        print(f"wrote {args.out}")
    if history:
        last = history[-1]
        print(f"trained {len(history)} epochs; final joint loss {last.loss_joint:.6f}")
    else:
        print("trained 0 epochs (initialized parameters only)")
    return 0


def _cmd_score(args) -> int:
    g = load_graph(args.data)
    params, hp_doc = load_model(args.model)
    if hp_doc:
        hp = Hyperparams.from_dict(hp_doc, source=args.model)
    else:
        # bare model document: score with defaults at the model's width
        hp = Hyperparams(hidden_dim=params.hidden_dim)
    table = score_all(g, params, hp, rounds=args.rounds, seed=args.seed,
                      threads=args.threads)
    write_scores_csv(table, args.out, labels=g.labels)
    rounds = args.rounds if args.rounds is not None else hp.rounds
    print(f"wrote {args.out}: {g.num_nodes} nodes scored over {rounds} rounds")
    return 0


def _cmd_eval(args) -> int:
    scores, csv_labels = read_scores_csv(args.scores)
    g = load_graph(args.data)
    labels = g.labels if g.labels is not None else csv_labels
    if labels is None:
        raise ValueError(f"{args.data} has no labels and {args.scores} carries none")
    if len(scores) != len(labels):
        raise ValueError(
            f"{args.scores} has {len(scores)} rows but dataset has {len(labels)} nodes"
        )
    value = auc(scores, labels)
    if args.roc:
        write_roc_csv(roc_points(scores, labels), args.roc)
    print(f"auc={value:.17g}")
    return 0


def _cmd_ablate(args) -> int:
    g = load_graph(args.data)
    hp = load_hyperparams(args.config)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    if not variants or not seeds:
        raise ValueError("--variants and --seeds must be non-empty comma lists")
    rows = run_ablation(g, hp, variants, seeds, threads=args.threads)
    write_ablation_csv(rows, args.out)
    for (variant, aug), stats in summarize_ablation(rows).items():
        print(f"{variant}:{aug} mean_auc={stats['mean']:.4f} "
              f"median_auc={stats['median']:.4f}")
    print(f"wrote {args.out}")
    return 0


_DISPATCH = {
    "synth": _cmd_synth,
    "inject": _cmd_inject,
    "train": _cmd_train,
    "score": _cmd_score,
    "eval": _cmd_eval,
    "ablate": _cmd_ablate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
