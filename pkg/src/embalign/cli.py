"""Command-line front end: synth, train, build-prototypes, predict,
eval, inspect.

Every run emits a JSON manifest next to its primary output recording
the subcommand, the fully resolved configuration, SHA-256 digests of
the inputs, and the toolkit version.  Exit codes: 0 success, 2 usage,
3 data/format, 4 numeric.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .classifier import (ClassifierConfig, PromptSet, build_class_prototypes,
                         predict_batch, read_predictions, write_predictions)
from .errors import DataError, ToolkitError
from .metrics import score
from .projection import (HeadInit, identity_head, init_head, load_head,
                         save_head)
from .store import EmbeddingStore, SpaceTag, make_pairs, read_store, write_store
from .synth import SynthSpec, synth_generate
from .training import TrainConfig, train


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _args_dict(args) -> dict:
    return {k: v for k, v in vars(args).items()
            if k != "func" and isinstance(v, (str, int, float, bool, type(None)))}


def _write_manifest(out_path: str, subcommand: str, config: dict,
                    inputs: list[str], seed=None) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "inputs": {p: _sha256(p) for p in inputs},
        "seed": seed,
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        classes=args.classes, per_class=args.per_class,
        dim_in=args.dim_in, dim_out=args.dim_out,
        separation=args.separation, noise=args.noise,
        seed=args.seed, rotation_seed=args.rotation_seed,
    )
    dataset, prompts = synth_generate(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    visual_path = os.path.join(args.out_dir, "visual.emb1")
    target_path = os.path.join(args.out_dir, "target.emb1")
    prompts_path = os.path.join(args.out_dir, "prompts.emb1")
    write_store(dataset.visual, visual_path)
    write_store(dataset.target, target_path)
    write_store(prompts.text_embeddings, prompts_path)
    _write_manifest(visual_path, "synth", dataclasses.asdict(spec), [],
                    seed=args.seed)
    print(f"wrote {visual_path}, {target_path}, {prompts_path} "
          f"({len(dataset)} pairs, {spec.classes} classes)")
    return 0


def _cmd_train(args) -> int:
    visual = read_store(args.visual)
    target = read_store(args.target)
    data = make_pairs(visual, target, rule=args.pairing)
    config = TrainConfig(
        loss=args.loss, temperature=args.tau, learning_rate=args.lr,
        batch_size=args.batch, epochs=args.epochs, seed=args.seed,
        diag_as_printed=args.diag_as_printed,
    )
    head = init_head(visual.dim, target.dim, HeadInit(seed=args.seed))
    trained, report = train(head, data, config)
    save_head(trained, args.out)
    report_path = args.report or args.out + ".report.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    _write_manifest(args.out, "train", _args_dict(args) | {"resolved": report.config_fingerprint},
                    [args.visual, args.target], seed=args.seed)
    print(f"trained {visual.dim}x{target.dim} head -> {args.out} "
          f"(final loss {report.final_loss:.6g}, {report.steps} steps)")
    return 0


def _load_head_arg(args, in_dim=None):
    if args.head:
        return load_head(args.head, expect_in_dim=in_dim)
    if in_dim is None:
        raise DataError("no head given and input dim unknown")
    return identity_head(in_dim)


def _cmd_build_prototypes(args) -> int:
    store = read_store(args.prompts)
    prompts = PromptSet.from_store(store)
    head = _load_head_arg(args, in_dim=store.dim)
    config = ClassifierConfig(ensemble=args.ensemble)
    protos = build_class_prototypes(head, prompts, config)
    out = EmbeddingStore(
        dim=protos.shape[1], space_tag=SpaceTag.textual,
        metadata={
            "kind": "prototypes",
            "class_names": ",".join(prompts.class_names),
            "ensemble": args.ensemble,
        },
    )
    from .store import EmbeddingRecord
    for k, name in enumerate(prompts.class_names):
        out.records.append(
            EmbeddingRecord(name, protos[k].astype(np.float32), label=k)
        )
    write_store(out, args.out)
    _write_manifest(args.out, "build-prototypes", _args_dict(args),
                    [args.prompts] + ([args.head] if args.head else []))
    print(f"wrote {len(out)} prototypes -> {args.out}")
    return 0


def _cmd_predict(args) -> int:
    samples = read_store(args.samples)
    proto_store = read_store(args.prototypes)
    class_names = proto_store.metadata.get("class_names", "").split(",") \
        if proto_store.metadata.get("class_names") else proto_store.ids()
    prototypes = proto_store.matrix()
    head = _load_head_arg(args, in_dim=samples.dim)
    if head.out_dim != proto_store.dim:
        raise DataError(
            f"prototype dim {proto_store.dim} does not match head out_dim "
            f"{head.out_dim}"
        )
    config = ClassifierConfig(
        temperature=args.tau,
        pooling="temporal_mean" if args.video else "none",
    )
    results = predict_batch(head, prototypes, samples, config)
    write_predictions(args.out, results, class_names)
    _write_manifest(args.out, "predict", _args_dict(args),
                    [args.samples, args.prototypes]
                    + ([args.head] if args.head else []))
    print(f"wrote {len(results)} predictions -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    class_names, rows = read_predictions(args.predictions)
    labels = read_store(args.labels)
    truth = labels.labels()
    if args.video:
        # frame records share a group id; the group inherits the label
        truth = {}
        for rec in labels.records:
            key = rec.group if rec.group else rec.id
            truth.setdefault(key, rec.label)
    report = score(truth, [(rid, pred) for rid, pred, _ in rows],
                   n_classes=len(class_names), class_names=class_names)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _write_manifest(args.out, "eval", _args_dict(args),
                        [args.predictions, args.labels])
    print(text)
    return 0


def _cmd_inspect(args) -> int:
    with open(args.file, "rb") as fh:
        magic = fh.read(4)
    if magic == b"EMB1":
        store = read_store(args.file)
        print(f"EMB1 store: dim={store.dim} count={len(store)} "
              f"space_tag={store.space_tag.name}")
        for key, value in store.metadata.items():
            shown = value if len(value) <= 72 else value[:69] + "..."
            print(f"  metadata {key} = {shown}")
    elif magic == b"PHD1":
        head = load_head(args.file)
        print(f"PHD1 head: {head.in_dim} x {head.out_dim}")
        for key, value in head.metadata.items():
            print(f"  metadata {key} = {value}")
    else:
        raise DataError(f"unrecognized file magic {magic!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embalign",
        description="Linear alignment of frozen embedding spaces and "
                    "zero-shot cosine classification.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic paired dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--dim-in", type=int, required=True)
    p.add_argument("--dim-out", type=int, required=True)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rotation-seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train the projection head")
    p.add_argument("--visual", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--pairing", choices=["by_id", "by_order"], default="by_id")
    p.add_argument("--loss", choices=["infonce", "mse"], default="infonce")
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=512)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--diag-as-printed", action="store_true",
                   help="also report the matched-pairs-only contrastive "
                        "loss per epoch")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("build-prototypes",
                       help="project prompt embeddings into class prototypes")
    p.add_argument("--prompts", required=True)
    p.add_argument("--head")
    p.add_argument("--ensemble", choices=["single", "embed_mean"],
                   default="embed_mean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_prototypes)

    p = sub.add_parser("predict", help="zero-shot classification")
    p.add_argument("--samples", required=True)
    p.add_argument("--prototypes", required=True)
    p.add_argument("--head")
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--video", action="store_true",
                   help="pool records sharing a group id before prediction")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="score predictions against labels")
    p.add_argument("--predictions", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--video", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("inspect", help="print file headers")
    p.add_argument("file")
    p.set_defaults(func=_cmd_inspect)
    return parser


def main(argv=None) -> int:
    threads = os.environ.get("EMBALIGN_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error [missing-file]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
