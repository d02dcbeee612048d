"""Command-line entry points.

Subcommands: ``generate`` a synthetic dataset, ``train`` an organ model,
``run`` the measurement pipeline, ``eval`` reports from existing results,
and ``serve`` the review service.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import imageio
from .imgproc import AugmentConfig, augment_sample, equalize_histogram, resize, resize_mask
from .nn.train import TrainConfig, train
from .nn.unet import UNetConfig, save_weights
from .pipeline import (
    PipelineConfig,
    parse_manifest,
    run_pipeline,
    summarize,
    emit_report,
    STATUS_MEASURED,
)
from .review import ReviewStore, serve_forever
from .synthetic import generate_synthetic_dataset


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    overrides = {}
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    if getattr(args, "backend", None):
        overrides["backend"] = args.backend
    if getattr(args, "parallelism", None):
        overrides["parallelism"] = args.parallelism
    if getattr(args, "heart_model", None):
        overrides["heart_model"] = args.heart_model
    if getattr(args, "lung_model", None):
        overrides["lung_model"] = args.lung_model
    if overrides:
        cfg = PipelineConfig(**{**cfg.__dict__, **overrides})
    return cfg


def cmd_generate(args) -> int:
    cases = generate_synthetic_dataset(args.count, args.size, args.seed, args.out)
    print(f"wrote {len(cases)} cases to {args.out}")
    print(f"manifest: {os.path.join(args.out, 'manifest.csv')}")
    return 0


def _organ_training_set(records, organ: str, input_size: int, copies: int, seed: int):
    dataset = []
    hflip = organ == "lung"  # flips are applied to lung samples only
    for rec in records:
        mask_path = rec.heart_mask_path if organ == "heart" else rec.lung_mask_path
        if not mask_path:
            continue
        img = equalize_histogram(imageio.read_image(rec.image_path))
        mask = imageio.read_mask(mask_path)
        small_img = resize(img, input_size, input_size, mode="bilinear")
        small_mask = resize_mask(mask, input_size, input_size)
        dataset.append((small_img, small_mask))
        for i in range(copies):
            cfg = AugmentConfig(hflip_enabled=hflip, seed=seed + 1000 * len(dataset) + i)
            dataset.append(augment_sample(small_img, small_mask, cfg))
    return dataset


def cmd_train(args) -> int:
    records = parse_manifest(args.manifest)
    unet_cfg = UNetConfig(
        input_size=args.input_size,
        levels=args.levels,
        base_channels=args.base_channels,
        convs_per_level=args.convs_per_level,
    )
    dataset = _organ_training_set(
        records, args.organ, args.input_size, args.augment_copies, args.seed
    )
    if not dataset:
        print(f"no cases in manifest carry a {args.organ} mask", file=sys.stderr)
        return 1
    cfg = TrainConfig(
        batch_size=args.batch_size, epochs=args.epochs, seed=args.seed, split=args.split
    )
    result = train(cfg, unet_cfg, dataset, lr=args.lr, max_steps=args.max_steps)
    save_weights(result.model, args.out)
    last = result.history[-1] if result.history else {}
    print(
        f"trained {args.organ} model on {len(result.train_indices)} samples "
        f"({len(result.val_indices)} held out); final train loss "
        f"{last.get('train_loss')}; weights -> {args.out}"
    )
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args)
    records = parse_manifest(args.manifest)
    results = run_pipeline(cfg, records)
    measured = sum(1 for r in results if r.status == STATUS_MEASURED)
    print(f"processed {len(results)} cases: {measured} measured, "
          f"{len(results) - measured} unmeasurable")
    print(f"reports in {cfg.out_dir}")
    return 0


def cmd_eval(args) -> int:
    results_dir = os.path.join(args.results, "cases")
    if not os.path.isdir(results_dir):
        print(f"no case results under {results_dir}", file=sys.stderr)
        return 1
    labels = {}
    if args.manifest:
        labels = {r.case_id: r.dataset_label for r in parse_manifest(args.manifest)}

    from .pipeline import CaseResult
    from .ctr import Measurement
    from .core import Point, Segment

    results = []
    for name in sorted(os.listdir(results_dir)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(results_dir, name)) as fh:
            obj = json.load(fh)
        label = labels.get(obj["case_id"], "unknown")
        if obj["status"] != STATUS_MEASURED:
            results.append(
                CaseResult(obj["case_id"], obj["status"], label, reason=obj.get("reason"))
            )
            continue
        eps = obj["endpoints"]

        def seg(key):
            return Segment(
                Point(eps[key]["a"]["x"], eps[key]["a"]["y"]),
                Point(eps[key]["b"]["x"], eps[key]["b"]["y"]),
            )

        m = Measurement(
            mrd=seg("mrd"), mld=seg("mld"), id=seg("id"),
            mrd_len=obj["mrd_px"], mld_len=obj["mld_px"], id_len=obj["id_px"],
            midline_x=obj["midline_x"], ctr=obj["ctr"],
            category=obj["category"], detection=obj["detection"],
            flags=frozenset(obj.get("flags", [])),
        )
        results.append(CaseResult(obj["case_id"], obj["status"], label, measurement=m))
    paths = emit_report(results, args.out or args.results, cutoff=args.cutoff)
    print(json.dumps(summarize(results, cutoff=args.cutoff), indent=2, sort_keys=True))
    print(f"reports written: {', '.join(sorted(paths.values()))}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    manifest_cases = parse_manifest(args.manifest) if args.manifest else None
    store = ReviewStore.open(args.results, manifest_cases=manifest_cases)
    ui_dir = args.ui if args.ui and os.path.isdir(args.ui) else None
    serve_forever(store, args.host, args.port, ui_dir=ui_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctrkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset with known ratios")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train the toy heart or lung model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--organ", choices=["heart", "lung"], required=True)
    p.add_argument("--out", required=True, help="weights file to write")
    p.add_argument("--input-size", type=int, default=64)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--base-channels", type=int, default=8)
    p.add_argument("--convs-per-level", type=int, default=2)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--split", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--augment-copies", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="run the measurement pipeline over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--backend", choices=["files", "model"], default=None)
    p.add_argument("--heart-model", dest="heart_model", default=None)
    p.add_argument("--lung-model", dest="lung_model", default=None)
    p.add_argument("--parallelism", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="recompute reports from existing results")
    p.add_argument("--results", required=True, help="pipeline output directory")
    p.add_argument("--manifest", default=None, help="manifest supplying labels")
    p.add_argument("--out", default=None)
    p.add_argument("--cutoff", type=float, default=0.5)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="start the review service")
    p.add_argument("--results", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui", default=None, help="directory with the built review UI")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
