"""Command-line front door.

Exit codes: 0 success, 2 usage or bad input, 3 environment problems
(port already bound, unresolvable provider secrets).
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

from .config import PipelineConfig
from .errors import AdAuthorError, Unavailable
from .evaluation import (AssignmentPlan, aggregate, format_report,
                         load_ratings_csv, make_assignment, resolve_models)
from .model import export_track, export_webvtt, import_track
from .pipeline import (STAGES, StageFailure, load_adapt_context,
                       load_asset_spec, run_pipeline, write_outputs)
from .providers import build_tts, build_vlm
from .queries import answer_question, describe_now


def _apply_overrides(config: PipelineConfig, args) -> PipelineConfig:
    seg, ens, opt = config.segmentation, config.ensemble, config.optimizer
    if args.scene_threshold is not None:
        seg.threshold = args.scene_threshold
    if args.min_scene_len is not None:
        seg.min_scene_len = args.min_scene_len
    if args.frame_rate is not None:
        seg.frame_rate = args.frame_rate
    if args.time_tol is not None:
        ens.time_tol = args.time_tol
    if args.min_gap is not None:
        ens.min_gap = args.min_gap
    if args.high_conf is not None:
        ens.high_conf = args.high_conf
    if args.wpm is not None:
        opt.wpm = args.wpm
    if args.max_retries is not None:
        opt.max_retries = args.max_retries
    if args.min_utterance is not None:
        opt.min_utterance = args.min_utterance
    return config


def cmd_genad(args) -> int:
    config = _apply_overrides(PipelineConfig.from_file(args.config), args)
    try:
        asset = load_asset_spec(args.asset)
    except (OSError, KeyError, ValueError) as exc:
        print(f"asset spec: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out or config.resolve(config.output_dir)

    if args.dry_run:
        for stage in STAGES:
            print(f"would run: {stage}")
        print(f"would write outputs under: {out_dir}")
        return 0

    try:
        result = run_pipeline(config, asset)
    except StageFailure as exc:
        print(str(exc), file=sys.stderr)
        return 2 if "missing input" in str(exc) else 1
    paths = write_outputs(result, out_dir)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = PipelineConfig.from_file(args.config)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError:
        print(f"port {args.port} is already in use", file=sys.stderr)
        return 3
    finally:
        probe.close()

    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export(args) -> int:
    if args.format not in ("vtt", "track"):
        print(f"unknown format {args.format!r}", file=sys.stderr)
        return 2
    try:
        track = import_track(Path(args.track).read_bytes())
    except OSError as exc:
        print(f"cannot read track: {exc}", file=sys.stderr)
        return 2
    if args.format == "track":
        rendered = export_track(track)
    else:
        asset = load_asset_spec(args.asset_spec)
        rendered = export_webvtt(track, asset)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    return 0


def _split_csv(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def cmd_eval_plan(args) -> int:
    plan = make_assignment(_split_csv(args.raters), _split_csv(args.videos),
                           _split_csv(args.models), seed=args.seed)
    rendered = plan.to_json()
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
        print(f"plan: {args.out}")
    else:
        sys.stdout.write(rendered)
    return 0


def cmd_eval_aggregate(args) -> int:
    records, categories = load_ratings_csv(args.ratings)
    if args.plan:
        plan = AssignmentPlan.from_json(Path(args.plan).read_text(encoding="utf-8"))
        records = resolve_models(records, plan)
    report = aggregate(records, categories=categories or None)
    sys.stdout.write(format_report(report))
    return 0


def _adapt_providers(config: PipelineConfig):
    vlm = build_vlm(config.vlm, base_dir=config.base_dir)
    tts = build_tts(config.tts, wpm=config.optimizer.wpm)
    return vlm, tts


def cmd_adapt_describe(args) -> int:
    config = PipelineConfig.from_file(args.config)
    ctx = load_adapt_context(args.context)
    vlm, tts = _adapt_providers(config)
    reply = describe_now(ctx, args.time, vlm, tts=tts)
    print(reply.text)
    if reply.audio_uri:
        print(f"audio: {reply.audio_uri}")
    return 0


def cmd_adapt_question(args) -> int:
    config = PipelineConfig.from_file(args.config)
    ctx = load_adapt_context(args.context)
    vlm, tts = _adapt_providers(config)
    reply = answer_question(ctx, args.time, args.question, vlm, tts=tts)
    print(reply.text)
    if reply.audio_uri:
        print(f"audio: {reply.audio_uri}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adauthor",
                                     description="audio description authoring engine")
    sub = parser.add_subparsers(dest="command", required=True)

    genad = sub.add_parser("genad", help="run the generation pipeline")
    genad.add_argument("--config", required=True)
    genad.add_argument("--asset", required=True, help="asset spec JSON file")
    genad.add_argument("--out", default=None, help="output directory")
    genad.add_argument("--dry-run", action="store_true")
    genad.add_argument("--scene-threshold", type=float, default=None)
    genad.add_argument("--min-scene-len", type=float, default=None)
    genad.add_argument("--frame-rate", type=float, default=None)
    genad.add_argument("--time-tol", type=float, default=None)
    genad.add_argument("--min-gap", type=float, default=None)
    genad.add_argument("--high-conf", type=float, default=None)
    genad.add_argument("--wpm", type=float, default=None)
    genad.add_argument("--max-retries", type=int, default=None)
    genad.add_argument("--min-utterance", type=float, default=None)
    genad.set_defaults(func=cmd_genad)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8800)
    serve.set_defaults(func=cmd_serve)

    export = sub.add_parser("export", help="convert a track file")
    export.add_argument("--track", required=True)
    export.add_argument("--format", required=True)
    export.add_argument("--asset-spec", dest="asset_spec",
                        help="asset spec (required for vtt)")
    export.add_argument("--out", default=None)
    export.set_defaults(func=cmd_export)

    evaluate = sub.add_parser("eval", help="rating plans and aggregation")
    eval_sub = evaluate.add_subparsers(dest="eval_command", required=True)
    plan = eval_sub.add_parser("plan", help="build a seeded assignment plan")
    plan.add_argument("--seed", type=int, required=True)
    plan.add_argument("--raters", required=True, help="comma-separated rater ids")
    plan.add_argument("--videos", required=True, help="comma-separated video ids")
    plan.add_argument("--models", required=True, help="comma-separated model ids")
    plan.add_argument("--out", default=None)
    plan.set_defaults(func=cmd_eval_plan)
    agg = eval_sub.add_parser("aggregate", help="aggregate a ratings file")
    agg.add_argument("ratings")
    agg.add_argument("--plan", default=None)
    agg.set_defaults(func=cmd_eval_aggregate)

    adapt = sub.add_parser("adapt", help="on-demand paused-frame queries")
    adapt_sub = adapt.add_subparsers(dest="adapt_command", required=True)
    describe = adapt_sub.add_parser("describe")
    describe.add_argument("--config", required=True)
    describe.add_argument("--context", required=True,
                          help="context bundle written by genad")
    describe.add_argument("--time", type=float, required=True)
    describe.set_defaults(func=cmd_adapt_describe)
    question = adapt_sub.add_parser("question")
    question.add_argument("--config", required=True)
    question.add_argument("--context", required=True)
    question.add_argument("--time", type=float, required=True)
    question.add_argument("--question", required=True)
    question.set_defaults(func=cmd_adapt_question)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Unavailable as exc:
        print(str(exc), file=sys.stderr)
        return 3
    except AdAuthorError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
