"""Command-line interface.

Subcommands: render-classical (layered painterly), stylize (loss-descent
stylization), plan (hybrid stroke planning + render), render-plan (render a
saved stroke plan), serve (HTTP job API). Exit codes: 0 success, 1 usage
error, 2 processing error. Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import ConfigError, PlanConfig, load_config
from .imgio import load_image, save_png
from .painterly import BrushModel
from .pipeline import apply_exclusions, run_classical_job, run_plan_job, run_stylize_job
from .planio import parse_plan
from .raster import RasterError
from .render import render_sequence

DEFAULT_PORT = 8787

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PROCESSING = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="strokeforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_common(p):
        p.add_argument("--config", metavar="F", help="config JSON file")
        p.add_argument("--seed", type=int, metavar="N", help="override the RNG seed")

    p = sub.add_parser("render-classical", help="multi-layer painterly rendering")
    p.add_argument("input")
    p.add_argument("output")
    add_common(p)
    p.add_argument("--brush", choices=["curved", "triangle", "rectangle", "random_raster"])

    p = sub.add_parser("stylize", help="loss-descent stylization")
    p.add_argument("content")
    p.add_argument("style")
    p.add_argument("output")
    add_common(p)

    p = sub.add_parser("plan", help="hybrid stroke planning and rendering")
    p.add_argument("input")
    p.add_argument("output")
    add_common(p)
    p.add_argument("--strokes-out", metavar="F.json", help="also write the stroke plan JSON")

    p = sub.add_parser("render-plan", help="render a saved stroke plan")
    p.add_argument("plan")
    p.add_argument("output")
    add_common(p)

    p = sub.add_parser("serve", help="run the HTTP job service")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    add_common(p)
    return parser


def _load_config(args) -> PlanConfig:
    config = load_config(args.config) if args.config else PlanConfig()
    if getattr(args, "seed", None) is not None:
        config = replace(
            config,
            rng_seed=args.seed,
            painterly=replace(config.painterly, rng_seed=args.seed),
        )
    if getattr(args, "brush", None):
        config = replace(config, brush=BrushModel(args.brush))
    return config


def _cmd_render_classical(args) -> int:
    config = _load_config(args)
    image = load_image(args.input)
    png = run_classical_job(image, config)
    with open(args.output, "wb") as fh:
        fh.write(png)
    return EXIT_OK


def _cmd_stylize(args) -> int:
    config = _load_config(args)
    content = load_image(args.content)
    style = load_image(args.style)
    png = run_stylize_job(content, style, config)
    with open(args.output, "wb") as fh:
        fh.write(png)
    return EXIT_OK


def _cmd_plan(args) -> int:
    config = _load_config(args)
    image = load_image(args.input)
    result = run_plan_job(image, config)
    with open(args.output, "wb") as fh:
        fh.write(result.png)
    if args.strokes_out:
        with open(args.strokes_out, "wb") as fh:
            fh.write(result.plan_json)
    return EXIT_OK


def _cmd_render_plan(args) -> int:
    config = _load_config(args)
    try:
        with open(args.plan, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise RasterError(f"cannot read plan file {args.plan}: {exc}") from exc
    strokes, dims = parse_plan(blob)
    strokes = apply_exclusions(strokes, blob, config)
    canvas = render_sequence(strokes, dims, config.render, config.brush)
    save_png(canvas, args.output)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("STROKEFORGE_PORT", DEFAULT_PORT))
    config = _load_config(args)
    app = create_app(default_config=config)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return EXIT_OK


_COMMANDS = {
    "render-classical": _cmd_render_classical,
    "stylize": _cmd_stylize,
    "plan": _cmd_plan,
    "render-plan": _cmd_render_plan,
    "serve": _cmd_serve,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, RasterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROCESSING
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROCESSING


def main():
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
