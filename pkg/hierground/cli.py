"""hierGround command-line interface."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from hierground.about import __version__


def parse_seed_range(text: str) -> range:
    """Parse ``a..b`` (inclusive) or a single seed."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            start, stop = int(lo), int(hi)
        else:
            start = stop = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected SEED or A..B, got {text!r}") from e
    if stop < start:
        raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
    return range(start, stop + 1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hierGround",
        description="Phrase-hierarchical visual grounding on synthetic shape scenes.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""\
examples:
  hierGround train --config cfg.json --out runs/full      Train and keep the best-val checkpoint
  hierGround eval --ckpt runs/full/best.hgck --split test Prec@0.5 with per-depth breakdown
  hierGround ablate --config cfg.json --seeds 3           Five-row component ladder
  hierGround sweep --config cfg.json --param iterations --values 1,2,4,6
  hierGround gen-data --seeds 0..99 --split test --out scenes/
  hierGround viz --ckpt runs/full/best.hgck --scene scenes/scene_7.json --out viz/
  echo "red square left of blue circle" | hierGround chunk
""",
    )
    p.add_argument("-V", "--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument(
        "-f", "--format", choices=["table", "json", "plain"], default="table", help="Output format (default: table)"
    )
    p.add_argument("-d", "--debug", action="store_true", help="Debug output")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", required=True)

    train = sub.add_parser("train", help="Train a model and write its checkpoint and log")
    train.add_argument("--config", metavar="FILE", default=None, help="JSON run configuration")
    train.add_argument("--out", metavar="DIR", default=None, help="Run directory (default: ./runs/<config>_seed<n>)")

    ev = sub.add_parser("eval", help="Evaluate a checkpoint on a split")
    ev.add_argument("--ckpt", metavar="FILE", required=True, help="Checkpoint to evaluate")
    ev.add_argument(
        "--config", metavar="FILE", default=None, help="JSON configuration the checkpoint must match (dimensions)"
    )
    ev.add_argument("--split", choices=["train", "val", "test"], default="test", help="Split (default: test)")
    ev.add_argument("--data", metavar="DIR", default=None, help="Scene directory written by gen-data")
    ev.add_argument("--csv", metavar="FILE", default=None, help="Metrics CSV path (default: next to checkpoint)")

    ablate = sub.add_parser("ablate", help="Run the component ablation ladder")
    ablate.add_argument("--config", metavar="FILE", default=None, help="JSON base configuration")
    ablate.add_argument("--seeds", type=int, default=3, metavar="K", help="Run seeds per row (default: 3)")
    ablate.add_argument("--out", metavar="DIR", default=None, help="Root directory for the ladder runs")
    ablate.add_argument(
        "--no-acceptance", action="store_true", help="Skip the matcher-less comparison and acceptance thresholds"
    )
    ablate.add_argument("--strict", action="store_true", help="Exit with status 1 when an acceptance threshold fails")

    sweep = sub.add_parser("sweep", help="Sweep one hyperparameter")
    sweep.add_argument("--config", metavar="FILE", default=None, help="JSON base configuration")
    sweep.add_argument(
        "--param",
        required=True,
        choices=["iterations", "hier_lambda", "lambda1", "lambda2", "inverse_temperature"],
        help="Hyperparameter to vary",
    )
    sweep.add_argument("--values", required=True, metavar="V1,V2,...", help="Comma-separated values")
    sweep.add_argument("--seeds", type=int, default=1, metavar="K", help="Run seeds per value (default: 1)")
    sweep.add_argument("--out", metavar="DIR", default=None, help="Root directory for the sweep runs")

    viz = sub.add_parser("viz", help="Write attention maps, box overlay and trajectory for one scene")
    viz.add_argument("--ckpt", metavar="FILE", required=True, help="Checkpoint to visualize")
    viz.add_argument("--scene", metavar="FILE", required=True, help="Scene JSON file")
    viz.add_argument("--out", metavar="DIR", default="./viz", help="Output directory (default: ./viz)")

    gen = sub.add_parser("gen-data", help="Write synthetic scenes and a split manifest")
    gen.add_argument("--seeds", type=parse_seed_range, required=True, metavar="A..B", help="Inclusive seed range")
    gen.add_argument("--split", choices=["train", "val", "test"], default="test", help="Manifest split (default: test)")
    gen.add_argument("--out", metavar="DIR", required=True, help="Output directory")
    gen.add_argument("--config", metavar="FILE", default=None, help="JSON configuration (scene settings)")

    chunk = sub.add_parser("chunk", help="Decouple sentences from stdin into phrases (one JSON object per line)")
    chunk.add_argument(
        "--max-phrases", type=int, default=None, metavar="N", help="Merge phrases beyond N (default: no cap)"
    )
    return p


def _setup_logging(debug: bool = False) -> None:
    level = logging.DEBUG if debug else logging.INFO
    fmt = "%(levelname)s: %(message)s" if not debug else "%(levelname)s [%(name)s] %(message)s"
    logging.basicConfig(level=level, format=fmt, stream=sys.stderr)


def _load_config(path: str | None, **overrides):
    from hierground.config import RunConfig

    config = RunConfig.load(path) if path else RunConfig()
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return config.replace(**overrides) if overrides else config


def _run_chunk(grounder, args, stream=None) -> int:
    from hierground.text.chunker import hierarchical_masks

    for line in stream or sys.stdin:
        sentence = line.strip()
        if not sentence:
            continue
        decomposition = grounder.chunk(sentence, max_phrases=args.max_phrases)
        document = decomposition.to_dict()
        document["masks"] = [m.as_list() for m in hierarchical_masks(decomposition)]
        print(json.dumps(document))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.debug)

    from hierground.grounder import HierGrounder
    from hierground.output import get_formatter

    formatter = get_formatter(args.format)

    try:
        if args.command == "train":
            config = _load_config(args.config, output_dir=args.out)
            with HierGrounder.from_config(config) as grounder:
                print(formatter.format_training(grounder.train()))

        elif args.command == "eval":
            report = HierGrounder.from_config(_load_config(args.config)).evaluate(
                args.ckpt,
                split=args.split,
                data_dir=args.data,
                csv_path=args.csv,
                check_config=args.config is not None,
            )
            print(formatter.format_metrics(report))

        elif args.command == "ablate":
            with HierGrounder.from_config(_load_config(args.config)) as grounder:
                table = grounder.ablate(seeds=args.seeds, out_root=args.out, acceptance=not args.no_acceptance)
                print(formatter.format_ablation(table))
            if args.strict and table.acceptance is not None and not table.acceptance.passed:
                failed = ", ".join(c.name for c in table.acceptance.failures)
                logging.getLogger("hierground").error("Acceptance failed: %s", failed)
                return 1

        elif args.command == "sweep":
            from hierground.training.sweep import parse_values

            values = parse_values(args.param, args.values)
            with HierGrounder.from_config(_load_config(args.config)) as grounder:
                table = grounder.sweep(args.param, values, seeds=args.seeds, out_root=args.out)
                print(formatter.format_sweep(table))

        elif args.command == "viz":
            print(formatter.format_visualization(HierGrounder.visualize(args.ckpt, args.scene, args.out)))

        elif args.command == "gen-data":
            grounder = HierGrounder.from_config(_load_config(args.config))
            manifest = grounder.generate_data(args.seeds, args.split, args.out)
            listed = len(manifest[args.split])
            print(f"Wrote {len(args.seeds)} scenes; {args.split} now lists {listed}", file=sys.stderr)

        elif args.command == "chunk":
            return _run_chunk(HierGrounder(), args)

    except KeyboardInterrupt:
        print("\nInterrupted.", file=sys.stderr)
        return 130
    except Exception as e:
        logging.getLogger("hierground").error("Error: %s", e)
        if args.debug:
            import traceback

            traceback.print_exc()
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())
