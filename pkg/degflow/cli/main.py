import argparse
import logging
import sys

from degflow import training, version
from degflow.cli import commands, studies
from degflow.enums import StudyKind
from degflow.exceptions import EXIT_OK, DegflowError
from degflow.settings import load_config, log_level

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> None:
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degflow",
        description="Learn real-world LR degradation and synthesize LR-HR pairs.",
    )
    parser.add_argument("--config", help="run config file (default: $DEGFLOW_CONFIG)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="override the config out_dir")
    parser.add_argument("--quiet", action="store_true", help="hide progress bars")
    parser.add_argument("--log-level", help="default: $DEGFLOW_LOG_LEVEL or INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("train", help="train FGDM, then RFDM")

    synth = sub.add_parser("synthesize", help="synthesize LR images for an HR set")
    synth.add_argument("--hr-dir", help="HR images (default: config hr_dir)")
    synth.add_argument("--skip-fgdm", action="store_true")
    synth.add_argument("--skip-rfdm", action="store_true")

    study = sub.add_parser("study", help="run one of the studies")
    study.add_argument(
        "--study", required=True, choices=[k.value for k in StudyKind]
    )

    evaluate = sub.add_parser("evaluate", help="score a manifest against references")
    evaluate.add_argument("--manifest", required=True)
    evaluate.add_argument("--reference-dir", required=True)
    evaluate.add_argument("--output", help="CSV path (default: next to manifest)")

    corpus = sub.add_parser("gen-corpus", help="write the procedural desk corpus")
    corpus.add_argument("--root", help="corpus root (default: parent of hr_dir)")

    sub.add_parser("version", help="print the version")
    return parser


def run(args: argparse.Namespace) -> None:
    if args.command == "version":
        print(version.__version__)
        return
    config = load_config(args.config).with_overrides(seed=args.seed, out_dir=args.out)
    if args.command == "train":
        commands.cmd_train(config)
    elif args.command == "synthesize":
        commands.cmd_synthesize(config, args.hr_dir, args.skip_fgdm, args.skip_rfdm)
    elif args.command == "study":
        studies.cmd_study(config, args.study)
    elif args.command == "evaluate":
        commands.cmd_evaluate(
            args.manifest, args.reference_dir, args.output, config.eval_crop
        )
    elif args.command == "gen-corpus":
        commands.cmd_gen_corpus(config, args.root)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    training.progress_enabled = not args.quiet
    try:
        configure_logging(log_level(args.log_level))
        run(args)
    except DegflowError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
