"""
Command-line entry point: `python -m app.main <subcommand> [options]`.

Exit codes: 0 success, 1 validation error (bad input, config or missing
prerequisite), 2 runtime error (divergence, numeric trouble).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from app.core.config import load_run_config
from app.core.exceptions import LatentGError
from app.domain.enums import ModelRole
from app.services import pipeline

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Flat `section.key = value` config file")
    common.add_argument("--seed", type=int, help="Global seed (overrides the config file)")
    common.add_argument("--out", type=Path, help="Run directory for all artifacts")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one config value; repeatable",
    )

    parser = argparse.ArgumentParser(prog="latentg", description="Teacher-student text classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", parents=[common], help="Generate the seeded synthetic corpus")
    synth.add_argument("--n", type=int, default=2000, help="Number of samples")

    prep = sub.add_parser("prep", parents=[common], help="Clean, split and build the vocabulary")
    prep.add_argument("--input", type=Path, help="Input CSV (default: synthetic.csv in the run directory)")

    stats = sub.add_parser("stats", parents=[common], help="Class counts and length histogram")
    stats.add_argument("--input", type=Path, help="Raw CSV (default: the prepared corpus)")

    sub.add_parser("tfidf", parents=[common], help="Export idf table and TF-IDF triples")
    sub.add_parser("train-teacher", parents=[common], help="Train the teacher network")
    sub.add_parser("algorithm1", parents=[common], help="Teacher features, mixture fit and component map")
    sub.add_parser("train-student", parents=[common], help="Train the student with transfer signals")

    evaluate = sub.add_parser("evaluate", parents=[common], help="Score a checkpoint on the test split")
    evaluate.add_argument("--model", choices=[role.value for role in ModelRole], default=ModelRole.STUDENT.value)

    kfold = sub.add_parser("kfold", parents=[common], help="k-fold cross-validation of the full pipeline")
    kfold.add_argument("--k", type=int, help="Number of folds (default: corpus.k_folds)")

    sub.add_parser("baseline", parents=[common], help="TF-IDF logistic regression and naive Bayes")
    return parser


def run(args: argparse.Namespace) -> None:
    config = load_run_config(args.config, args.overrides, seed=args.seed, output_dir=args.out)
    logging.getLogger().setLevel(config.log_level)
    artifacts = pipeline.open_run(config)
    logger.info(f"{args.command}: run directory {artifacts.root}, config digest {artifacts.config_digest}")

    command = args.command
    if command == "synth":
        pipeline.cmd_synth(config, artifacts, args.n)
    elif command == "prep":
        pipeline.cmd_prep(config, artifacts, args.input)
    elif command == "stats":
        pipeline.cmd_stats(config, artifacts, args.input)
    elif command == "tfidf":
        pipeline.cmd_tfidf(config, artifacts)
    elif command == "train-teacher":
        pipeline.cmd_train_teacher(config, artifacts)
    elif command == "algorithm1":
        pipeline.cmd_algorithm1(config, artifacts)
    elif command == "train-student":
        pipeline.cmd_train_student(config, artifacts)
    elif command == "evaluate":
        pipeline.cmd_evaluate(config, artifacts, ModelRole(args.model))
    elif command == "kfold":
        pipeline.cmd_kfold(config, artifacts, args.k)
    elif command == "baseline":
        pipeline.cmd_baseline(config, artifacts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    args = build_parser().parse_args(argv)
    try:
        run(args)
    except LatentGError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args.command} failed unexpectedly: {e}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
