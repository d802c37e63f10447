import argparse
from pathlib import Path

from swarmlab import __version__, commands, config, utils
from swarmlab.errors import ConfigError
from swarmlab.experiment_config import ExperimentRegistry

EPILOG = """
Examples:
  # Benchmark grid with the default parameters, ten paired seeds per cell
  swarmlab bench --config standard --out results/standard
  swarmlab bench --config quick --seed 7 --workers 2

  # Recompute summary.csv / summary.md from the raw per-run CSVs
  swarmlab report --in results/standard

  # Adversarial image against a weights file
  swarmlab planted --label 3 --out planted3.json
  swarmlab attack --model planted3.json --label 3 --iters 200 --init random
  swarmlab attack --model mlp.json --label 1 --iters 999 --init dataset \\
      --dataset t10k-images-idx3-ubyte --labels t10k-labels-idx1-ubyte

  # Presets and run history
  swarmlab experiments
  swarmlab history -n 20
"""


class SwarmlabArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors become ConfigError (exit code 2)."""

    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid seed '{text}'") from exc
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return value


def _label(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid label '{text}'") from exc
    if not 0 <= value <= 9:
        raise argparse.ArgumentTypeError("label must lie in 0-9")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = SwarmlabArgumentParser(
        prog="swarmlab",
        description="Improved genetic algorithm benchmarks and black-box adversarial images",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=SwarmlabArgumentParser)

    bench = subparsers.add_parser("bench", help="Run an experiment grid")
    bench.add_argument("--config", required=True, help="Preset name or experiment JSON file")
    bench.add_argument("--out", type=Path, help="Output directory (default: results/<name>)")
    bench.add_argument("--seed", type=_seed, help="Override the master seed")
    bench.add_argument("--workers", type=int, help="Worker threads (default: from config)")
    bench.add_argument("-q", "--quiet", action="store_true", help="Suppress progress and tables")

    attack = subparsers.add_parser("attack", help="Generate an adversarial image")
    attack.add_argument("--model", type=Path, required=True, help="Weights file (JSON)")
    attack.add_argument("--label", type=_label, required=True, help="Target label 0-9")
    attack.add_argument("--iters", type=int, help="Generations including the initial one")
    attack.add_argument("--init", choices=["random", "dataset"], help="Population initialization")
    attack.add_argument("--dataset", type=Path, help="IDX image file for dataset initialization")
    attack.add_argument("--labels", type=Path, help="IDX label file; keeps only target-label seeds")
    attack.add_argument("--threshold", type=int, help="Binarization threshold 0-255 (default 128)")
    attack.add_argument("--population", type=int, help="Population size (default 100)")
    attack.add_argument("--seed", type=_seed, default=0, help="Random seed")
    attack.add_argument("--out", type=Path, help="Output directory (default: results/attack)")
    attack.add_argument("-q", "--quiet", action="store_true", help="Suppress progress and tables")

    report = subparsers.add_parser("report", help="Regenerate summaries from raw CSVs")
    report.add_argument("--in", dest="in_dir", type=Path, required=True, help="Bench output directory")
    report.add_argument("-q", "--quiet", action="store_true", help="Suppress tables")

    planted = subparsers.add_parser("planted", help="Write a planted linear-pattern model")
    planted.add_argument("--label", type=_label, required=True, help="Target label 0-9")
    planted.add_argument("--out", type=Path, required=True, help="Weights file to write")
    planted.add_argument("--seed", type=_seed, default=0, help="Seed of the random pattern")

    subparsers.add_parser("experiments", help="List experiment presets")

    history = subparsers.add_parser("history", help="List recent bench/attack invocations")
    history.add_argument("-n", type=int, default=10, help="Number of experiments to show")

    return parser


def dispatch_command(args: argparse.Namespace) -> None:
    if args.command == "bench":
        experiment = ExperimentRegistry().resolve(args.config)
        if args.seed is not None:
            experiment.master_seed = args.seed
        if args.workers is not None:
            experiment.workers = args.workers
        experiment.validate()
        commands.cmd_bench(experiment, args.out, quiet=args.quiet)
        return
    if args.command == "attack":
        commands.cmd_attack(
            args.model,
            args.label,
            iterations=args.iters,
            init_mode=args.init,
            dataset_path=args.dataset,
            labels_path=args.labels,
            threshold=args.threshold,
            population_size=args.population,
            seed=args.seed,
            out_dir=args.out,
            quiet=args.quiet,
        )
        return
    if args.command == "report":
        commands.cmd_report(args.in_dir, quiet=args.quiet)
        return
    if args.command == "planted":
        commands.cmd_planted(args.label, args.out, args.seed)
        return
    if args.command == "experiments":
        commands.cmd_experiments()
        return
    if args.command == "history":
        commands.cmd_history(args.n)
        return


@utils.handle_cli_errors
def main(argv: list[str] | None = None) -> None:
    utils.setup_console()
    args = build_parser().parse_args(argv)
    config.ensure_defaults()
    dispatch_command(args)


if __name__ == "__main__":
    main()
