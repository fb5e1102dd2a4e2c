"""Main entry point for the ShakingBot simulator."""

import argparse
import json
import logging
import sys
from dataclasses import replace
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import structlog

from shakingbot_sim import __version__
from shakingbot_sim.bag_model import read_snapshot, write_snapshot
from shakingbot_sim.config import SimConfig, load_config
from shakingbot_sim.harness import (
    Method,
    TierGenerationError,
    adjustment_mechanism_experiment,
    check_directional_claims,
    format_claims,
    format_results_table,
    gen_tier,
    run_generalization,
    run_suite,
    run_trial,
    shaking_mechanism_experiment,
    to_json_line,
    write_results_csv,
)
from shakingbot_sim.log_utils import setup_logging
from shakingbot_sim.perception import (
    MASK_CLASSES,
    PATTERNS,
    read_mask_png,
    render_topdown,
    score_masks,
    write_depth_pgm,
    write_png,
)
from shakingbot_sim.server import create_server
from shakingbot_sim.utils.file_utils import write_lines

stdlogger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

# Errors reported as a one-line message with exit code 1
USER_ERRORS = (ValueError, OSError, TierGenerationError)


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="TOML settings file (default: built-in defaults)",
    )


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """
    Parse command line arguments.

    Returns:
        Parsed arguments
    """
    parser = argparse.ArgumentParser(
        description="ShakingBot simulator - dynamic bag opening and bagging trials",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  shakingbot-sim run-trial --config configs/default.toml --tier 2 --seed 3
  shakingbot-sim run-suite --trials 8 --out results/
  shakingbot-sim render --tier 3 --seed 0 --out bag.png
  shakingbot-sim eval-seg --pred pred/ --truth truth/
        """,
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Set logging level (default: INFO)",
    )
    parser.add_argument(
        "--log-file",
        type=str,
        default=None,
        help="Path for structured JSON logs (default: console, or logs/ for serve)",
    )
    parser.add_argument(
        "--console-only",
        action="store_true",
        help="Log only to console, ignore --log-file parameter.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    trial = commands.add_parser("run-trial", help="Run one seeded trial")
    _add_config_arg(trial)
    trial.add_argument(
        "--method",
        choices=[m.value for m in Method],
        default=Method.SHAKINGBOT.value,
    )
    trial.add_argument("--tier", type=int, choices=[1, 2, 3], default=1)
    trial.add_argument("--seed", type=int, default=0)
    trial.add_argument("--budget", type=int, default=None, help="Action budget")
    trial.add_argument("--log", type=str, default=None, help="Trial event log")

    suite = commands.add_parser("run-suite", help="Run the tier x method suite")
    _add_config_arg(suite)
    suite.add_argument("--trials", type=int, default=None, help="Seeds per cell")
    suite.add_argument("--workers", type=int, default=None)
    suite.add_argument("--out", type=str, default=None, help="Output directory")
    suite.add_argument(
        "--no-reference",
        action="store_true",
        help="Leave the real-robot results out of the table",
    )

    render = commands.add_parser("render", help="Render a bag from above")
    _add_config_arg(render)
    source = render.add_mutually_exclusive_group(required=True)
    source.add_argument("--state", type=str, help="Bag snapshot file")
    source.add_argument("--tier", type=int, choices=[1, 2, 3])
    render.add_argument("--seed", type=int, default=0)
    render.add_argument("--out", type=str, required=True, help="RGB PNG path")
    render.add_argument("--depth", type=str, default=None, help="Depth PGM path")
    render.add_argument("--save-state", type=str, default=None)
    render.add_argument("--pattern", choices=[p for p in PATTERNS if p], default=None)
    render.add_argument("--no-paint", action="store_true")

    seg = commands.add_parser("eval-seg", help="Score predicted masks")
    seg.add_argument("--pred", type=str, required=True, help="Predicted mask dir")
    seg.add_argument("--truth", type=str, required=True, help="True mask dir")

    mechanisms = commands.add_parser(
        "mechanisms", help="Paired shaking and adjustment experiments"
    )
    _add_config_arg(mechanisms)
    mechanisms.add_argument("--seeds", type=int, default=16)

    general = commands.add_parser(
        "generalization", help="Unseen bag size, pattern and colour"
    )
    _add_config_arg(general)
    general.add_argument("--trials", type=int, default=3)

    serve = commands.add_parser("serve", help="Run the MCP server")
    _add_config_arg(serve)
    serve.add_argument("--out", type=str, default=None, help="Output directory")

    return parser.parse_args(argv)


def cmd_run_trial(args: argparse.Namespace, config: SimConfig) -> None:
    trial = config.trial_config(Method(args.method), args.tier, args.seed)
    if args.budget is not None:
        trial = replace(trial, budget=args.budget)
    record = run_trial(trial, args.log)
    print(to_json_line(record.to_dict()))


def cmd_run_suite(args: argparse.Namespace, config: SimConfig) -> None:
    harness = config.harness
    out_dir = Path(args.out) if args.out else None
    harness = replace(
        harness,
        trials_per_cell=args.trials or harness.trials_per_cell,
        workers=args.workers or harness.workers,
        log_dir=str(out_dir / "trials") if out_dir else harness.log_dir,
    )
    result = run_suite(config.trial_config(), harness)
    print(format_results_table(result.rows, reference=not args.no_reference))
    print()
    print(format_claims(check_directional_claims(result.rows)))
    if out_dir is not None:
        write_results_csv(result.rows, out_dir / "results.csv")
        lines = (to_json_line(r.to_dict()) for r in result.records)
        write_lines(out_dir / "records.jsonl", lines)


def cmd_render(args: argparse.Namespace, config: SimConfig) -> None:
    if args.state:
        state = read_snapshot(args.state, config.physics)
    else:
        state = gen_tier(
            args.tier, config.bag, args.seed, config.physics, config.perception.camera
        )
    if args.save_state:
        write_snapshot(state, args.save_state)
    obs = render_topdown(
        state, config.perception.camera, paint=not args.no_paint, pattern=args.pattern
    )
    write_png(obs.rgb, args.out)
    if args.depth:
        write_depth_pgm(obs.depth, args.depth)
    print(f"Rendered {state.n_particles} particles to {args.out}")


def _read_masks(directory: str) -> np.ndarray:
    return np.stack(
        [read_mask_png(Path(directory) / f"{name}.png") for name in MASK_CLASSES]
    )


def cmd_eval_seg(args: argparse.Namespace, config: SimConfig) -> None:
    """Masks are read as <dir>/handle.png and <dir>/rim.png."""
    pred = _read_masks(args.pred).astype(np.float64)
    score = score_masks(pred, _read_masks(args.truth))
    print(json.dumps(score._asdict(), sort_keys=True))


def cmd_mechanisms(args: argparse.Namespace, config: SimConfig) -> None:
    seeds = tuple(range(args.seeds))
    for result in (
        shaking_mechanism_experiment(
            config.bag, seeds, config.policy, config.primitives
        ),
        adjustment_mechanism_experiment(
            config.bag, seeds, config.policy, config.primitives
        ),
    ):
        verdict = "holds" if result.holds else "FAILS"
        print(
            f"[{verdict}] {result.name}: mean {result.quantity} change "
            f"{result.mean_delta:+.3f} over {len(seeds)} seeds"
        )


def cmd_generalization(args: argparse.Namespace, config: SimConfig) -> None:
    rows = run_generalization(config.trial_config(), args.trials)
    for name, row in rows.items():
        line = format_results_table([row], reference=False).splitlines()[-1]
        print(f"{name}: {line}")


def cmd_serve(args: argparse.Namespace, config: SimConfig) -> None:
    server = create_server(config, Path(args.out) if args.out else None)
    stdlogger.info("Starting MCP server")
    structured_logger.info("Starting MCP server")
    server.run()


COMMANDS: dict[str, Callable[[argparse.Namespace, SimConfig], None]] = {
    "run-trial": cmd_run_trial,
    "run-suite": cmd_run_suite,
    "render": cmd_render,
    "eval-seg": cmd_eval_seg,
    "mechanisms": cmd_mechanisms,
    "generalization": cmd_generalization,
    "serve": cmd_serve,
}


def _log_file(args: argparse.Namespace) -> Optional[str]:
    if args.console_only:
        return None
    if args.log_file:
        return str(args.log_file)
    if args.command == "serve":
        # stdio carries the MCP protocol, keep logs in a file
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        return str(Path("logs") / f"shakingbot_sim_{timestamp}.log")
    return None


def main(argv: Optional[Sequence[str]] = None) -> None:
    """
    Main entry point for the command line interface.
    """
    args = parse_args(argv)
    log_file = _log_file(args)
    setup_logging(args.log_level, log_file)
    structured_logger.debug(
        "Structured logger initialized in main",
        log_level=args.log_level,
        command=args.command,
    )

    try:
        config = load_config(getattr(args, "config", None))
        COMMANDS[args.command](args, config)
    except USER_ERRORS as e:
        stdlogger.debug("Command failed", exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
