"""MCP server exposing trials, suites and the active configuration."""

import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Callable, List, Optional, Protocol, TypeVar

import structlog

from shakingbot_sim.config import SimConfig
from shakingbot_sim.harness import (
    Method,
    check_directional_claims,
    format_claims,
    format_results_table,
    to_json_line,
    write_results_csv,
)
from shakingbot_sim.harness import run_suite as run_trial_suite
from shakingbot_sim.harness import run_trial as run_one_trial
from shakingbot_sim.log_utils import log_function_call

# Type definitions for FastMCP
T = TypeVar("T")


class ToolDecorator(Protocol):
    def __call__(self, func: Callable[..., T]) -> Callable[..., T]: ...


class FastMCPProtocol(Protocol):
    def tool(self) -> ToolDecorator: ...
    def run(self) -> None: ...


logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

RESULTS_CSV = "results.csv"


class ShakingBotServer:
    """MCP server for running simulated bagging trials."""

    def __init__(
        self, config: Optional[SimConfig] = None, output_dir: Optional[Path] = None
    ) -> None:
        """
        Initialize the server with the settings every tool call starts from.

        Args:
            config: Loaded settings; defaults to SimConfig()
            output_dir: Directory for trial logs and result CSVs; nothing is
                written when None
        """
        self.config = config or SimConfig()
        self.output_dir = output_dir

        from mcp.server.fastmcp import FastMCP

        self.mcp: FastMCPProtocol = FastMCP("ShakingBot Simulator")
        self._register_tools()

    def _log_path(self, name: str) -> Optional[Path]:
        return self.output_dir / name if self.output_dir else None

    def _register_tools(self) -> None:
        """Register all tools with the MCP server."""

        @self.mcp.tool()
        @log_function_call
        def run_trial(
            method: str = Method.SHAKINGBOT.value,
            tier: int = 1,
            seed: int = 0,
            budget: Optional[int] = None,
        ) -> str:
            """
            Run one seeded trial and return its record as JSON.

            Args:
                method: One of shakingbot, shakingbot_A, shakingbot_H,
                    analytic_primitives
                tier: Difficulty tier, 1 (open bag) to 3 (handles hidden)
                seed: Trial seed; the same seed gives the same trial
                budget: Action budget; defaults to the configured one
            """
            try:
                trial = self.config.trial_config(Method(method), tier, seed)
                if budget is not None:
                    trial = replace(trial, budget=budget)
                structured_logger.info(
                    "Starting trial", method=method, tier=tier, seed=seed
                )
                record = run_one_trial(
                    trial,
                    self._log_path(f"trial_tier{tier}_{method}_seed{seed}.jsonl"),
                )
                return to_json_line(record.to_dict())
            except Exception as e:
                logger.error(f"Error running trial: {str(e)}")
                structured_logger.error(
                    "Trial tool failed",
                    error=str(e),
                    error_type=type(e).__name__,
                    method=method,
                    tier=tier,
                    seed=seed,
                )
                raise

        @self.mcp.tool()
        @log_function_call
        def run_suite(
            trials_per_cell: Optional[int] = None,
            tiers: Optional[List[int]] = None,
            methods: Optional[List[str]] = None,
            reference: bool = True,
        ) -> str:
            """
            Run the tier x method suite and return the results table.

            Args:
                trials_per_cell: Seeds per (tier, method) cell; defaults to the
                    configured number
                tiers: Subset of tiers to run
                methods: Subset of methods to run
                reference: Print the real-robot results under matching rows

            Returns:
                The aligned results table followed by the ordering checks
            """
            try:
                harness = self.config.harness
                changes: dict[str, object] = {}
                if trials_per_cell is not None:
                    changes["trials_per_cell"] = trials_per_cell
                if tiers:
                    changes["tiers"] = tuple(tiers)
                if methods:
                    changes["methods"] = tuple(Method(m) for m in methods)
                if self.output_dir is not None:
                    changes["log_dir"] = str(self.output_dir / "trials")
                harness = replace(harness, **changes)  # type: ignore[arg-type]
                structured_logger.info("Starting suite", **harness.to_dict())

                result = run_trial_suite(self.config.trial_config(), harness)
                if self.output_dir is not None:
                    write_results_csv(result.rows, self.output_dir / RESULTS_CSV)

                claims = check_directional_claims(result.rows)
                return (
                    format_results_table(result.rows, reference=reference)
                    + "\n\n"
                    + format_claims(claims)
                )
            except Exception as e:
                logger.error(f"Error running suite: {str(e)}")
                structured_logger.error(
                    "Suite tool failed", error=str(e), error_type=type(e).__name__
                )
                raise

        @self.mcp.tool()
        @log_function_call
        def describe_config() -> str:
            """Return the active configuration as JSON."""
            return json.dumps(self.config.to_dict(), indent=2, sort_keys=True)

    @log_function_call
    def run(self) -> None:
        """Run the MCP server."""
        logger.info("Starting MCP server")
        structured_logger.info("Starting MCP server")
        self.mcp.run()


@log_function_call
def create_server(
    config: Optional[SimConfig] = None, output_dir: Optional[Path] = None
) -> ShakingBotServer:
    """
    Create a new ShakingBotServer instance.

    Args:
        config: Loaded settings
        output_dir: Directory for trial logs and result CSVs

    Returns:
        A new ShakingBotServer instance
    """
    return ShakingBotServer(config, output_dir)
