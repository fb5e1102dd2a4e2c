# Vulture whitelist for shakingbot-sim
# This file contains identifiers that vulture should not report as dead code

# FastMCP tool handlers, registered by decorator
_.run_trial  # FastMCP tool handler
_.run_suite  # FastMCP tool handler
_.describe_config  # FastMCP tool handler

# CLI entry points
_.main  # Entry point function

# Test fixtures and pytest hooks
_.flat_tier  # Fixture used through usefixtures
_.reset_logging  # Autouse fixture
_.clean_root  # Fixture requested by parameter name
_.flat_bag  # Fixture requested by parameter name
_.weightless_bag  # Fixture requested by parameter name
_.mock_server  # Fixture requested by parameter name
_.side_effect  # Mock attribute used in tests

# Settings fields read through dataclasses.asdict or the TOML loader
_.ke_eps
_.workspace_half_extents
_.harris_cluster_radius
_.prob_blur_sigma
_.log_dir

# LogRecord fields referenced by the JSON formatter
_.exc_info
_.asctime
