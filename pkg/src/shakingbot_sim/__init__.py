"""ShakingBot simulator - dynamic bag opening with a particle bag model."""

try:
    from importlib.metadata import PackageNotFoundError, version
except ImportError:
    from importlib_metadata import PackageNotFoundError, version  # type: ignore

try:
    __version__ = version("shakingbot-sim")
except PackageNotFoundError:
    __version__ = "0.0.0.dev"

__all__ = ["__version__"]
