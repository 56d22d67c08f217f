from nlwasserstein.cli.config import RunConfig, load_config
from nlwasserstein.cli.main import build_parser, main


__all__ = ["build_parser", "load_config", "main", "RunConfig"]
