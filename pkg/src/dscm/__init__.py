"""Causal graphs for systems of stochastic differential equations."""

from importlib import resources

__version__ = "0.1.0"


def data_path(name: str) -> str:
    """Filesystem path of a bundled data file such as ``example1.dscm``."""
    return str(resources.files(__package__) / "data" / name)
