"""Fractional thin-film Galerkin solver: C++ core bindings and output readers."""

from .io import (
    RUN_COLUMNS,
    SchemaError,
    read_report,
    read_run_csv,
    read_snapshot,
    read_sweep_csv,
    snapshot_to_grid,
)

try:
    from . import _core
except ImportError:  # readers stay usable without the compiled module
    _core = None

__all__ = [
    "RUN_COLUMNS",
    "SchemaError",
    "read_report",
    "read_run_csv",
    "read_snapshot",
    "read_sweep_csv",
    "snapshot_to_grid",
    "_core",
]
