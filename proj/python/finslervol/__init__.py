"""Volume forms of Finsler spacetimes."""

from ._core import (
    FinslerError,
    Metric,
    __version__,
    action,
    builtin,
    cartan_form,
    catalog_names,
    classify,
    density,
    find_privileged,
    integrate_volume,
    lagrangian,
    load_spec,
    metric,
    norm,
    run_cli,
    validate,
)

__all__ = [
    "FinslerError",
    "Metric",
    "__version__",
    "action",
    "builtin",
    "cartan_form",
    "catalog_names",
    "classify",
    "density",
    "find_privileged",
    "integrate_volume",
    "lagrangian",
    "load_spec",
    "metric",
    "norm",
    "run_cli",
    "validate",
]
