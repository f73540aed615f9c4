"""Figure rendering for parsu benchmark CSVs."""

from .figures import (FigureInfo, RUN_COLUMNS, SchemaError, SPEEDUP_COLUMNS,
                      plot_convergence, plot_speedup)

__version__ = "0.1.0"

__all__ = ["FigureInfo", "RUN_COLUMNS", "SPEEDUP_COLUMNS", "SchemaError",
           "plot_convergence", "plot_speedup", "__version__"]
