"""coldbell-plots: render coldbell sweep CSV files as figure-style images."""

from .reader import SweepFormatError, load_sweep_csv
from .render import PlotError, PlotSpec, build_figure, render

__version__ = "0.1.0"
