"""Information geometry of densities and diffeomorphisms on periodic grids."""
from .grid import PeriodicGrid
from .density import Density

__version__ = "0.1.0"
__all__ = ["PeriodicGrid", "Density", "__version__"]
