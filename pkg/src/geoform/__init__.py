"""Leader-follower formation simulation on curved graph surfaces with online DMD velocity prediction."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
