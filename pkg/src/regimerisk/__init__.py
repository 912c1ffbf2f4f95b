__version__ = "0.3.0"
__author__ = "Mitiku Yohannes"
__all__ = ["__version__"]
