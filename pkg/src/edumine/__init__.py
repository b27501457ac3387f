"""Student performance prediction from eTextbook interaction logs."""
__version__ = "0.1.0"
