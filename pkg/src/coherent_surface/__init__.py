"""Surface-code memory under coherent Z rotations and readout errors."""

__version__ = "0.1.0"
