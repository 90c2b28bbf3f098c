"""Mass-spring chains with perfect transfer and fractional revival from persymmetric q-Racah spectra."""

__version__ = "0.1.0"
