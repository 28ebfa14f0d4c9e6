"""radiofp: RF fingerprinting of IQ sample windows.

Synthetic radio captures (OFDM + hardware impairments + multipath channels),
non-overlapping window datasets, 1D residual classifiers, a distance-gated
device ensemble, and training/evaluation tooling, all on numpy.
"""

__version__ = "0.1.0"
