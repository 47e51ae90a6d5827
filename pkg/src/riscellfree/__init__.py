"""Uplink simulator and closed-form throughput analytics for RIS-assisted
cell-free massive MIMO over spatially correlated channels.

The package is organised around the simulation pipeline:

``config``
    Scenario files, geometry with wrap-around distances, seeded RNG streams.
``correlation``
    RIS element layout, sinc spatial-correlation matrix, shared-covariance
    algebra and its PSD factorisation.
``propagation``
    Three-slope path loss, link blocking, pilot assignment.
``channels``
    Per-coherence-interval channel realisations and aggregated channels.
``estimation``
    Linear MMSE estimation of the aggregated channels and its statistics.
``phases``
    RIS phase-shift designs and the total-NMSE objective.
``performance``
    Closed-form ergodic net throughput and its Monte-Carlo oracle.
``experiments`` / ``cli``
    Reproducible experiment runners emitting CSV artifacts.
"""

__version__ = "0.1.0"
