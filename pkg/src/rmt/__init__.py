"""Large-dimensional random-matrix inference toolkit.

Modules cover the numeric substrate (:mod:`rmt.linalg`), limiting-spectrum
machinery (:mod:`rmt.stieltjes`), cluster-based population-eigenvalue
estimation (:mod:`rmt.gestimation`), spiked-model analysis and detection
(:mod:`rmt.spikes`), direction-of-arrival estimation (:mod:`rmt.doa`) and a
reproducible Monte-Carlo harness (:mod:`rmt.simulate`).  ``rmt.cli`` exposes
everything on the command line.
"""

__version__ = "0.1.0"
