"""coexpm: design and metrology toolkit for collinear photon-pair sources
that operate two phase-matching channels (birefringent and grating-assisted)
in one poled crystal.

Submodules:

* dispersion - refractive-index models with documented coefficient sources
* phasematch - collinear type-II solvers, coexistence period, design sweeps
* poling     - duty-cycle Fourier algebra and fabrication-error Monte Carlo
* biphoton   - polarization pair states, Bell tests, tomography
* spectrum   - phase-matching spectra and filtered joint spectral densities
* countstats - coincidence ratios, visibility fits, event-level simulations
* cli        - deterministic command-line front end
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
