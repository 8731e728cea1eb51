"""Braid and word invariants, extremal length, dbar kernels, and bound calculators.

Modules:
    words      reduced words, syllables, L- / L+ invariants, enumeration
    braid      B3 and its center quotient, normal forms, theta, census
    config3    triples, the collinearity hypersurface, loop decoders
    conformal  extremal length closed forms and the grid solver
    dbar       doubly periodic kernels and the dbar correction machinery
    bounds     log-space calculators for the headline counting bounds
    cli        the `fbt` command line front end
"""

__version__ = "0.1.0"
