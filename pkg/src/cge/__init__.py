"""cge: a numerical laboratory for conformal growth of SLE excursions.

Subpackages by theme:

- conformal: disk automorphisms, Green function, Poisson kernel, removal maps
- hypergeom: Gauss 2F1 machinery and the chordal capacity Laplace transform
- capacity: exact-in-law capacity sampling via the boundary angle SDE
- exponent: accumulated-capacity Laplace exponent, Legendre transform
- subordinator: driftful jump subordinators, first passage, overshoot
- growth: the cutoff excursion aggregation engine and its statistics
- field: fragmentation-tree random fields and covariance checks
- cli: deterministic file-based command line surface
"""

__version__ = "0.1.0"
