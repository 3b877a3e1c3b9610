"""Quartic C^2 spline reconstruction of gridded volume data.

Library layout:

* ``geometry``   - type-6 tetrahedral partition of a box grid
* ``bernstein``  - quartic Bernstein-Bezier evaluation/derivative machinery
* ``boxspline``  - the seven-direction box spline (oracle + BB table)
* ``domain``     - index sets, data points, boundary classification
* ``simplex``    - exact rational two-phase simplex for l1 minimization
* ``nearbest``   - near-best coefficient-functional derivation
* ``stencils``   - the embedded coefficient-functional library
* ``qi``         - quasi-interpolant assembly, evaluation, compilation
* ``volume``     - raw volume ingestion and analytic test fields
* ``isosurface`` - marching-tetrahedra extraction and OBJ/PLY export
* ``convergence``- error/order measurement harness
* ``cli``        - command-line front end
"""

from .geometry import DomainGrid

__all__ = [
    "DomainGrid", "QISpline", "approximate",
    "sample_test_function", "read_raw", "TEST_FUNCTIONS",
    "IsoRequest", "extract", "write_mesh",
]

__version__ = "0.1.0"

def __getattr__(name):  # lazy re-exports keep import time low
    if name in ("QISpline", "approximate"):
        from . import qi
        return getattr(qi, name)
    if name in ("sample_test_function", "read_raw", "TEST_FUNCTIONS"):
        from . import volume
        return getattr(volume, name)
    if name in ("IsoRequest", "extract", "write_mesh"):
        from . import isosurface
        return getattr(isosurface, name)
    raise AttributeError(f"module 'boxqi' has no attribute {name!r}")
