"""Numerical laboratory for self-similar blowup of corotational wave maps.

Subpackages cover the closed-form profile objects, the radial finite
difference grid, energy norms, the similarity-variable evolution with blowup
time tuning, the mode-stability analysis of the linearized flow, and the
resolvent built from connection coefficients.
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = ("profile", "grid", "norms", "spectral", "resolvent", "evolution", "cli")

__all__ = list(_SUBMODULES)


def __getattr__(name):
    # lazy submodule access keeps `import wavemaplab` cheap (numba lives
    # behind evolution) while `wavemaplab.evolution` still just works
    if name in _SUBMODULES:
        return importlib.import_module("." + name, __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
