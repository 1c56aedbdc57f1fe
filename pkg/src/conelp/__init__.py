"""Numerical toolkit for symmetric cones: Jordan algebra, invariant geometry,
Whitney lattices, cone quadrature, Littlewood-Paley analysis and Bergman
projectors on tube domains.

Submodules load on first attribute access so that importing the package
(for example from the command line) does not pull in numpy early.
"""
import importlib

__version__ = "0.1.0"

_SUBMODULES = ("jordan", "geometry", "lattice", "quadrature", "lp", "bergman", "acceptance", "cli")


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_SUBMODULES))
