"""Recover spacetime metrics from simulated local field measurements.

Submodules
----------
numerics
    Special functions, regulator and radial quadrature.
geometry
    Events, charts, exact metrics and the flat world function.
fields
    Wightman functions for the model catalogue.
detectors
    Unruh-DeWitt detector pairs and the extraction protocols.
estimator
    Finite-difference metric estimates and convergence sweeps.
cli
    Config-driven runs with CSV output.
"""
from .numerics import KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
