"""Near-field focusing with large cylindrical dipole apertures.

Simulation and optimization of power-constrained excitations for
discrete dipole arrays and continuous current sheets, with analytic
field models for validation.
"""

__version__ = "0.1.0"
